#pragma once

// Test-only reference computations. None of these call into the code paths they check beyond the
// two digest primitives (leaf_digest / node_digest), which have their own golden vectors.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "wlauth/wlauth.hpp"

namespace wlauth::oracle {

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t len) {
  Bytes out(len);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

inline std::vector<Packet> random_block(std::mt19937_64& rng, std::size_t n, std::size_t min_len = 1,
                                        std::size_t max_len = 64) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::vector<Packet> block;
  for (std::size_t i = 0; i < n; ++i) block.emplace_back(random_bytes(rng, len(rng)));
  return block;
}

/// Root by repeatedly folding the list pairwise, with no tree storage.
inline Bytes pairwise_fold_root(const std::vector<Packet>& block, const DigestSpec& spec) {
  std::vector<Bytes> layer;
  for (const auto& p : block) layer.push_back(leaf_digest(p.payload(), spec));
  while (layer.size() > 1) {
    std::vector<Bytes> next;
    for (std::size_t i = 0; i + 1 < layer.size(); i += 2) next.push_back(node_digest(layer[i], layer[i + 1], spec));
    layer = std::move(next);
  }
  return layer.front();
}

/// All digests of the tree as layers, built recursively from the definition.
inline Bytes subtree_digest(const std::vector<Packet>& block, std::size_t first, std::size_t count,
                            const DigestSpec& spec) {
  if (count == 1) return leaf_digest(block[first].payload(), spec);
  return node_digest(subtree_digest(block, first, count / 2, spec),
                     subtree_digest(block, first + count / 2, count / 2, spec), spec);
}

/// Per-processor event simulation of the group schedule.
///
/// Groups are dealt round-robin (group g to unit g mod units), which yields the same counts as
/// the block assignment. Inside a cluster, groups go one per processor while at least k remain;
/// the rest are built cooperatively: every processor builds its n/k-leaf subtree, all wait at a
/// barrier (released after sync_coeff * log2 k), then processor 0 combines k - 1 nodes and signs.
struct EventSimulator {
  ModelParams params;
  Rational sync_coeff = 0;

  Rational leaf_time(std::uint64_t leaves) const {
    return Rational(leaves * params.len_pac_bits) / params.th_umac_bps;
  }
  Rational node_time(std::uint64_t nodes) const {
    return Rational(nodes * params.inlen_umac_bits) / params.th_umac_bps;
  }
  Rational sign_time() const { return Rational(1) / params.th_sig_per_sec; }
  Rational whole_group() const { return leaf_time(params.n) + node_time(params.n - 1) + sign_time(); }

  Rational makespan_mps(std::uint64_t groups, std::uint64_t processors) const {
    std::vector<Rational> clock(processors, Rational(0));
    for (std::uint64_t g = 0; g < groups; ++g) clock[g % processors] += whole_group();
    return *std::max_element(clock.begin(), clock.end());
  }

  Rational makespan_cluster(std::uint64_t groups, std::uint64_t clusters, std::uint64_t k) const {
    std::vector<std::uint64_t> held(clusters, 0);
    for (std::uint64_t g = 0; g < groups; ++g) ++held[g % clusters];

    Rational makespan = 0;
    for (std::uint64_t c = 0; c < clusters; ++c) {
      std::vector<Rational> clock(k, Rational(0));
      std::uint64_t remaining = held[c];
      while (remaining >= k) {
        for (auto& t : clock) t += whole_group();
        remaining -= k;
      }
      unsigned levels = 0;
      for (std::uint64_t v = k; v > 1; v >>= 1) ++levels;
      for (; remaining > 0; --remaining) {
        for (auto& t : clock) t += leaf_time(params.n / k) + node_time(params.n / k - 1);
        const Rational release = *std::max_element(clock.begin(), clock.end()) + sync_coeff * levels;
        for (auto& t : clock) t = release;
        clock[0] += node_time(k - 1) + sign_time();
      }
      makespan = std::max(makespan, *std::max_element(clock.begin(), clock.end()));
    }
    return makespan;
  }
};

}  // namespace wlauth::oracle
