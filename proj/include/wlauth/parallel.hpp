#pragma once

#include <barrier>
#include <chrono>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wlauth/packet.hpp"
#include "wlauth/tree.hpp"

namespace wlauth {

/// Logical processor layout: M independent processors, or m clusters of k processors that share
/// memory inside a cluster.
class Topology {
 public:
  enum class Kind { message_passing, clustered };

  static Topology message_passing(std::size_t processors) {
    if (processors < 1) throw Error(Errc::invalid_input, "processor count must be >= 1");
    return Topology(Kind::message_passing, processors, 1, 1);
  }

  static Topology clustered(std::size_t clusters, std::size_t per_cluster) {
    if (clusters < 1) throw Error(Errc::invalid_input, "cluster count must be >= 1");
    if (!is_power_of_two(per_cluster)) {
      throw Error(Errc::invalid_input, "processors per cluster must be a power of two");
    }
    return Topology(Kind::clustered, clusters * per_cluster, clusters, per_cluster);
  }

  Kind kind() const noexcept { return kind_; }
  bool is_clustered() const noexcept { return kind_ == Kind::clustered; }
  std::size_t processor_count() const noexcept { return processors_; }
  std::size_t cluster_count() const noexcept { return clusters_; }
  std::size_t cluster_size() const noexcept { return per_cluster_; }

  std::string describe() const {
    return is_clustered() ? "cluster(" + std::to_string(clusters_) + "," +
                                std::to_string(per_cluster_) + ")"
                          : "mps(" + std::to_string(processors_) + ")";
  }

 private:
  Topology(Kind kind, std::size_t processors, std::size_t clusters, std::size_t per_cluster)
      : kind_(kind), processors_(processors), clusters_(clusters), per_cluster_(per_cluster) {}

  Kind kind_;
  std::size_t processors_;
  std::size_t clusters_;
  std::size_t per_cluster_;
};

/// Group counts per processor (message passing) or per cluster (clustered).
///
/// For clusters, per_unit_counts holds the groups each cluster received, owned_per_processor the
/// whole groups each of its k processors builds alone, and cooperative_counts the remainder built
/// jointly by all k processors.
struct Assignment {
  std::vector<std::size_t> per_unit_counts;
  std::vector<std::size_t> owned_per_processor;
  std::vector<std::size_t> cooperative_counts;

  std::size_t total() const {
    return std::accumulate(per_unit_counts.begin(), per_unit_counts.end(), std::size_t{0});
  }
};

/// Deals G groups over M processors: floor(G/M) each, one extra to the first G mod M.
inline Assignment assign_groups(std::size_t groups, std::size_t processors) {
  if (groups < 1 || processors < 1) throw Error(Errc::invalid_input, "G and M must be >= 1");
  Assignment a;
  const std::size_t base = groups / processors;
  const std::size_t extra = groups - base * processors;
  a.per_unit_counts.assign(processors, base);
  for (std::size_t i = 0; i < extra; ++i) ++a.per_unit_counts[i];
  return a;
}

inline Assignment assign_groups_clustered(std::size_t groups, std::size_t clusters,
                                          std::size_t per_cluster) {
  if (per_cluster < 1) throw Error(Errc::invalid_input, "k must be >= 1");
  Assignment a = assign_groups(groups, clusters);
  for (std::size_t held : a.per_unit_counts) {
    const std::size_t owned = held / per_cluster;
    a.owned_per_processor.push_back(owned);
    a.cooperative_counts.push_back(held - owned * per_cluster);
  }
  return a;
}

struct LeafRange {
  std::size_t first = 0;
  std::size_t last = 0;

  bool operator==(const LeafRange&) const = default;
};

struct NodeRef {
  std::size_t level = 0;
  std::size_t index = 0;

  bool operator==(const NodeRef&) const = default;
};

/// Work split for one tree built by k cooperating processors: each worker builds the subtree over
/// its leaf range up to subtree_top_level; the coordinator then computes combine_nodes in order.
struct TreeSplit {
  std::vector<LeafRange> ranges;
  std::size_t subtree_top_level = 0;
  std::vector<NodeRef> combine_nodes;
};

inline TreeSplit split_tree_work(std::size_t leaf_count, std::size_t workers) {
  if (!is_power_of_two(workers) || !is_power_of_two(leaf_count) || workers > leaf_count) {
    throw Error(Errc::invalid_split, "cannot split " + std::to_string(leaf_count) +
                                         " leaves over " + std::to_string(workers) + " workers");
  }
  TreeSplit split;
  const std::size_t width = leaf_count / workers;
  for (std::size_t w = 0; w < workers; ++w) split.ranges.push_back({w * width, (w + 1) * width});
  split.subtree_top_level = log2_floor(width);
  const std::size_t height = log2_floor(leaf_count);
  for (std::size_t level = split.subtree_top_level + 1; level <= height; ++level) {
    for (std::size_t i = 0; i < (leaf_count >> level); ++i) split.combine_nodes.push_back({level, i});
  }
  return split;
}

/// Applies the combine plan once every subtree in the split is complete.
inline void combine_split(TreeBuilder& builder, const TreeSplit& split) {
  for (const auto& node : split.combine_nodes) builder.hash_nodes(node.level, node.index, node.index + 1);
}

struct WorkerStats {
  std::size_t worker_id = 0;
  std::size_t groups_owned = 0;
  std::size_t cooperative_groups = 0;
  double busy_ms = 0.0;
};

struct EngineReport {
  std::vector<WorkerStats> workers;
  double wall_ms = 0.0;
  std::optional<double> reference_wall_ms;
  std::optional<double> measured_speedup;
  // Whether the parallel output equalled the sequential reference, when one was run.
  std::optional<bool> reference_identical;
};

struct EngineOptions {
  // Also run a sequential reference pass and report measured speedup against it.
  bool reference_run = false;
};

struct EngineResult {
  std::vector<AuthenticatedPacket> packets;
  EngineReport report;
};

using Block = std::vector<Packet>;

/// Builds, signs, and emits every block in order on the calling thread.
inline std::vector<AuthenticatedPacket> process_stream_sequential(std::vector<Block> stream,
                                                                  const DigestSpec& dspec,
                                                                  const SignatureSpec& sspec) {
  std::vector<AuthenticatedPacket> out;
  for (std::size_t g = 0; g < stream.size(); ++g) {
    AuthTree tree = build_tree(g, std::move(stream[g]), dspec);
    sign_tree(tree, sspec);
    for (std::size_t i = 0; i < tree.leaf_count(); ++i) out.push_back(make_auth_packet(tree, i));
  }
  return out;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

inline void emit_block(AuthTree& tree, const SignatureSpec& sspec,
                       std::vector<AuthenticatedPacket>& sink) {
  sign_tree(tree, sspec);
  sink.resize(tree.leaf_count());
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) sink[i] = make_auth_packet(tree, i);
}

// First exception raised by any worker; rethrown by the controller after joining.
class ErrorSlot {
 public:
  void capture() {
    std::lock_guard lock(mu_);
    if (!error_) error_ = std::current_exception();
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

}  // namespace detail

/// Authenticates a stream of G blocks with coarse-grained (whole groups per processor) and, for
/// clustered topologies, medium-grained (one tree split across a cluster) parallelism.
///
/// Each logical processor is a thread. Results land in per-(block, packet) slots, so the output is
/// in stream order and identical to process_stream_sequential for every topology.
inline EngineResult process_stream_parallel(std::vector<Block> stream, const Topology& topology,
                                            const DigestSpec& dspec, const SignatureSpec& sspec,
                                            EngineOptions options = {}) {
  const std::size_t groups = stream.size();
  if (groups == 0) throw Error(Errc::invalid_input, "empty stream");
  const std::size_t n = stream.front().size();
  for (const auto& block : stream) {
    if (block.size() != n) throw Error(Errc::invalid_block_size, "blocks differ in packet count");
  }
  if (!is_power_of_two(n)) {
    throw Error(Errc::invalid_block_size, "block size must be a power of two, got " + std::to_string(n));
  }

  EngineResult result;
  std::vector<AuthenticatedPacket> reference;
  if (options.reference_run) {
    std::vector<Block> copy = stream;
    const auto t0 = detail::Clock::now();
    reference = process_stream_sequential(std::move(copy), dspec, sspec);
    result.report.reference_wall_ms = detail::elapsed_ms(t0);
  }

  std::vector<std::vector<AuthenticatedPacket>> sink(groups);
  std::vector<WorkerStats> stats(topology.processor_count());
  for (std::size_t w = 0; w < stats.size(); ++w) stats[w].worker_id = w;
  detail::ErrorSlot errors;

  const auto wall_start = detail::Clock::now();
  {
    std::vector<std::jthread> threads;
    threads.reserve(topology.processor_count());

    if (!topology.is_clustered()) {
      const Assignment a = assign_groups(groups, topology.processor_count());
      std::size_t next = 0;
      for (std::size_t w = 0; w < a.per_unit_counts.size(); ++w) {
        const std::size_t first = next;
        const std::size_t count = a.per_unit_counts[w];
        next += count;
        threads.emplace_back([&, w, first, count] {
          try {
            const auto t0 = detail::Clock::now();
            for (std::size_t g = first; g < first + count; ++g) {
              AuthTree tree = build_tree(g, std::move(stream[g]), dspec);
              detail::emit_block(tree, sspec, sink[g]);
            }
            stats[w].groups_owned = count;
            stats[w].busy_ms = detail::elapsed_ms(t0);
          } catch (...) {
            errors.capture();
          }
        });
      }
    } else {
      const std::size_t k = topology.cluster_size();
      if (k > n) throw Error(Errc::invalid_split, "cluster size exceeds block size");
      const Assignment a = assign_groups_clustered(groups, topology.cluster_count(), k);
      const TreeSplit split = split_tree_work(n, k);

      // Shared state for cooperative groups is set up before any worker starts.
      struct Cooperative {
        std::size_t group;
        std::optional<TreeBuilder> builder;
      };
      std::vector<std::vector<Cooperative>> coop(topology.cluster_count());
      std::vector<std::unique_ptr<std::barrier<>>> barriers;
      std::vector<std::size_t> cluster_first(topology.cluster_count());

      std::size_t next = 0;
      for (std::size_t c = 0; c < topology.cluster_count(); ++c) {
        cluster_first[c] = next;
        const std::size_t owned_total = a.owned_per_processor[c] * k;
        for (std::size_t j = 0; j < a.cooperative_counts[c]; ++j) {
          const std::size_t g = next + owned_total + j;
          coop[c].push_back({g, TreeBuilder(g, std::move(stream[g]), dspec)});
        }
        next += a.per_unit_counts[c];
        barriers.push_back(std::make_unique<std::barrier<>>(static_cast<std::ptrdiff_t>(k)));
      }

      for (std::size_t c = 0; c < topology.cluster_count(); ++c) {
        for (std::size_t p = 0; p < k; ++p) {
          const std::size_t w = c * k + p;
          threads.emplace_back([&, c, p, w] {
            double busy = 0.0;
            // A failing worker still arrives at every barrier so its cluster cannot deadlock.
            bool failed = false;
            const std::size_t owned = a.owned_per_processor[c];
            const std::size_t first = cluster_first[c] + p * owned;
            try {
              const auto t0 = detail::Clock::now();
              for (std::size_t g = first; g < first + owned; ++g) {
                AuthTree tree = build_tree(g, std::move(stream[g]), dspec);
                detail::emit_block(tree, sspec, sink[g]);
              }
              busy += detail::elapsed_ms(t0);
            } catch (...) {
              errors.capture();
              failed = true;
            }
            for (auto& job : coop[c]) {
              try {
                if (!failed) {
                  const auto t0 = detail::Clock::now();
                  job.builder->hash_subtree(split.ranges[p].first, split.ranges[p].last,
                                            split.subtree_top_level);
                  busy += detail::elapsed_ms(t0);
                }
              } catch (...) {
                errors.capture();
                failed = true;
              }
              barriers[c]->arrive_and_wait();
              if (p == 0 && !failed) {
                try {
                  const auto t0 = detail::Clock::now();
                  combine_split(*job.builder, split);
                  AuthTree tree = std::move(*job.builder).finish();
                  detail::emit_block(tree, sspec, sink[job.group]);
                  busy += detail::elapsed_ms(t0);
                } catch (...) {
                  errors.capture();
                  failed = true;
                }
              }
            }
            stats[w].groups_owned = owned;
            stats[w].cooperative_groups = coop[c].size();
            stats[w].busy_ms = busy;
          });
        }
      }
      // The cluster state above dies with this scope.
      threads.clear();
    }
  }
  result.report.wall_ms = detail::elapsed_ms(wall_start);
  errors.rethrow();

  result.report.workers = std::move(stats);
  if (result.report.reference_wall_ms && result.report.wall_ms > 0.0) {
    result.report.measured_speedup = *result.report.reference_wall_ms / result.report.wall_ms;
  }
  result.packets.reserve(groups * n);
  for (auto& block : sink) {
    for (auto& pkt : block) result.packets.push_back(std::move(pkt));
  }
  if (options.reference_run) result.report.reference_identical = reference == result.packets;
  return result;
}

}  // namespace wlauth
