#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "wlauth/bytes.hpp"
#include "wlauth/error.hpp"
#include "wlauth/parallel.hpp"

namespace wlauth {

// All model arithmetic is exact; values become doubles only when printed.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Parses a non-negative decimal literal ("79.2e9", "0.5", "4560") into an exact rational.
inline Rational parse_decimal(std::string_view text) {
  auto fail = [&] { return Error(Errc::invalid_input, "not a decimal number: '" + std::string(text) + "'"); };
  std::size_t i = 0;
  BigInt mantissa = 0;
  long long scale = 0;
  bool digits = false;
  for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, digits = true) {
    mantissa = mantissa * 10 + (text[i] - '0');
  }
  if (i < text.size() && text[i] == '.') {
    for (++i; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, digits = true) {
      mantissa = mantissa * 10 + (text[i] - '0');
      --scale;
    }
  }
  if (!digits) throw fail();
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
    long long exp = 0;
    bool exp_digits = false;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, exp_digits = true) {
      exp = exp * 10 + (text[i] - '0');
      if (exp > 4000) throw fail();
    }
    if (!exp_digits) throw fail();
    scale += negative ? -exp : exp;
  }
  if (i != text.size()) throw fail();
  Rational value(mantissa);
  BigInt power = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(scale < 0 ? -scale : scale));
  return scale < 0 ? value / Rational(power) : value * Rational(power);
}

/// Communication and application overhead, all in seconds.
///
/// T_ov = c0 + c1 * P + g0 + g1 * G + a0, where P is the processor count that contends for local
/// resources (M for message passing, k inside a cluster) and G the number of dispatched groups.
struct OverheadParams {
  Rational c0 = 0, c1 = 0, g0 = 0, g1 = 0, a0 = 0;

  Rational total(std::size_t contending_processors, std::size_t groups) const {
    return c0 + c1 * contending_processors + g0 + g1 * groups + a0;
  }
};

struct ModelParams {
  std::uint64_t len_pac_bits = 32 * 1024;
  std::uint64_t n = 1024;
  std::uint64_t inlen_umac_bits = 128;
  std::uint64_t outlen_umac_bits = 32;
  Rational th_umac_bps = Rational(792) * 100000000;  // 79.2 Gbit/s
  Rational th_sig_per_sec = 4560;
  std::uint64_t message_size_bits = std::uint64_t{3} << 30;
  OverheadParams overhead;

  void validate() const {
    if (len_pac_bits == 0 || inlen_umac_bits == 0 || outlen_umac_bits == 0 ||
        message_size_bits == 0 || th_umac_bps <= 0 || th_sig_per_sec <= 0) {
      throw Error(Errc::invalid_input, "model parameters must be positive");
    }
    if (!is_power_of_two(n)) throw Error(Errc::invalid_block_size, "n must be a power of two");
    const auto& o = overhead;
    if (o.c0 < 0 || o.c1 < 0 || o.g0 < 0 || o.g1 < 0 || o.a0 < 0) {
      throw Error(Errc::invalid_input, "overhead coefficients must be non-negative");
    }
  }
};

/// NTRU parameters: 1256-bit signatures at 4560 signatures/s.
inline ModelParams ntru_model_params() { return ModelParams{}; }

/// Elliptic-curve parameters: 384-bit signatures at 5140 signatures/s.
inline ModelParams ecc_model_params() {
  ModelParams p;
  p.th_sig_per_sec = 5140;
  return p;
}

struct TimingBreakdown {
  Rational t1_s;  // leaf digests
  Rational t2_s;  // interior digests
  Rational t3_s;  // root signature
  Rational t_g_s;
};

inline TimingBreakdown group_time(const ModelParams& p) {
  p.validate();
  TimingBreakdown t;
  t.t1_s = Rational(BigInt(p.n) * p.len_pac_bits) / p.th_umac_bps;
  t.t2_s = Rational(BigInt(p.n - 1) * p.inlen_umac_bits) / p.th_umac_bps;
  t.t3_s = Rational(1) / p.th_sig_per_sec;
  t.t_g_s = t.t1_s + t.t2_s + t.t3_s;
  return t;
}

inline std::uint64_t derive_group_count(std::uint64_t message_size_bits, std::uint64_t n,
                                        std::uint64_t len_pac_bits) {
  const BigInt block = BigInt(n) * len_pac_bits;
  if (block == 0 || message_size_bits == 0 || BigInt(message_size_bits) % block != 0) {
    throw Error(Errc::partial_block_unsupported,
                "message of " + std::to_string(message_size_bits) +
                    " bits is not a whole number of " + block.str() + "-bit blocks");
  }
  return static_cast<std::uint64_t>(BigInt(message_size_bits) / block);
}

inline Rational sequential_time(const ModelParams& p, std::uint64_t groups) {
  if (groups < 1) throw Error(Errc::invalid_input, "G must be >= 1");
  return group_time(p).t_g_s * groups;
}

/// One tree built by k processors: each builds an (n/k)-leaf subtree, the coordinator combines the
/// k - 1 top nodes and signs, plus sync_coeff per barrier level.
inline Rational cooperative_group_time(const ModelParams& p, std::uint64_t k, const Rational& sync_coeff) {
  p.validate();
  if (!is_power_of_two(k) || k > p.n) {
    throw Error(Errc::invalid_split, "k must be a power of two dividing n");
  }
  const std::uint64_t leaves = p.n / k;
  return Rational(BigInt(leaves) * p.len_pac_bits) / p.th_umac_bps +
         Rational(BigInt(leaves - 1) * p.inlen_umac_bits) / p.th_umac_bps +
         Rational(BigInt(k - 1) * p.inlen_umac_bits) / p.th_umac_bps +
         Rational(1) / p.th_sig_per_sec + sync_coeff * log2_floor(k);
}

inline const Rational kImprovementTarget = Rational(95, 100);

struct Metrics {
  Rational speedup;
  Rational efficiency;
  Rational improvement;
  bool meets_improvement_target = false;
};

inline Metrics metrics(const Rational& t_s, const Rational& t_par, std::uint64_t processors) {
  if (t_par <= 0) throw Error(Errc::invalid_timing, "parallel time must be positive");
  if (processors < 1) throw Error(Errc::invalid_input, "processor count must be >= 1");
  Metrics m;
  m.speedup = t_s / t_par;
  m.efficiency = m.speedup / processors;
  m.improvement = (t_s - t_par) / t_s;
  m.meets_improvement_target = m.improvement >= kImprovementTarget;
  return m;
}

struct ScenarioResult {
  std::uint64_t groups = 0;
  Topology topology = Topology::message_passing(1);
  Rational t_s, t_comp, t_ov, t_par;
  Rational speedup, efficiency, improvement;
  bool meets_improvement_target = false;
};

namespace detail {

inline ScenarioResult finish_scenario(std::uint64_t groups, Topology topology, Rational t_s,
                                      Rational t_comp, Rational t_ov) {
  ScenarioResult r;
  r.groups = groups;
  r.topology = topology;
  r.t_s = std::move(t_s);
  r.t_comp = std::move(t_comp);
  r.t_ov = std::move(t_ov);
  r.t_par = r.t_comp + r.t_ov;
  const Metrics m = metrics(r.t_s, r.t_par, topology.processor_count());
  r.speedup = m.speedup;
  r.efficiency = m.efficiency;
  r.improvement = m.improvement;
  r.meets_improvement_target = m.meets_improvement_target;
  return r;
}

}  // namespace detail

inline ScenarioResult parallel_time_mps(const ModelParams& p, std::uint64_t groups,
                                        std::uint64_t processors) {
  const Rational t_g = group_time(p).t_g_s;
  const Assignment a = assign_groups(groups, processors);
  const std::size_t busiest = *std::max_element(a.per_unit_counts.begin(), a.per_unit_counts.end());
  return detail::finish_scenario(groups, Topology::message_passing(processors), t_g * groups,
                                 t_g * busiest, p.overhead.total(processors, groups));
}

inline ScenarioResult parallel_time_cluster(const ModelParams& p, std::uint64_t groups,
                                            std::uint64_t clusters, std::uint64_t per_cluster,
                                            const Rational& sync_coeff) {
  if (clusters < 1 || per_cluster < 1) throw Error(Errc::invalid_input, "m and k must be >= 1");
  if (sync_coeff < 0) throw Error(Errc::invalid_input, "sync coefficient must be non-negative");
  const Rational t_g = group_time(p).t_g_s;
  const Rational t_coop = cooperative_group_time(p, per_cluster, sync_coeff);
  const Assignment a = assign_groups_clustered(groups, clusters, per_cluster);
  Rational t_comp = 0;
  for (std::size_t c = 0; c < clusters; ++c) {
    const Rational cluster_time = t_g * a.owned_per_processor[c] + t_coop * a.cooperative_counts[c];
    if (cluster_time > t_comp) t_comp = cluster_time;
  }
  return detail::finish_scenario(groups, Topology::clustered(clusters, per_cluster), t_g * groups,
                                 t_comp, p.overhead.total(per_cluster, groups));
}

struct SweepRequest {
  ModelParams params;
  // Empty means params.message_size_bits alone.
  std::vector<std::uint64_t> message_sizes_bits;
  std::vector<std::uint64_t> mps_processors;
  std::vector<std::uint64_t> cluster_counts;
  std::vector<std::uint64_t> cluster_sizes;
  Rational sync_coeff = 0;
  std::string sig_label = "ntru";
};

struct SweepRow {
  std::size_t scenario_id = 0;
  std::uint64_t message_bits = 0;
  std::uint64_t n = 0;
  std::string sig_label;
  ScenarioResult result;
};

/// One row per configuration, ordered by message size, then topology (mps before cluster), then
/// M or (m, k).
inline std::vector<SweepRow> sweep(const SweepRequest& req) {
  std::vector<std::uint64_t> sizes = req.message_sizes_bits;
  if (sizes.empty()) sizes.push_back(req.params.message_size_bits);
  std::vector<SweepRow> rows;
  for (std::uint64_t bits : sizes) {
    const std::uint64_t groups = derive_group_count(bits, req.params.n, req.params.len_pac_bits);
    auto push = [&](ScenarioResult r) {
      rows.push_back({rows.size() + 1, bits, req.params.n, req.sig_label, std::move(r)});
    };
    for (std::uint64_t m : req.mps_processors) push(parallel_time_mps(req.params, groups, m));
    for (std::uint64_t m : req.cluster_counts) {
      for (std::uint64_t k : req.cluster_sizes) {
        push(parallel_time_cluster(req.params, groups, m, k, req.sync_coeff));
      }
    }
  }
  return rows;
}

inline constexpr std::string_view kSweepCsvHeader =
    "scenario_id,message_bits,n,G,topology,M,m,k,sig_scheme,t_s_ms,t_comp_ms,t_ov_ms,t_par_ms,"
    "speedup,efficiency,improvement";

inline std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out(kSweepCsvHeader);
  out += '\n';
  const Rational ms = 1000;
  for (const auto& row : rows) {
    const auto& r = row.result;
    const auto& topo = r.topology;
    out += std::to_string(row.scenario_id) + ',' + std::to_string(row.message_bits) + ',' +
           std::to_string(row.n) + ',' + std::to_string(r.groups) + ',';
    if (topo.is_clustered()) {
      out += "cluster," + std::to_string(topo.processor_count()) + ',' +
             std::to_string(topo.cluster_count()) + ',' + std::to_string(topo.cluster_size());
    } else {
      out += "mps," + std::to_string(topo.processor_count()) + ",,";
    }
    out += ',' + row.sig_label;
    for (const Rational* v : {&r.t_s, &r.t_comp, &r.t_ov, &r.t_par}) {
      out += ',' + format_fixed6(to_double(*v * ms));
    }
    for (const Rational* v : {&r.speedup, &r.efficiency, &r.improvement}) {
      out += ',' + format_fixed6(to_double(*v));
    }
    out += '\n';
  }
  return out;
}

}  // namespace wlauth
