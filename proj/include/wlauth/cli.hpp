#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "wlauth/config.hpp"
#include "wlauth/loss_sim.hpp"
#include "wlauth/model.hpp"
#include "wlauth/packet.hpp"
#include "wlauth/parallel.hpp"

// Subcommand bodies. They work on in-memory buffers and streams; tools/wlauth.cpp does file I/O.
namespace wlauth::cli {

/// Splits a raw stream into G blocks of n packets of len_pac_bits each.
inline std::vector<Block> split_stream(ByteView input, const RunConfig& cfg) {
  const std::uint64_t groups =
      derive_group_count(static_cast<std::uint64_t>(input.size()) * 8, cfg.model.n, cfg.model.len_pac_bits);
  const std::size_t payload = cfg.payload_bytes();
  std::vector<Block> stream(groups);
  std::size_t offset = 0;
  for (auto& block : stream) {
    block.reserve(cfg.model.n);
    for (std::uint64_t i = 0; i < cfg.model.n; ++i, offset += payload) {
      auto first = input.begin() + static_cast<std::ptrdiff_t>(offset);
      block.emplace_back(Bytes(first, first + static_cast<std::ptrdiff_t>(payload)));
    }
  }
  return stream;
}

inline Bytes cmd_sign(ByteView input, const RunConfig& cfg) {
  auto result = process_stream_parallel(split_stream(input, cfg), cfg.topology, cfg.digest_spec(),
                                        cfg.signature_spec());
  Bytes archive;
  for (const auto& pkt : result.packets) serialize_into(archive, pkt);
  return archive;
}

/// Writes one CSV row per packet; returns 0 if all accept, 1 if any reject, 2 if the archive does
/// not decode.
inline int cmd_verify(ByteView archive, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const DigestSpec dspec = cfg.digest_spec();
  const SignatureSpec sspec = cfg.signature_spec();
  std::vector<ArchiveEntry> entries;
  try {
    entries = read_archive(archive, dspec);
  } catch (const ParseError& e) {
    err << "verify: " << e.what() << '\n';
    return 2;
  }
  out << "offset,block_id,packet_index,verdict\n";
  bool all_accept = true;
  for (const auto& entry : entries) {
    Verdict v = Verdict::reject_malformed;
    if (entry.packet.sig_scheme_id == sspec.scheme_id()) v = verify_packet(entry.packet, dspec, sspec);
    all_accept = all_accept && v == Verdict::accept;
    out << entry.offset << ',' << entry.packet.block_id << ',' << entry.packet.packet_index() << ','
        << verdict_name(v) << '\n';
  }
  return all_accept ? 0 : 1;
}

/// Integer range: "a..b" (inclusive; empty when b < a), "a,b,c", or "" (empty).
inline std::vector<std::uint64_t> parse_range(std::string_view text, const std::string& what) {
  std::vector<std::uint64_t> out;
  text = detail::trim(text);
  if (text.empty()) return out;
  if (auto dots = text.find(".."); dots != std::string_view::npos) {
    const std::uint64_t lo = detail::config_uint(what, detail::trim(text.substr(0, dots)));
    const std::uint64_t hi = detail::config_uint(what, detail::trim(text.substr(dots + 2)));
    for (std::uint64_t v = lo; v <= hi && hi - lo < 1'000'000; ++v) out.push_back(v);
    return out;
  }
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(detail::config_uint(what, detail::trim(text.substr(0, comma))));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
  }
  return out;
}

struct ModelArgs {
  // "M=1..32"; when absent the configured M is evaluated alone.
  std::optional<std::string> sweep{};
  // "mps" or "cluster"; defaults to the configured topology.
  std::optional<std::string> topology{};
  std::optional<std::string> m_range{};
  std::optional<std::string> k_range{};
};

inline std::string cmd_model(const RunConfig& cfg, const ModelArgs& args) {
  SweepRequest req;
  req.params = cfg.model;
  req.message_sizes_bits = cfg.message_sizes_bits;
  req.sync_coeff = cfg.sync_coeff_s;
  req.sig_label = cfg.sig_scheme;

  const std::string topo = args.topology.value_or(cfg.topology.is_clustered() ? "cluster" : "mps");
  if (topo == "cluster") {
    req.cluster_counts = args.m_range ? parse_range(*args.m_range, "--m")
                                      : std::vector<std::uint64_t>{cfg.topology.cluster_count()};
    req.cluster_sizes = args.k_range ? parse_range(*args.k_range, "--k")
                                     : std::vector<std::uint64_t>{cfg.topology.cluster_size()};
  } else if (topo == "mps") {
    if (args.sweep) {
      std::string_view spec = detail::trim(*args.sweep);
      if (!spec.empty()) {
        if (spec.substr(0, 2) != "M=") throw ConfigError("--sweep", "expected M=RANGE");
        spec.remove_prefix(2);
      }
      req.mps_processors = parse_range(spec, "--sweep");
    } else {
      req.mps_processors = {cfg.topology.processor_count()};
    }
  } else {
    throw ConfigError("--topology", "expected mps or cluster");
  }
  if (std::find(req.mps_processors.begin(), req.mps_processors.end(), 0) != req.mps_processors.end() ||
      std::find(req.cluster_counts.begin(), req.cluster_counts.end(), 0) != req.cluster_counts.end()) {
    throw ConfigError("--sweep", "processor and cluster counts must be >= 1");
  }
  return format_sweep_csv(sweep(req));
}

inline std::string cmd_simulate(ByteView archive, const RunConfig& cfg) {
  std::vector<Bytes> packets;
  for (ByteView frame : frame_archive(archive)) packets.emplace_back(frame.begin(), frame.end());
  const Transmission tx = transmit(packets, cfg.channel, cfg.attack);
  const DeliveryReport report = receiver_verify_all(tx, cfg.digest_spec(), cfg.signature_spec());
  return format_delivery_csv(report, cfg.channel, cfg.attack);
}

/// Deterministic synthetic workload: cfg.groups blocks of n packets, payload bytes from a seeded
/// mt19937_64.
inline std::vector<Block> synthetic_stream(const RunConfig& cfg) {
  std::mt19937_64 rng(cfg.channel.seed);
  std::vector<Block> stream(cfg.groups);
  for (auto& block : stream) {
    for (std::uint64_t i = 0; i < cfg.model.n; ++i) {
      Bytes payload(cfg.payload_bytes());
      for (auto& b : payload) b = static_cast<std::uint8_t>(rng() >> 56);
      block.emplace_back(std::move(payload));
    }
  }
  return stream;
}

/// Zero-overhead model speedup for the configured topology and workload.
inline Rational predicted_speedup(const RunConfig& cfg) {
  ModelParams params = cfg.model;
  params.overhead = {};
  const auto& topo = cfg.topology;
  return topo.is_clustered()
             ? parallel_time_cluster(params, cfg.groups, topo.cluster_count(), topo.cluster_size(), 0).speedup
             : parallel_time_mps(params, cfg.groups, topo.processor_count()).speedup;
}

inline constexpr std::string_view kEngineCsvHeader =
    "worker_id,groups_owned,cooperative_groups_participated,busy_ms,wall_ms_total,measured_speedup,"
    "model_speedup";

inline std::string format_engine_csv(const EngineReport& report, double model_speedup) {
  std::string out(kEngineCsvHeader);
  out += '\n';
  const std::string measured =
      report.measured_speedup ? format_fixed6(*report.measured_speedup) : std::string{};
  for (const auto& w : report.workers) {
    out += std::to_string(w.worker_id) + ',' + std::to_string(w.groups_owned) + ',' +
           std::to_string(w.cooperative_groups) + ',' + format_fixed6(w.busy_ms) + ',' +
           format_fixed6(report.wall_ms) + ',' + measured + ',' + format_fixed6(model_speedup) + '\n';
  }
  return out;
}

struct BenchOutcome {
  EngineReport report;
  double model_speedup = 0.0;
  std::string csv;
};

inline BenchOutcome cmd_bench(const RunConfig& cfg) {
  BenchOutcome outcome;
  auto result = process_stream_parallel(synthetic_stream(cfg), cfg.topology, cfg.digest_spec(),
                                        cfg.signature_spec(), EngineOptions{.reference_run = true});
  if (!result.report.reference_identical.value_or(false)) {
    throw Error(Errc::invalid_input, "parallel output differs from the sequential reference");
  }
  outcome.report = std::move(result.report);
  outcome.model_speedup = to_double(predicted_speedup(cfg));
  outcome.csv = format_engine_csv(outcome.report, outcome.model_speedup);
  return outcome;
}

}  // namespace wlauth::cli
