#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wlauth/digest.hpp"
#include "wlauth/loss_sim.hpp"
#include "wlauth/model.hpp"
#include "wlauth/parallel.hpp"
#include "wlauth/signature.hpp"

namespace wlauth {

/// Flat key=value run configuration shared by every subcommand.
///
/// Lines are `key = value`; `#` starts a comment. Every key is validated before anything runs and
/// unknown or repeated keys are errors.
struct RunConfig {
  ModelParams model;
  std::vector<std::uint64_t> message_sizes_bits;
  std::string sig_scheme = "ntru";
  unsigned sig_len_bits = 1256;
  Bytes digest_key;
  Bytes sig_key;
  Topology topology = Topology::message_passing(1);
  Rational sync_coeff_s = 0;
  std::uint64_t groups = 16;
  ChannelModel channel;
  AttackModel attack;

  DigestSpec digest_spec() const {
    const auto bits = static_cast<unsigned>(model.outlen_umac_bits);
    return digest_key.empty() ? DigestSpec::unkeyed(bits) : DigestSpec::keyed(bits, digest_key);
  }

  /// Signing always uses the deterministic TEST construction at the configured length.
  SignatureSpec signature_spec() const { return SignatureSpec::test(sig_len_bits, sig_key); }

  std::size_t payload_bytes() const { return model.len_pac_bits / 8; }

  static RunConfig parse(std::string_view text);
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::uint64_t config_uint(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key, "expected an unsigned integer, got '" + std::string(v) + "'");
  }
  return out;
}

inline std::uint64_t config_positive(const std::string& key, std::string_view v) {
  const std::uint64_t out = config_uint(key, v);
  if (out == 0) throw ConfigError(key, "must be positive");
  return out;
}

inline double config_probability(const std::string& key, std::string_view v) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty() || !(out >= 0.0 && out <= 1.0)) {
    throw ConfigError(key, "expected a probability in [0, 1], got '" + std::string(v) + "'");
  }
  return out;
}

inline Rational config_rational(const std::string& key, std::string_view v) {
  try {
    return parse_decimal(v);
  } catch (const Error&) {
    throw ConfigError(key, "expected a non-negative decimal, got '" + std::string(v) + "'");
  }
}

inline Bytes config_hex(const std::string& key, std::string_view v) {
  try {
    return from_hex(v);
  } catch (const Error&) {
    throw ConfigError(key, "expected hex bytes");
  }
}

/// Bit count with an optional binary suffix: 1.5G = 1.5 * 2^30, 32K = 32 * 2^10.
inline std::uint64_t config_bits(const std::string& key, std::string_view v) {
  unsigned shift = 0;
  if (!v.empty()) {
    switch (v.back()) {
      case 'K': case 'k': shift = 10; break;
      case 'M': case 'm': shift = 20; break;
      case 'G': case 'g': shift = 30; break;
      default: break;
    }
  }
  if (shift != 0) v.remove_suffix(1);
  const Rational value = config_rational(key, v) * Rational(BigInt(1) << shift);
  if (denominator(value) != 1 || value <= 0 ||
      value > Rational(std::numeric_limits<std::uint64_t>::max())) {
    throw ConfigError(key, "not a positive whole number of bits");
  }
  return numerator(value).convert_to<std::uint64_t>();
}

inline const std::vector<std::string_view>& known_config_keys() {
  static const std::vector<std::string_view> keys = {
      "len_pac_bits", "n", "inlen_umac_bits", "outlen_umac_bits", "th_umac_bps", "th_sig_per_sec",
      "sig_len_bits", "digest_key_hex", "sig_key_hex", "topology", "M", "m", "k", "sync_coeff_s",
      "c0", "c1", "g0", "g1", "a0", "p_loss", "pollution_rate", "seed", "message_bits", "G",
      "sig_scheme", "channel", "p_enter_bad", "p_exit_bad", "loss_in_bad", "attack_mode"};
  return keys;
}

}  // namespace detail

inline RunConfig RunConfig::parse(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::istringstream lines{std::string(text)};
  std::string line;
  for (std::size_t lineno = 1; std::getline(lines, line); ++lineno) {
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = detail::trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    }
    std::string key(detail::trim(body.substr(0, eq)));
    const auto& known = detail::known_config_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(key, "unknown key");
    }
    if (!kv.emplace(key, std::string(detail::trim(body.substr(eq + 1)))).second) {
      throw ConfigError(key, "repeated key");
    }
  }

  RunConfig cfg;
  auto get = [&](std::string_view key) -> std::optional<std::string> {
    if (auto it = kv.find(key); it != kv.end()) return it->second;
    return std::nullopt;
  };

  // The scheme preset goes first so explicit th_sig_per_sec / sig_len_bits override it.
  if (auto v = get("sig_scheme")) {
    if (*v == "ntru") {
      cfg.model.th_sig_per_sec = 4560;
      cfg.sig_len_bits = 1256;
    } else if (*v == "ecc") {
      cfg.model.th_sig_per_sec = 5140;
      cfg.sig_len_bits = 384;
    } else if (*v != "test") {
      throw ConfigError("sig_scheme", "expected ntru, ecc or test");
    }
    cfg.sig_scheme = *v;
  }

  using namespace detail;
  if (auto v = get("len_pac_bits")) cfg.model.len_pac_bits = config_bits("len_pac_bits", *v);
  if (auto v = get("n")) cfg.model.n = config_positive("n", *v);
  if (auto v = get("inlen_umac_bits")) cfg.model.inlen_umac_bits = config_positive("inlen_umac_bits", *v);
  if (auto v = get("outlen_umac_bits")) cfg.model.outlen_umac_bits = config_positive("outlen_umac_bits", *v);
  if (auto v = get("th_umac_bps")) cfg.model.th_umac_bps = config_rational("th_umac_bps", *v);
  if (auto v = get("th_sig_per_sec")) cfg.model.th_sig_per_sec = config_rational("th_sig_per_sec", *v);
  if (auto v = get("sig_len_bits")) {
    cfg.sig_len_bits = static_cast<unsigned>(config_positive("sig_len_bits", *v));
  }
  if (auto v = get("digest_key_hex")) cfg.digest_key = config_hex("digest_key_hex", *v);
  if (auto v = get("sig_key_hex")) cfg.sig_key = config_hex("sig_key_hex", *v);
  if (auto v = get("sync_coeff_s")) cfg.sync_coeff_s = config_rational("sync_coeff_s", *v);
  if (auto v = get("c0")) cfg.model.overhead.c0 = config_rational("c0", *v);
  if (auto v = get("c1")) cfg.model.overhead.c1 = config_rational("c1", *v);
  if (auto v = get("g0")) cfg.model.overhead.g0 = config_rational("g0", *v);
  if (auto v = get("g1")) cfg.model.overhead.g1 = config_rational("g1", *v);
  if (auto v = get("a0")) cfg.model.overhead.a0 = config_rational("a0", *v);
  if (auto v = get("G")) cfg.groups = config_positive("G", *v);
  if (auto v = get("message_bits")) {
    std::string_view rest = *v;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      cfg.message_sizes_bits.push_back(config_bits("message_bits", trim(rest.substr(0, comma))));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    if (cfg.message_sizes_bits.empty()) throw ConfigError("message_bits", "empty list");
    cfg.model.message_size_bits = cfg.message_sizes_bits.front();
  }

  if (cfg.model.len_pac_bits % 8 != 0) throw ConfigError("len_pac_bits", "must be a multiple of 8");
  if (!is_power_of_two(cfg.model.n) || cfg.model.n > (std::uint64_t{1} << 31)) {
    throw ConfigError("n", "must be a power of two");
  }
  if (cfg.model.th_umac_bps <= 0) throw ConfigError("th_umac_bps", "must be positive");
  if (cfg.model.th_sig_per_sec <= 0) throw ConfigError("th_sig_per_sec", "must be positive");
  try {
    (void)cfg.digest_spec();
  } catch (const Error& e) {
    throw ConfigError("outlen_umac_bits", e.what());
  }
  try {
    (void)cfg.signature_spec();
  } catch (const Error& e) {
    throw ConfigError("sig_len_bits", e.what());
  }

  const std::string topo = get("topology").value_or("mps");
  const std::uint64_t M = get("M") ? config_positive("M", *get("M")) : 1;
  const std::uint64_t m = get("m") ? config_positive("m", *get("m")) : 1;
  const std::uint64_t k = get("k") ? config_positive("k", *get("k")) : 1;
  if (!is_power_of_two(k) || k > cfg.model.n) {
    throw ConfigError("k", "must be a power of two no larger than n");
  }
  if (topo == "mps") {
    cfg.topology = Topology::message_passing(M);
  } else if (topo == "cluster") {
    cfg.topology = Topology::clustered(m, k);
  } else {
    throw ConfigError("topology", "expected mps or cluster");
  }

  const std::uint64_t seed = get("seed") ? config_uint("seed", *get("seed")) : 0;
  const std::string channel = get("channel").value_or("iid");
  if (channel == "iid") {
    cfg.channel = ChannelModel::iid(get("p_loss") ? config_probability("p_loss", *get("p_loss")) : 0.0, seed);
  } else if (channel == "burst") {
    auto prob = [&](const char* key, double fallback) {
      return get(key) ? config_probability(key, *get(key)) : fallback;
    };
    cfg.channel = ChannelModel::burst(prob("p_enter_bad", 0.0), prob("p_exit_bad", 1.0),
                                      prob("loss_in_bad", 1.0), seed);
  } else {
    throw ConfigError("channel", "expected iid or burst");
  }
  if (auto v = get("pollution_rate")) cfg.attack.pollution_rate = config_probability("pollution_rate", *v);
  if (auto v = get("attack_mode")) {
    if (*v == "flip") {
      cfg.attack.mode = AttackModel::Mode::flip_random_bit;
    } else if (*v == "payload") {
      cfg.attack.mode = AttackModel::Mode::replace_payload;
    } else if (*v == "signature") {
      cfg.attack.mode = AttackModel::Mode::replace_signature;
    } else {
      throw ConfigError("attack_mode", "expected flip, payload or signature");
    }
  }
  return cfg;
}

}  // namespace wlauth
