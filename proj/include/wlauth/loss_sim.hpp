#pragma once

#include <charconv>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wlauth/packet.hpp"

namespace wlauth {

inline constexpr std::string_view kGeneratorId = "mt19937_64; uniform = (x >> 11) * 2^-53";

/// Deterministic uniform source over std::mt19937_64, whose output sequence the standard fixes.
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t below(std::uint64_t bound) { return static_cast<std::uint64_t>(uniform() * bound); }
  std::uint8_t byte() { return static_cast<std::uint8_t>(engine_() >> 56); }

 private:
  std::mt19937_64 engine_;
};

struct ChannelModel {
  enum class Kind { iid, burst };

  Kind kind = Kind::iid;
  double p_loss = 0.0;
  // Two-state (Gilbert) channel: good -> bad with p_enter_bad, bad -> good with p_exit_bad;
  // packets are lost with loss_in_bad while bad and never while good.
  double p_enter_bad = 0.0;
  double p_exit_bad = 1.0;
  double loss_in_bad = 1.0;
  std::uint64_t seed = 0;

  static ChannelModel iid(double p_loss, std::uint64_t seed) {
    ChannelModel c;
    c.p_loss = p_loss;
    c.seed = seed;
    c.validate();
    return c;
  }

  static ChannelModel burst(double p_enter_bad, double p_exit_bad, double loss_in_bad,
                            std::uint64_t seed) {
    ChannelModel c;
    c.kind = Kind::burst;
    c.p_enter_bad = p_enter_bad;
    c.p_exit_bad = p_exit_bad;
    c.loss_in_bad = loss_in_bad;
    c.seed = seed;
    c.validate();
    return c;
  }

  void validate() const {
    for (double p : {p_loss, p_enter_bad, p_exit_bad, loss_in_bad}) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::invalid_input, "probability outside [0, 1]");
    }
  }
};

struct AttackModel {
  enum class Mode { flip_random_bit, replace_payload, replace_signature };

  double pollution_rate = 0.0;
  Mode mode = Mode::flip_random_bit;

  void validate() const {
    if (!(pollution_rate >= 0.0 && pollution_rate <= 1.0)) {
      throw Error(Errc::invalid_input, "pollution rate outside [0, 1]");
    }
  }
};

struct DeliveryReport {
  std::size_t sent = 0;
  std::size_t delivered = 0;
  std::size_t lost = 0;
  std::size_t polluted = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t false_accepts = 0;  // polluted yet accepted
  std::size_t false_rejects = 0;  // unmodified yet rejected

  bool operator==(const DeliveryReport&) const = default;
};

/// What reached the receiver. The pollution flags are simulator ground truth used for scoring
/// only; the verifier is handed nothing but `packets[i]`.
struct Transmission {
  std::vector<Bytes> packets;
  std::vector<bool> polluted;
  DeliveryReport report;
};

namespace detail {

inline void pollute(Bytes& wire, AttackModel::Mode mode, SimRng& rng) {
  const Bytes original = wire;
  switch (mode) {
    case AttackModel::Mode::flip_random_bit: {
      const std::uint64_t bit = rng.below(wire.size() * 8);
      wire[bit / 8] ^= static_cast<std::uint8_t>(0x80U >> (bit % 8));
      return;
    }
    case AttackModel::Mode::replace_payload:
    case AttackModel::Mode::replace_signature: {
      // Offsets come from the frame; an unparseable frame gets a bit flip instead.
      ByteReader in(wire);
      AuthenticatedPacket pkt;
      try {
        pkt = decode_fields(in);
      } catch (const Error&) {
        pollute(wire, AttackModel::Mode::flip_random_bit, rng);
        return;
      }
      std::size_t first = kPayloadOffset;
      std::size_t len = pkt.payload.size();
      if (mode == AttackModel::Mode::replace_signature) {
        first = wire.size() - pkt.signature.size();
        len = pkt.signature.size();
      }
      for (std::size_t i = 0; i < len; ++i) wire[first + i] = rng.byte();
      if (wire == original) wire[first] ^= 0x01;
      return;
    }
  }
}

}  // namespace detail

/// Passes serialized packets through a lossy channel and an optional polluting adversary.
/// Pure function of (packets, channel, attack); the RNG is seeded from channel.seed.
inline Transmission transmit(const std::vector<Bytes>& packets, const ChannelModel& channel,
                             const AttackModel& attack) {
  channel.validate();
  attack.validate();
  SimRng rng(channel.seed);
  Transmission out;
  out.report.sent = packets.size();
  bool bad_state = false;
  for (const Bytes& wire : packets) {
    bool lost = false;
    if (channel.kind == ChannelModel::Kind::iid) {
      lost = rng.bernoulli(channel.p_loss);
    } else {
      bad_state = bad_state ? !rng.bernoulli(channel.p_exit_bad) : rng.bernoulli(channel.p_enter_bad);
      lost = bad_state && rng.bernoulli(channel.loss_in_bad);
    }
    if (lost) {
      ++out.report.lost;
      continue;
    }
    Bytes copy = wire;
    const bool polluted = !copy.empty() && rng.bernoulli(attack.pollution_rate);
    if (polluted) {
      detail::pollute(copy, attack.mode, rng);
      ++out.report.polluted;
    }
    out.packets.push_back(std::move(copy));
    out.polluted.push_back(polluted);
  }
  out.report.delivered = out.packets.size();
  return out;
}

/// Verifies each delivered packet on its own and scores the verdicts against ground truth.
inline DeliveryReport receiver_verify_all(const Transmission& tx, const DigestSpec& dspec,
                                          const SignatureSpec& sspec) {
  DeliveryReport report = tx.report;
  report.accepted = report.rejected = report.false_accepts = report.false_rejects = 0;
  for (std::size_t i = 0; i < tx.packets.size(); ++i) {
    const bool accepted = verify_bytes(tx.packets[i], dspec, sspec) == Verdict::accept;
    if (accepted) {
      ++report.accepted;
      if (tx.polluted[i]) ++report.false_accepts;
    } else {
      ++report.rejected;
      if (!tx.polluted[i]) ++report.false_rejects;
    }
  }
  return report;
}

namespace detail {

inline std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline constexpr std::string_view kDeliveryCsvHeader =
    "seed,channel_kind,p_params,pollution_rate,sent,delivered,lost,polluted,accepted,rejected,"
    "false_accepts,false_rejects";

inline std::string format_delivery_csv(const DeliveryReport& r, const ChannelModel& channel,
                                       const AttackModel& attack) {
  std::string out = "# generator: " + std::string(kGeneratorId) + "\n";
  out += kDeliveryCsvHeader;
  out += '\n';
  out += std::to_string(channel.seed) + ',';
  if (channel.kind == ChannelModel::Kind::iid) {
    out += "iid,p_loss=" + detail::shortest(channel.p_loss);
  } else {
    out += "burst,p_enter_bad=" + detail::shortest(channel.p_enter_bad) +
           ";p_exit_bad=" + detail::shortest(channel.p_exit_bad) +
           ";loss_in_bad=" + detail::shortest(channel.loss_in_bad);
  }
  out += ',' + detail::shortest(attack.pollution_rate);
  for (std::size_t v : {r.sent, r.delivered, r.lost, r.polluted, r.accepted, r.rejected,
                        r.false_accepts, r.false_rejects}) {
    out += ',' + std::to_string(v);
  }
  out += '\n';
  return out;
}

}  // namespace wlauth
