#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "wlauth/bytes.hpp"
#include "wlauth/sha256.hpp"

namespace wlauth {

using Fingerprint = std::array<std::uint8_t, 4>;

// Domain separators keep leaf and interior inputs from colliding.
inline constexpr std::uint8_t kLeafDomain = 0x00;
inline constexpr std::uint8_t kNodeDomain = 0x01;

/// Parameters of the short digest used for tree nodes.
///
/// A digest is the first out_len_bits of SHA-256(key || domain || data). With an empty key the
/// construction is an ordinary truncated hash that any receiver can recompute.
class DigestSpec {
 public:
  static DigestSpec unkeyed(unsigned out_len_bits) { return DigestSpec(out_len_bits, {}, false); }
  static DigestSpec keyed(unsigned out_len_bits, Bytes key) {
    return DigestSpec(out_len_bits, std::move(key), true);
  }

  DigestSpec(unsigned out_len_bits, Bytes key, bool keyed)
      : out_len_bits_(out_len_bits), key_(std::move(key)), keyed_(keyed) {
    if (out_len_bits_ % 8 != 0 || out_len_bits_ < 8 || out_len_bits_ > 256) {
      throw Error(Errc::invalid_input,
                  "digest length must be a multiple of 8 in [8, 256], got " +
                      std::to_string(out_len_bits_));
    }
    if (!keyed_ && !key_.empty()) throw Error(Errc::invalid_input, "unkeyed digest with a key");
  }

  unsigned out_len_bits() const noexcept { return out_len_bits_; }
  std::size_t out_len_bytes() const noexcept { return out_len_bits_ / 8; }
  const Bytes& key() const noexcept { return key_; }
  bool is_keyed() const noexcept { return keyed_; }

  bool operator==(const DigestSpec&) const = default;

 private:
  unsigned out_len_bits_;
  Bytes key_;
  bool keyed_;
};

namespace detail {

inline Bytes truncate(const Sha256Digest& full, std::size_t len) {
  return Bytes(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(len));
}

}  // namespace detail

inline Bytes leaf_digest(ByteView payload, const DigestSpec& spec) {
  if (payload.empty()) throw Error(Errc::invalid_input, "empty payload");
  Sha256 h;
  h.update(spec.key()).update(kLeafDomain).update(payload);
  return detail::truncate(h.finish(), spec.out_len_bytes());
}

/// Parent digest; order matters, node_digest(a, b) != node_digest(b, a) in general.
inline Bytes node_digest(ByteView left, ByteView right, const DigestSpec& spec) {
  if (left.size() != spec.out_len_bytes() || right.size() != spec.out_len_bytes()) {
    throw Error(Errc::invalid_input, "child digest length does not match the digest spec");
  }
  Sha256 h;
  h.update(spec.key()).update(kNodeDomain).update(left).update(right);
  return detail::truncate(h.finish(), spec.out_len_bytes());
}

/// First four bytes of SHA-256(key || u16be(out_len_bits)).
inline Fingerprint fingerprint(const DigestSpec& spec) {
  Bytes tail;
  put_u16(tail, static_cast<std::uint16_t>(spec.out_len_bits()));
  Sha256 h;
  h.update(spec.key()).update(tail);
  auto full = h.finish();
  return {full[0], full[1], full[2], full[3]};
}

}  // namespace wlauth
