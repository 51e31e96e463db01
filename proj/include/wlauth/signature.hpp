#pragma once

#include <cstdint>
#include <string>

#include "wlauth/bytes.hpp"
#include "wlauth/sha256.hpp"

namespace wlauth {

enum class SignatureScheme : std::uint8_t {
  // Deterministic symmetric stand-in: keyed hash stretched to the configured length.
  test = 0x00,
  // Length/throughput only (e.g. NTRU, ECC); cannot produce or check real bytes.
  modeled = 0x01,
};

class SignatureSpec {
 public:
  static SignatureSpec test(unsigned sig_len_bits, Bytes key) {
    return SignatureSpec(SignatureScheme::test, "test", sig_len_bits, std::move(key));
  }
  static SignatureSpec modeled(std::string name, unsigned sig_len_bits) {
    return SignatureSpec(SignatureScheme::modeled, std::move(name), sig_len_bits, {});
  }

  SignatureScheme scheme() const noexcept { return scheme_; }
  std::uint8_t scheme_id() const noexcept { return static_cast<std::uint8_t>(scheme_); }
  const std::string& name() const noexcept { return name_; }
  unsigned sig_len_bits() const noexcept { return sig_len_bits_; }
  std::size_t sig_len_bytes() const noexcept { return sig_len_bits_ / 8; }
  const Bytes& key() const noexcept { return key_; }

 private:
  SignatureSpec(SignatureScheme scheme, std::string name, unsigned sig_len_bits, Bytes key)
      : scheme_(scheme), name_(std::move(name)), sig_len_bits_(sig_len_bits), key_(std::move(key)) {
    if (sig_len_bits_ == 0 || sig_len_bits_ % 8 != 0 || sig_len_bits_ / 8 > 0xFFFF) {
      throw Error(Errc::invalid_input,
                  "signature length must be a positive multiple of 8, got " +
                      std::to_string(sig_len_bits_));
    }
  }

  SignatureScheme scheme_;
  std::string name_;
  unsigned sig_len_bits_;
  Bytes key_;
};

inline constexpr std::uint8_t kSignatureDomain = 0x02;

/// Signs an arbitrary message. Only the TEST scheme can sign.
///
/// Output block i is SHA-256(key || 0x02 || u32be(i) || message); blocks are concatenated and
/// truncated to sig_len_bits.
inline Bytes sign_message(ByteView message, const SignatureSpec& spec) {
  if (spec.scheme() != SignatureScheme::test) {
    throw Error(Errc::unsupported_scheme, "scheme '" + spec.name() + "' is modeled only");
  }
  Bytes out;
  out.reserve(spec.sig_len_bytes() + 32);
  for (std::uint32_t counter = 0; out.size() < spec.sig_len_bytes(); ++counter) {
    Bytes ctr;
    put_u32(ctr, counter);
    Sha256 h;
    h.update(spec.key()).update(kSignatureDomain).update(ctr).update(message);
    auto block = h.finish();
    out.insert(out.end(), block.begin(), block.end());
  }
  out.resize(spec.sig_len_bytes());
  return out;
}

inline bool check_signature(ByteView message, ByteView signature, const SignatureSpec& spec) {
  if (signature.size() != spec.sig_len_bytes()) return false;
  return secure_equal(sign_message(message, spec), signature);
}

}  // namespace wlauth
