#pragma once

#include <array>
#include <cstdint>
#include <memory>

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include "wlauth/bytes.hpp"

namespace wlauth {

using Sha256Digest = std::array<std::uint8_t, 32>;

namespace detail {

inline const EVP_MD* sha256_md() {
  // Fetched once; the implicit fetch behind EVP_sha256() costs more than hashing a 64-bit node.
  static const struct Holder {
    EVP_MD* md = EVP_MD_fetch(nullptr, "SHA256", nullptr);
    ~Holder() { EVP_MD_free(md); }
  } holder;
  return holder.md;
}

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const noexcept { EVP_MD_CTX_free(ctx); }
};

}  // namespace detail

/// Incremental SHA-256 over libcrypto.
class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), detail::sha256_md(), nullptr) != 1) {
      throw std::runtime_error("SHA-256 initialisation failed");
    }
  }

  Sha256& update(ByteView data) {
    if (!data.empty()) EVP_DigestUpdate(ctx_.get(), data.data(), data.size());
    return *this;
  }

  Sha256& update(std::uint8_t byte) {
    EVP_DigestUpdate(ctx_.get(), &byte, 1);
    return *this;
  }

  Sha256Digest finish() {
    Sha256Digest out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), out.data(), &len);
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, detail::MdCtxDeleter> ctx_;
};

/// Constant-time equality for authenticator comparison.
inline bool secure_equal(ByteView a, ByteView b) noexcept {
  return a.size() == b.size() && (a.empty() || CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0);
}

}  // namespace wlauth
