#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "wlauth/bytes.hpp"
#include "wlauth/digest.hpp"
#include "wlauth/signature.hpp"

namespace wlauth {

/// One stream packet; the payload is the authenticated unit.
class Packet {
 public:
  explicit Packet(Bytes payload) : payload_(std::move(payload)) {}

  Packet(Bytes payload, std::uint64_t declared_len_bits) : payload_(std::move(payload)) {
    if (declared_len_bits == 0 || payload_.size() * 8 != declared_len_bits) {
      throw Error(Errc::invalid_input, "payload is " + std::to_string(payload_.size() * 8) +
                                           " bits, declared " + std::to_string(declared_len_bits));
    }
  }

  ByteView payload() const noexcept { return payload_; }
  std::uint64_t declared_len_bits() const noexcept { return payload_.size() * 8; }

  bool operator==(const Packet&) const = default;

 private:
  Bytes payload_;
};

/// Sibling digests from the leaf level upwards.
struct AuthPath {
  std::uint32_t packet_index = 0;
  std::vector<Bytes> siblings;

  bool operator==(const AuthPath&) const = default;
};

class TreeBuilder;

/// Complete binary digest tree over one block of n packets.
///
/// Level 0 holds the n leaf digests, level log2(n) the root. Digests are stored flat per level with
/// a stride of the digest length. The tree owns the block's packets so per-packet authenticators
/// can be emitted from it directly.
class AuthTree {
 public:
  std::uint64_t block_id() const noexcept { return block_id_; }
  std::size_t leaf_count() const noexcept { return packets_.size(); }
  unsigned height() const noexcept { return height_; }
  std::size_t level_count() const noexcept { return levels_.size(); }
  std::size_t level_size(std::size_t level) const noexcept { return leaf_count() >> level; }

  ByteView node(std::size_t level, std::size_t index) const {
    const std::size_t d = spec_.out_len_bytes();
    return ByteView(levels_.at(level)).subspan(index * d, d);
  }
  ByteView root() const { return node(height_, 0); }

  const DigestSpec& digest_spec() const noexcept { return spec_; }
  const Fingerprint& digest_fingerprint() const noexcept { return fingerprint_; }
  const Packet& packet(std::size_t index) const { return packets_.at(index); }

  const std::optional<Bytes>& root_signature() const noexcept { return signature_; }
  std::uint8_t signature_scheme_id() const noexcept { return sig_scheme_id_; }
  bool is_signed() const noexcept { return signature_.has_value(); }

  void attach_signature(const SignatureSpec& spec, Bytes signature) {
    if (signature.size() != spec.sig_len_bytes()) {
      throw Error(Errc::invalid_input, "signature length does not match its spec");
    }
    sig_scheme_id_ = spec.scheme_id();
    signature_ = std::move(signature);
  }

 private:
  friend class TreeBuilder;

  AuthTree(std::uint64_t block_id, std::vector<Packet> packets, DigestSpec spec,
           std::vector<Bytes> levels)
      : block_id_(block_id),
        packets_(std::move(packets)),
        spec_(std::move(spec)),
        fingerprint_(fingerprint(spec_)),
        levels_(std::move(levels)),
        height_(log2_floor(packets_.size())) {}

  std::uint64_t block_id_;
  std::vector<Packet> packets_;
  DigestSpec spec_;
  Fingerprint fingerprint_;
  std::vector<Bytes> levels_;
  unsigned height_;
  std::optional<Bytes> signature_;
  std::uint8_t sig_scheme_id_ = 0;
};

/// Fills a tree's levels piecewise. Disjoint ranges may be filled from different threads; a level
/// range may only be hashed once every child it reads is complete.
class TreeBuilder {
 public:
  TreeBuilder(std::uint64_t block_id, std::vector<Packet> packets, DigestSpec spec)
      : block_id_(block_id), packets_(std::move(packets)), spec_(std::move(spec)) {
    const std::size_t n = packets_.size();
    if (!is_power_of_two(n) || n > (std::uint64_t{1} << 31)) {
      throw Error(Errc::invalid_block_size,
                  "block size must be a power of two, got " + std::to_string(n));
    }
    const unsigned height = log2_floor(n);
    levels_.resize(height + 1);
    for (unsigned l = 0; l <= height; ++l) levels_[l].resize((n >> l) * spec_.out_len_bytes());
  }

  std::size_t leaf_count() const noexcept { return packets_.size(); }
  unsigned height() const noexcept { return static_cast<unsigned>(levels_.size() - 1); }

  void hash_leaves(std::size_t first, std::size_t last) {
    check_range(0, first, last);
    for (std::size_t i = first; i < last; ++i) store(0, i, leaf_digest(packets_[i].payload(), spec_));
  }

  /// Computes nodes [first, last) of `level` (>= 1) from their children on level - 1.
  void hash_nodes(std::size_t level, std::size_t first, std::size_t last) {
    if (level == 0 || level > height()) throw Error(Errc::invalid_input, "bad tree level");
    check_range(level, first, last);
    for (std::size_t i = first; i < last; ++i) {
      store(level, i, node_digest(load(level - 1, 2 * i), load(level - 1, 2 * i + 1), spec_));
    }
  }

  /// Builds the subtree spanning leaves [first, last) up to and including `top_level`.
  void hash_subtree(std::size_t first, std::size_t last, std::size_t top_level) {
    hash_leaves(first, last);
    for (std::size_t l = 1; l <= top_level; ++l) hash_nodes(l, first >> l, last >> l);
  }

  AuthTree finish() && {
    return AuthTree(block_id_, std::move(packets_), std::move(spec_), std::move(levels_));
  }

 private:
  void check_range(std::size_t level, std::size_t first, std::size_t last) const {
    if (first > last || last > (packets_.size() >> level)) {
      throw Error(Errc::index_out_of_range, "node range outside tree level");
    }
  }

  ByteView load(std::size_t level, std::size_t index) const {
    const std::size_t d = spec_.out_len_bytes();
    return ByteView(levels_[level]).subspan(index * d, d);
  }

  void store(std::size_t level, std::size_t index, const Bytes& digest) {
    std::copy(digest.begin(), digest.end(),
              levels_[level].begin() + static_cast<std::ptrdiff_t>(index * digest.size()));
  }

  std::uint64_t block_id_;
  std::vector<Packet> packets_;
  DigestSpec spec_;
  std::vector<Bytes> levels_;
};

inline AuthTree build_tree(std::uint64_t block_id, std::vector<Packet> packets,
                           const DigestSpec& spec) {
  TreeBuilder builder(block_id, std::move(packets), spec);
  builder.hash_subtree(0, builder.leaf_count(), builder.height());
  return std::move(builder).finish();
}

inline AuthPath auth_path(const AuthTree& tree, std::size_t index) {
  if (index >= tree.leaf_count()) {
    throw Error(Errc::index_out_of_range, "packet index " + std::to_string(index) +
                                              " outside block of " +
                                              std::to_string(tree.leaf_count()));
  }
  AuthPath path;
  path.packet_index = static_cast<std::uint32_t>(index);
  path.siblings.reserve(tree.height());
  for (unsigned level = 0; level < tree.height(); ++level) {
    ByteView sib = tree.node(level, (index >> level) ^ 1U);
    path.siblings.emplace_back(sib.begin(), sib.end());
  }
  return path;
}

/// Recomputes the root from a leaf digest and its sibling path. Bit l of `index` selects whether
/// the running digest is the left (0) or right (1) child at level l.
inline Bytes fold_path(ByteView leaf, std::size_t index, const AuthPath& path,
                       const DigestSpec& spec) {
  if (leaf.size() != spec.out_len_bytes()) throw Error(Errc::invalid_input, "leaf length mismatch");
  if (path.siblings.size() < 64 && (index >> path.siblings.size()) != 0) {
    throw Error(Errc::index_out_of_range, "index does not fit the path length");
  }
  Bytes acc(leaf.begin(), leaf.end());
  for (std::size_t level = 0; level < path.siblings.size(); ++level) {
    const Bytes& sib = path.siblings[level];
    acc = ((index >> level) & 1U) == 0 ? node_digest(acc, sib, spec) : node_digest(sib, acc, spec);
  }
  return acc;
}

/// Message covered by a block signature: u64be(block_id) || u32be(n) || root.
inline Bytes root_message(std::uint64_t block_id, std::uint32_t leaf_count, ByteView root) {
  Bytes msg;
  msg.reserve(12 + root.size());
  put_u64(msg, block_id);
  put_u32(msg, leaf_count);
  put_bytes(msg, root);
  return msg;
}

inline Bytes sign_root(const AuthTree& tree, const SignatureSpec& spec) {
  return sign_message(
      root_message(tree.block_id(), static_cast<std::uint32_t>(tree.leaf_count()), tree.root()),
      spec);
}

inline void sign_tree(AuthTree& tree, const SignatureSpec& spec) {
  tree.attach_signature(spec, sign_root(tree, spec));
}

}  // namespace wlauth
