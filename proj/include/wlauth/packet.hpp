#pragma once

#include <cstdint>
#include <vector>

#include "wlauth/bytes.hpp"
#include "wlauth/digest.hpp"
#include "wlauth/signature.hpp"
#include "wlauth/tree.hpp"

namespace wlauth {

// Wire format, big-endian throughout:
//
//   magic u32 | version u8 | flags u8 | digest_len_bits u16 | block_id u64 | packet_index u32 |
//   n u32 | payload_len_bytes u32 | payload | path_len u8 | siblings | sig_scheme_id u8 |
//   sig_len_bytes u16 | signature
//
// flags bit 0 marks a keyed digest; other bits must be zero.
inline constexpr std::uint32_t kPacketMagic = 0x574C4D41;  // "WLMA"
inline constexpr std::uint8_t kPacketVersion = 0x01;
inline constexpr std::uint8_t kFlagKeyed = 0x01;
inline constexpr std::size_t kPacketHeaderBytes = 32;
inline constexpr std::size_t kPayloadOffset = 28;

/// A self-contained authenticated packet: verifiable with nothing but its own fields and the keys.
struct AuthenticatedPacket {
  std::uint64_t block_id = 0;
  std::uint32_t leaf_count = 0;
  std::uint16_t digest_len_bits = 0;
  bool keyed = false;
  Bytes payload;
  AuthPath path;
  std::uint8_t sig_scheme_id = 0;
  Bytes signature;
  // Not transmitted; stamped from the producing (or decoding) DigestSpec.
  Fingerprint digest_fingerprint{};

  std::uint32_t packet_index() const noexcept { return path.packet_index; }

  bool operator==(const AuthenticatedPacket&) const = default;
};

/// Authentication bits added to each packet (sibling path plus signature), header excluded.
inline std::uint64_t auth_overhead_bits(std::uint64_t leaf_count, unsigned digest_len_bits,
                                        unsigned sig_len_bits) {
  return std::uint64_t{log2_floor(leaf_count)} * digest_len_bits + sig_len_bits;
}

inline std::size_t wire_size(const AuthenticatedPacket& pkt) {
  std::size_t sibs = 0;
  for (const auto& s : pkt.path.siblings) sibs += s.size();
  return kPacketHeaderBytes + pkt.payload.size() + sibs + pkt.signature.size();
}

inline AuthenticatedPacket make_auth_packet(const AuthTree& tree, std::size_t index) {
  if (!tree.is_signed()) throw Error(Errc::tree_not_signed, "tree root has no signature");
  AuthenticatedPacket pkt;
  pkt.block_id = tree.block_id();
  pkt.leaf_count = static_cast<std::uint32_t>(tree.leaf_count());
  pkt.digest_len_bits = static_cast<std::uint16_t>(tree.digest_spec().out_len_bits());
  pkt.keyed = tree.digest_spec().is_keyed();
  ByteView payload = tree.packet(index).payload();
  pkt.payload.assign(payload.begin(), payload.end());
  pkt.path = auth_path(tree, index);
  pkt.sig_scheme_id = tree.signature_scheme_id();
  pkt.signature = *tree.root_signature();
  pkt.digest_fingerprint = tree.digest_fingerprint();
  return pkt;
}

inline void serialize_into(Bytes& out, const AuthenticatedPacket& pkt) {
  if (pkt.path.siblings.size() > 0xFF || pkt.signature.size() > 0xFFFF ||
      pkt.payload.size() > 0xFFFFFFFFu) {
    throw Error(Errc::invalid_input, "packet field exceeds its wire width");
  }
  out.reserve(out.size() + wire_size(pkt));
  put_u32(out, kPacketMagic);
  put_u8(out, kPacketVersion);
  put_u8(out, pkt.keyed ? kFlagKeyed : 0);
  put_u16(out, pkt.digest_len_bits);
  put_u64(out, pkt.block_id);
  put_u32(out, pkt.path.packet_index);
  put_u32(out, pkt.leaf_count);
  put_u32(out, static_cast<std::uint32_t>(pkt.payload.size()));
  put_bytes(out, pkt.payload);
  put_u8(out, static_cast<std::uint8_t>(pkt.path.siblings.size()));
  for (const auto& s : pkt.path.siblings) {
    if (s.size() * 8 != pkt.digest_len_bits) {
      throw Error(Errc::invalid_input, "sibling length disagrees with digest_len_bits");
    }
    put_bytes(out, s);
  }
  put_u8(out, pkt.sig_scheme_id);
  put_u16(out, static_cast<std::uint16_t>(pkt.signature.size()));
  put_bytes(out, pkt.signature);
}

inline Bytes serialize(const AuthenticatedPacket& pkt) {
  Bytes out;
  serialize_into(out, pkt);
  return out;
}

namespace detail {

// Structural decode only; no digest spec is consulted and the fingerprint is left zero.
inline AuthenticatedPacket decode_fields(ByteReader& in) {
  const std::size_t start = in.absolute_position();
  if (in.u32() != kPacketMagic) throw ParseError(start, "bad packet magic");
  if (in.u8() != kPacketVersion) throw ParseError(start + 4, "unsupported packet version");
  const std::uint8_t flags = in.u8();
  if ((flags & ~kFlagKeyed) != 0) throw ParseError(start + 5, "reserved flag bits set");

  AuthenticatedPacket pkt;
  pkt.keyed = (flags & kFlagKeyed) != 0;
  pkt.digest_len_bits = in.u16();
  if (pkt.digest_len_bits == 0 || pkt.digest_len_bits % 8 != 0 || pkt.digest_len_bits > 256) {
    throw ParseError(start + 6, "invalid digest length");
  }
  pkt.block_id = in.u64();
  pkt.path.packet_index = in.u32();
  pkt.leaf_count = in.u32();
  const std::uint32_t payload_len = in.u32();
  if (payload_len == 0) throw ParseError(in.absolute_position() - 4, "empty payload");
  ByteView payload = in.take(payload_len);
  pkt.payload.assign(payload.begin(), payload.end());

  const std::uint8_t path_len = in.u8();
  const std::size_t digest_bytes = pkt.digest_len_bits / 8;
  pkt.path.siblings.reserve(path_len);
  for (unsigned i = 0; i < path_len; ++i) {
    ByteView s = in.take(digest_bytes);
    pkt.path.siblings.emplace_back(s.begin(), s.end());
  }
  pkt.sig_scheme_id = in.u8();
  const std::uint16_t sig_len = in.u16();
  ByteView sig = in.take(sig_len);
  pkt.signature.assign(sig.begin(), sig.end());
  return pkt;
}

inline void bind_to_spec(AuthenticatedPacket& pkt, const DigestSpec& spec) {
  if (pkt.digest_len_bits != spec.out_len_bits() || pkt.keyed != spec.is_keyed()) {
    throw Error(Errc::spec_mismatch, "packet digest parameters differ from the receiver's spec");
  }
  pkt.digest_fingerprint = fingerprint(spec);
}

}  // namespace detail

/// Decodes exactly one packet occupying all of `data`.
inline AuthenticatedPacket deserialize(ByteView data, const DigestSpec& spec) {
  ByteReader in(data);
  AuthenticatedPacket pkt = detail::decode_fields(in);
  if (in.remaining() != 0) throw ParseError(in.absolute_position(), "trailing bytes after packet");
  detail::bind_to_spec(pkt, spec);
  return pkt;
}

/// Splits a concatenation of wire packets into per-packet byte ranges.
inline std::vector<ByteView> frame_archive(ByteView archive) {
  std::vector<ByteView> frames;
  std::size_t offset = 0;
  while (offset < archive.size()) {
    ByteReader in(archive.subspan(offset), offset);
    detail::decode_fields(in);
    frames.push_back(archive.subspan(offset, in.position()));
    offset += in.position();
  }
  return frames;
}

struct ArchiveEntry {
  std::size_t offset = 0;
  AuthenticatedPacket packet;
};

/// Decodes every packet of an archive; failures carry the absolute byte offset.
inline std::vector<ArchiveEntry> read_archive(ByteView archive, const DigestSpec& spec) {
  std::vector<ArchiveEntry> entries;
  std::size_t offset = 0;
  while (offset < archive.size()) {
    ByteReader in(archive.subspan(offset), offset);
    ArchiveEntry entry{offset, detail::decode_fields(in)};
    try {
      detail::bind_to_spec(entry.packet, spec);
    } catch (const Error& e) {
      throw ParseError(offset, e.what());
    }
    offset += in.position();
    entries.push_back(std::move(entry));
  }
  return entries;
}

enum class Verdict {
  accept,
  reject_bad_signature,
  reject_bad_path,
  // Bytes that do not decode as a packet under the receiver's spec.
  reject_malformed,
};

inline const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::accept: return "Accept";
    case Verdict::reject_bad_signature: return "RejectBadSignature";
    case Verdict::reject_bad_path: return "RejectBadPath";
    case Verdict::reject_malformed: return "RejectMalformed";
  }
  return "Unknown";
}

/// Verifies one packet in isolation.
///
/// Structural path faults give RejectBadPath. Otherwise the root is recomputed from the payload
/// and siblings and the block signature is checked over it; any tampering with payload, siblings,
/// header fields covered by the signature, or the signature itself gives RejectBadSignature.
inline Verdict verify_packet(const AuthenticatedPacket& pkt, const DigestSpec& dspec,
                             const SignatureSpec& sspec) {
  if (pkt.digest_fingerprint != fingerprint(dspec) || pkt.digest_len_bits != dspec.out_len_bits() ||
      pkt.keyed != dspec.is_keyed()) {
    throw Error(Errc::spec_mismatch, "packet fingerprint does not match the digest spec");
  }
  if (pkt.sig_scheme_id != sspec.scheme_id()) {
    throw Error(Errc::spec_mismatch, "packet signature scheme does not match the signature spec");
  }
  if (sspec.scheme() != SignatureScheme::test) {
    throw Error(Errc::unsupported_scheme, "scheme '" + sspec.name() + "' is modeled only");
  }

  if (!is_power_of_two(pkt.leaf_count) || pkt.packet_index() >= pkt.leaf_count ||
      pkt.path.siblings.size() != log2_floor(pkt.leaf_count) || pkt.payload.empty()) {
    return Verdict::reject_bad_path;
  }
  for (const auto& s : pkt.path.siblings) {
    if (s.size() != dspec.out_len_bytes()) return Verdict::reject_bad_path;
  }

  const Bytes root = fold_path(leaf_digest(pkt.payload, dspec), pkt.packet_index(), pkt.path, dspec);
  const Bytes msg = root_message(pkt.block_id, pkt.leaf_count, root);
  return check_signature(msg, pkt.signature, sspec) ? Verdict::accept
                                                    : Verdict::reject_bad_signature;
}

/// Receiver entry point over raw bytes: undecodable or mismatched packets are rejected, never thrown.
inline Verdict verify_bytes(ByteView data, const DigestSpec& dspec, const SignatureSpec& sspec) {
  AuthenticatedPacket pkt;
  try {
    pkt = deserialize(data, dspec);
  } catch (const Error&) {
    return Verdict::reject_malformed;
  }
  if (pkt.sig_scheme_id != sspec.scheme_id()) return Verdict::reject_malformed;
  return verify_packet(pkt, dspec, sspec);
}

}  // namespace wlauth
