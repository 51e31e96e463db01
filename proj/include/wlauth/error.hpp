#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace wlauth {

enum class Errc {
  invalid_input,
  invalid_block_size,
  index_out_of_range,
  unsupported_scheme,
  tree_not_signed,
  spec_mismatch,
  invalid_split,
  partial_block_unsupported,
  invalid_timing,
  config_error,
  parse_error,
};

inline const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_input: return "InvalidInput";
    case Errc::invalid_block_size: return "InvalidBlockSize";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::unsupported_scheme: return "UnsupportedScheme";
    case Errc::tree_not_signed: return "TreeNotSigned";
    case Errc::spec_mismatch: return "SpecMismatch";
    case Errc::invalid_split: return "InvalidSplit";
    case Errc::partial_block_unsupported: return "PartialBlockUnsupported";
    case Errc::invalid_timing: return "InvalidTiming";
    case Errc::config_error: return "ConfigError";
    case Errc::parse_error: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Decode failure at a known byte offset of the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error(Errc::parse_error, what + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Configuration rejected; key() names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(Errc::config_error, "key '" + key + "': " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace wlauth
