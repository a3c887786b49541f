#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hempsim::ledger {

using Hash256 = std::array<std::uint8_t, 32>;

Hash256 sha256(std::span<const std::uint8_t> bytes);
Hash256 sha256(std::string_view text);

std::string to_hex(const Hash256& h);
Hash256 hash_from_hex(std::string_view hex);

inline constexpr Hash256 kZeroHash{};

/// Canonical byte encoding: fields must be written in strictly ascending
/// name order; every name and value is length-prefixed (u32, big endian).
class CanonicalWriter {
 public:
  CanonicalWriter& field(std::string_view name, std::string_view value);
  CanonicalWriter& field(std::string_view name, std::uint64_t value);
  CanonicalWriter& field(std::string_view name, std::int64_t value);
  CanonicalWriter& field(std::string_view name, double value);
  CanonicalWriter& field(std::string_view name, const Hash256& value);
  /// Nested canonical encoding, e.g. a sorted map or a list.
  CanonicalWriter& field(std::string_view name, const CanonicalWriter& nested);

  [[nodiscard]] const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  [[nodiscard]] Hash256 digest() const { return sha256(bytes_); }

 private:
  void name(std::string_view n, char tag);
  void blob(std::span<const std::uint8_t> b);

  std::vector<std::uint8_t> bytes_;
  std::string last_name_;
  bool any_ = false;
};

}  // namespace hempsim::ledger
