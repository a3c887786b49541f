#include "hempsim/ledger/hash.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace hempsim::ledger {

Hash256 sha256(std::span<const std::uint8_t> bytes) {
  Hash256 out{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size())
    throw std::runtime_error("sha256: digest failed");
  return out;
}

Hash256 sha256(std::string_view text) {
  return sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string to_hex(const Hash256& h) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(64, '0');
  for (std::size_t i = 0; i < h.size(); ++i) {
    s[2 * i] = digits[h[i] >> 4];
    s[2 * i + 1] = digits[h[i] & 0xF];
  }
  return s;
}

Hash256 hash_from_hex(std::string_view hex) {
  if (hex.size() != 64) throw std::invalid_argument("hash hex must be 64 characters");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("invalid hex digit");
  };
  Hash256 out{};
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return out;
}

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) b.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) b.push_back(static_cast<std::uint8_t>(v >> shift));
}

}  // namespace

void CanonicalWriter::name(std::string_view n, char tag) {
  if (any_ && !(last_name_ < n))
    throw std::logic_error("canonical encoding: field '" + std::string(n) + "' out of order");
  any_ = true;
  last_name_.assign(n);
  put_u32(bytes_, static_cast<std::uint32_t>(n.size()));
  bytes_.insert(bytes_.end(), n.begin(), n.end());
  bytes_.push_back(static_cast<std::uint8_t>(tag));
}

void CanonicalWriter::blob(std::span<const std::uint8_t> b) {
  put_u32(bytes_, static_cast<std::uint32_t>(b.size()));
  bytes_.insert(bytes_.end(), b.begin(), b.end());
}

CanonicalWriter& CanonicalWriter::field(std::string_view n, std::string_view value) {
  name(n, 's');
  blob(std::span(reinterpret_cast<const std::uint8_t*>(value.data()), value.size()));
  return *this;
}

CanonicalWriter& CanonicalWriter::field(std::string_view n, std::uint64_t value) {
  name(n, 'u');
  put_u32(bytes_, 8);
  put_u64(bytes_, value);
  return *this;
}

CanonicalWriter& CanonicalWriter::field(std::string_view n, std::int64_t value) {
  name(n, 'i');
  put_u32(bytes_, 8);
  put_u64(bytes_, static_cast<std::uint64_t>(value));
  return *this;
}

CanonicalWriter& CanonicalWriter::field(std::string_view n, double value) {
  name(n, 'd');
  put_u32(bytes_, 8);
  put_u64(bytes_, std::bit_cast<std::uint64_t>(value));
  return *this;
}

CanonicalWriter& CanonicalWriter::field(std::string_view n, const Hash256& value) {
  name(n, 'h');
  blob(value);
  return *this;
}

CanonicalWriter& CanonicalWriter::field(std::string_view n, const CanonicalWriter& nested) {
  name(n, 'n');
  blob(nested.bytes());
  return *this;
}

}  // namespace hempsim::ledger
