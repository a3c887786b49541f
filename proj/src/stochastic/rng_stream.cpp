#include "hempsim/stochastic/rng_stream.hpp"

namespace hempsim::stochastic {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view label)
    : seed_(master_seed), label_(label), key_(mix64(mix64(master_seed) ^ mix64(hash_label(label) + kGolden))) {}

RngStream RngStream::child(std::string_view suffix) const {
  std::string l = label_;
  l += '/';
  l += suffix;
  return RngStream(seed_, l);
}

std::uint64_t RngStream::next_u64() {
  // Two finalizer rounds keyed on both sides so streams are not shifted
  // copies of one Weyl sequence.
  const std::uint64_t c = ++counter_;
  return mix64(mix64(key_ + c * kGolden) ^ key_);
}

double RngStream::next_uniform() {
  // 53 random bits, offset by half an ulp: never exactly 0 or 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace hempsim::stochastic
