#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hempsim::stochastic {

/// Counter-based random stream: the n-th draw is a pure function of
/// (master seed, label, n). Two streams with the same seed and label replay
/// the same sequence; distinct labels give independent sequences.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view label);

  /// Derived stream: same seed, label extended with "/" + suffix.
  [[nodiscard]] RngStream child(std::string_view suffix) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double next_uniform();

  [[nodiscard]] std::uint64_t counter() const { return counter_; }
  [[nodiscard]] std::uint64_t master_seed() const { return seed_; }
  [[nodiscard]] const std::string& label() const { return label_; }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// 64-bit finalizer (SplitMix64 / Stafford variant 13).
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over the label bytes.
std::uint64_t hash_label(std::string_view label);

}  // namespace hempsim::stochastic
