#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hempsim/stochastic/rng_stream.hpp"

namespace hempsim::risk {

class TooFewSamples : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TooManyInputs : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> xs);

/// Subset of input indices as a bitmask; bit l set means input l is in J.
using InputIndexSet = std::uint32_t;

inline constexpr int kMaxInputs = 16;
inline constexpr int kMaxExactInputs = 8;

struct InputFactor {
  std::string label;
  std::function<double(stochastic::RngStream&)> sample;
};

/// Y as a function of independently distributed inputs.
struct OutputModel {
  std::vector<InputFactor> inputs;
  std::function<double(std::span<const double>)> response;

  [[nodiscard]] int size() const { return static_cast<int>(inputs.size()); }
};

struct CostSettings {
  int outer_K = 10;
  int inner_I = 100;
  std::uint64_t seed = 1;
  std::string label = "shapley";  // stream namespace of one macro-replication
};

/// Nested estimate of c(J) = E[Var[Y | Z_-J]]: K outer draws of the inputs
/// outside J, I inner draws of the inputs in J for each. Returns the K
/// per-outer-sample inner variances; their mean is the estimate.
std::vector<double> estimate_cost_terms(InputIndexSet J, const OutputModel& model, const CostSettings& cs);
double estimate_cost(InputIndexSet J, const OutputModel& model, const CostSettings& cs);

enum class EstimatorKind { Exact, PermutationSampled };

struct ShapleyResult {
  std::vector<std::string> labels;
  std::vector<double> s;         // contributions, variance units
  std::vector<double> s_stderr;  // batch means over outer samples (plus permutation noise when sampled)
  double total_variance = 0.0;   // c-hat of the full set, from the same samples
  std::vector<double> rc;        // s / total_variance; zeros when the variance is zero
  EstimatorKind kind = EstimatorKind::Exact;
  int permutations = 0;
  int subsets_evaluated = 0;

  [[nodiscard]] double sum_s() const;
  [[nodiscard]] double sum_rc() const;
};

/// Every one of the L! orderings; each subset cost is estimated once.
ShapleyResult shapley_exact(const OutputModel& model, const CostSettings& cs, int threads = 1);

/// m orderings drawn uniformly with replacement.
ShapleyResult shapley_sampled(const OutputModel& model, int m, const CostSettings& cs, int threads = 1);

struct RelativeContribution {
  std::string label;
  double mean = 0.0;
  double sd = 0.0;      // across macro-replications
  double std_error = 0.0;  // sd / sqrt(J)
};

struct RcSummary {
  std::vector<RelativeContribution> rows;
  double residual = 0.0;  // |sum of mean RC - 1|
  bool degenerate = false;  // every macro-replication had zero variance
};

/// Averages s / Var-hat over macro-replications.
RcSummary relative_contributions(const std::vector<ShapleyResult>& reps);

}  // namespace hempsim::risk
