#pragma once

#include <limits>
#include <stdexcept>
#include <variant>

#include "hempsim/core/config.hpp"
#include "hempsim/stochastic/rng_stream.hpp"

namespace hempsim::stochastic {

class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

struct Exponential {
  double mean = 1.0;
};

/// N(mean, var) restricted to [lower, upper].
struct TruncatedNormal {
  double mean = 0.0;
  double var = 1.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

using DistributionSpec = std::variant<Uniform, Exponential, TruncatedNormal>;

inline DistributionSpec uniform(const UniformBounds& b) { return Uniform{b.lo, b.hi}; }

void check_spec(const DistributionSpec& spec);

/// Uniform and Exponential consume one counter step per call; a normal
/// attempt consumes two, and truncated draws retry until accepted.
double sample(const DistributionSpec& spec, RngStream& stream);

double standard_normal(RngStream& stream);

/// Rejection attempts before a truncated-normal draw gives up.
inline constexpr int kMaxRejections = 10000;

/// Pre-truncation variance of the growth noise: g * t * lambda^2.
double growth_noise_variance(double g, double t, double lambda_var);

/// Growth noise over a window of t days: N(0, g t lambda^2) truncated below
/// at -g t, so the accumulated cannabinoid g t + noise is never negative.
double sample_growth_noise(double g, double t, double lambda_var, RngStream& stream);

/// Inverse CDF of the same truncated law; `u` in (0, 1).
double growth_noise_quantile(double g, double t, double lambda_var, double u);

}  // namespace hempsim::stochastic
