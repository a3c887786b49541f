#include "hempsim/stochastic/distributions.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace hempsim::stochastic {

void check_spec(const DistributionSpec& spec) {
  std::visit(
      [](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Uniform>) {
          if (!(d.lo <= d.hi)) throw InvalidSpec("uniform: lo > hi");
        } else if constexpr (std::is_same_v<D, Exponential>) {
          if (!(d.mean > 0.0)) throw InvalidSpec("exponential: mean must be positive");
        } else {
          if (!(d.var >= 0.0)) throw InvalidSpec("truncated normal: negative variance");
          if (!(d.lower <= d.upper)) throw InvalidSpec("truncated normal: lower > upper");
          if (d.var == 0.0 && (d.mean < d.lower || d.mean > d.upper))
            throw InvalidSpec("truncated normal: degenerate mean outside the support");
        }
      },
      spec);
}

double standard_normal(RngStream& stream) {
  const double u1 = stream.next_uniform();
  const double u2 = stream.next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample(const DistributionSpec& spec, RngStream& stream) {
  check_spec(spec);
  return std::visit(
      [&stream](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Uniform>) {
          const double u = stream.next_uniform();
          return d.lo == d.hi ? d.lo : d.lo + (d.hi - d.lo) * u;
        } else if constexpr (std::is_same_v<D, Exponential>) {
          return -d.mean * std::log(stream.next_uniform());
        } else {
          if (d.var == 0.0) return d.mean;
          const double sd = std::sqrt(d.var);
          for (int i = 0; i < kMaxRejections; ++i) {
            const double x = d.mean + sd * standard_normal(stream);
            if (x >= d.lower && x <= d.upper) return x;
          }
          throw InvalidSpec("truncated normal: rejection cap reached (support has negligible mass)");
        }
      },
      spec);
}

double growth_noise_variance(double g, double t, double lambda_var) { return g * t * lambda_var * lambda_var; }

namespace {

void check_growth(double g, double t, double lambda_var) {
  if (g < 0.0 || t < 0.0 || lambda_var < 0.0)
    throw InvalidSpec("growth noise: g, t and lambda must be non-negative");
}

}  // namespace

double sample_growth_noise(double g, double t, double lambda_var, RngStream& stream) {
  check_growth(g, t, lambda_var);
  const double var = growth_noise_variance(g, t, lambda_var);
  if (var == 0.0) return 0.0;
  return sample(TruncatedNormal{0.0, var, -g * t}, stream);
}

double growth_noise_quantile(double g, double t, double lambda_var, double u) {
  check_growth(g, t, lambda_var);
  if (!(u > 0.0 && u < 1.0)) throw InvalidSpec("growth noise quantile: u outside (0, 1)");
  const double var = growth_noise_variance(g, t, lambda_var);
  if (var == 0.0) return 0.0;
  const double sd = std::sqrt(var);
  const boost::math::normal_distribution<double> std_normal;
  const double lower_mass = boost::math::cdf(std_normal, -g * t / sd);
  const double p = lower_mass + u * (1.0 - lower_mass);
  return std::max(sd * boost::math::quantile(std_normal, p), -g * t);
}

}  // namespace hempsim::stochastic
