#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "hempsim/risk/lot_model.hpp"
#include "hempsim/risk/shapley.hpp"
#include "hempsim/stochastic/distributions.hpp"

using namespace hempsim;
using namespace hempsim::risk;

namespace {

InputFactor unit_normal(std::string label) {
  return {std::move(label), [](stochastic::RngStream& s) { return stochastic::standard_normal(s); }};
}

OutputModel linear(std::vector<double> coef) {
  OutputModel m;
  for (std::size_t i = 0; i < coef.size(); ++i) m.inputs.push_back(unit_normal("Z" + std::to_string(i + 1)));
  m.response = [coef](std::span<const double> z) {
    double y = 0;
    for (std::size_t i = 0; i < coef.size(); ++i) y += coef[i] * z[i];
    return y;
  };
  return m;
}

CostSettings settings(int K, int I, std::uint64_t seed = 1) {
  CostSettings cs;
  cs.outer_K = K;
  cs.inner_I = I;
  cs.seed = seed;
  return cs;
}

}  // namespace

TEST_CASE("sample variance") {
  const std::vector<double> a{1, 1, 1}, b{0, 2}, c{1, 2, 3, 4}, one{5};
  CHECK(sample_variance(a) == 0.0);
  CHECK(sample_variance(b) == 2.0);
  CHECK(sample_variance(c) == doctest::Approx(5.0 / 3.0));
  CHECK_THROWS_AS(sample_variance(one), TooFewSamples);
}

TEST_CASE("cost function") {
  const auto m = linear({1, 1});
  const auto cs = settings(200, 200);
  CHECK(estimate_cost(0, m, cs) == 0.0);
  CHECK(std::abs(estimate_cost(0b01, m, cs) - 1.0) < 0.1);
  CHECK(std::abs(estimate_cost(0b11, m, cs) - 2.0) < 0.2);
  CHECK(estimate_cost_terms(0b01, m, cs).size() == 200);
  CHECK_THROWS_AS(estimate_cost(0b01, m, settings(1, 1)), TooFewSamples);
  CHECK_THROWS_AS(estimate_cost(0b01, m, settings(0, 10)), TooFewSamples);
}

TEST_CASE("exact Shapley on an additive model") {
  const auto r = shapley_exact(linear({1, 1}), settings(200, 200));
  REQUIRE(r.s.size() == 2);
  CHECK(std::abs(r.s[0] - 1.0) < 0.1);
  CHECK(std::abs(r.s[1] - 1.0) < 0.1);
  CHECK(r.permutations == 2);
  CHECK(r.subsets_evaluated <= 4);
  CHECK(r.sum_s() == doctest::Approx(r.total_variance).epsilon(1e-12));
  CHECK(r.sum_rc() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant output decomposes to zero") {
  OutputModel m = linear({0, 0, 0});
  const auto r = shapley_exact(m, settings(20, 20));
  for (double s : r.s) CHECK(s == 0.0);
  for (double rc : r.rc) CHECK(rc == 0.0);
  CHECK(r.total_variance == 0.0);
}

TEST_CASE("input count limits") {
  CHECK_THROWS_AS(shapley_exact(linear(std::vector<double>(9, 1.0)), settings(2, 2)), TooManyInputs);
  CHECK_THROWS_AS(shapley_sampled(linear(std::vector<double>(17, 1.0)), 5, settings(2, 2)), TooManyInputs);
}

TEST_CASE("symmetry and dummy axioms within noise") {
  const auto r = shapley_exact(linear({1, 1, 0}), settings(200, 200, 7));
  CHECK(std::abs(r.s[0] - r.s[1]) < 3 * std::hypot(r.s_stderr[0], r.s_stderr[1]) + 1e-9);
  CHECK(std::abs(r.s[2]) < 3 * r.s_stderr[2] + 1e-9);
  CHECK(std::abs(r.s[0] - 1.0) < 3 * r.s_stderr[0] + 0.02);
}

TEST_CASE("sampled orderings agree with exact enumeration") {
  const auto m = linear({1, 2, 0.5});
  const auto cs = settings(100, 100, 3);
  const auto exact = shapley_exact(m, cs);
  const auto sampled = shapley_sampled(m, 60, cs);
  CHECK(sampled.permutations == 60);
  for (std::size_t i = 0; i < 3; ++i) {
    CAPTURE(i);
    CHECK(std::abs(sampled.s[i] - exact.s[i]) < 3 * std::hypot(sampled.s_stderr[i], exact.s_stderr[i]) + 1e-9);
  }
  // Both telescope to the same full-set cost.
  CHECK(sampled.total_variance == exact.total_variance);
}

TEST_CASE("estimates are independent of the worker count") {
  const auto m = linear({1, 1, 1, 1});
  const auto a = shapley_sampled(m, 50, settings(20, 20), 1);
  const auto b = shapley_sampled(m, 50, settings(20, 20), 4);
  CHECK(a.s == b.s);
  CHECK(a.s_stderr == b.s_stderr);
}

TEST_CASE("relative contributions across macro-replications") {
  ShapleyResult a, b;
  a.labels = b.labels = {"x", "y"};
  a.s = {0.6, 0.4};
  b.s = {0.8, 0.2};
  a.rc = a.s;
  b.rc = b.s;
  a.total_variance = b.total_variance = 1.0;
  const auto rc = relative_contributions({a, b});
  REQUIRE(rc.rows.size() == 2);
  CHECK(rc.rows[0].mean == doctest::Approx(0.7));
  CHECK(rc.rows[1].mean == doctest::Approx(0.3));
  CHECK(rc.residual == doctest::Approx(0.0).epsilon(1e-12));

  const auto same = relative_contributions({a, a, a});
  CHECK(same.rows[0].std_error == 0.0);
  CHECK_THROWS_AS(relative_contributions({a}), TooFewSamples);
}

TEST_CASE("lot models") {
  ScenarioConfig cfg;
  EmpiricalDistribution windows({3.0, 5.0, 9.0, 14.0});
  const auto cbd = make_lot_model(cfg, Target::CBD, windows);
  const auto thc = make_lot_model(cfg, Target::THC, windows);
  REQUIRE(cbd.size() == 7);
  REQUIRE(thc.size() == 6);
  const std::vector<std::string> cbd_labels{"eps", "t_prime", "eps_prime", "Q", "W", "Q_u", "Q_v"};
  for (int i = 0; i < 7; ++i) CHECK(cbd.inputs[i].label == cbd_labels[i]);
  for (const auto& f : thc.inputs) CHECK(f.label != "Q_u");

  // Deterministic point: total 0.1, no window, unit yields -> one PLC pass.
  const double z_cbd[] = {0.1, 0.0, 0.5, 1.0, 1.0, 0.9, 0.4};
  CHECK(cbd.response(z_cbd) == doctest::Approx(0.1 * 28 / 29 * 0.9 * 0.9));  // THC above gamma: second pass
  const double z_thc[] = {0.1, 0.0, 0.5, 1.0, 1.0, 0.4};
  CHECK(thc.response(z_thc) == doctest::Approx(0.1 / 29 * 0.16));

  const auto r = shapley_exact(thc, settings(10, 50, 11));
  CHECK(r.sum_rc() == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r.sum_s() == doctest::Approx(r.total_variance).epsilon(1e-12));
}

TEST_CASE("empirical distribution") {
  CHECK_THROWS(EmpiricalDistribution({}));
  EmpiricalDistribution d({1.0, 2.0, 3.0});
  CHECK(d.mean() == doctest::Approx(2.0));
  stochastic::RngStream s(1, "emp");
  for (int i = 0; i < 100; ++i) {
    const double x = d.sample(s);
    CHECK((x == 1.0 || x == 2.0 || x == 3.0));
  }
}
