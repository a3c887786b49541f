#include "hempsim/risk/shapley.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace hempsim::risk {

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw TooFewSamples("sample variance needs at least two values");
  // Constant data: exactly zero, not the rounding residue of the mean.
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

namespace {

void check_model(const OutputModel& model, const CostSettings& cs) {
  if (model.inputs.empty()) throw std::invalid_argument("model has no inputs");
  if (model.size() > kMaxInputs) throw TooManyInputs("at most 16 inputs are supported");
  if (cs.outer_K < 1) throw TooFewSamples("outer sample count K must be at least 1");
  if (cs.inner_I < 2) throw TooFewSamples("inner sample count I must be at least 2");
}

}  // namespace

std::vector<double> estimate_cost_terms(InputIndexSet J, const OutputModel& model, const CostSettings& cs) {
  check_model(model, cs);
  const int L = model.size();
  std::vector<double> z(L);
  std::vector<double> y(cs.inner_I);
  std::vector<double> terms(cs.outer_K);
  for (int k = 0; k < cs.outer_K; ++k) {
    const std::string outer = cs.label + "/outer:" + std::to_string(k);
    // Z_-J is drawn once per outer sample and held fixed below.
    for (int l = 0; l < L; ++l) {
      if (J >> l & 1u) continue;
      stochastic::RngStream s(cs.seed, outer + "/z:" + std::to_string(l));
      z[l] = model.inputs[l].sample(s);
    }
    for (int i = 0; i < cs.inner_I; ++i) {
      const std::string inner = outer + "/inner:" + std::to_string(i);
      for (int l = 0; l < L; ++l) {
        if (!(J >> l & 1u)) continue;
        stochastic::RngStream s(cs.seed, inner + "/z:" + std::to_string(l));
        z[l] = model.inputs[l].sample(s);
      }
      y[i] = model.response(z);
    }
    // Inner variance around Ybar^(k); averaging over k gives the 1/(K(I-1)) normalization.
    terms[k] = sample_variance(y);
  }
  return terms;
}

double estimate_cost(InputIndexSet J, const OutputModel& model, const CostSettings& cs) {
  const auto terms = estimate_cost_terms(J, model, cs);
  return std::accumulate(terms.begin(), terms.end(), 0.0) / static_cast<double>(terms.size());
}

double ShapleyResult::sum_s() const { return std::accumulate(s.begin(), s.end(), 0.0); }
double ShapleyResult::sum_rc() const { return std::accumulate(rc.begin(), rc.end(), 0.0); }

namespace {

using Permutation = std::vector<int>;

// Per-subset cost terms; only the subsets some permutation touches are filled.
struct CostTable {
  std::vector<std::vector<double>> terms;
  std::vector<char> have;
};

CostTable evaluate_subsets(const OutputModel& model, const CostSettings& cs, const std::vector<InputIndexSet>& masks,
                           int threads) {
  const std::size_t n_masks = std::size_t{1} << model.size();
  CostTable t{std::vector<std::vector<double>>(n_masks), std::vector<char>(n_masks, 0)};
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < masks.size(); i = next++) t.terms[masks[i]] = estimate_cost_terms(masks[i], model, cs);
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(masks.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto m : masks) t.have[m] = 1;
  return t;
}

// Number of batches for batch means: the largest divisor of K not above 10.
int batch_count(int K) {
  for (int b = std::min(K, 10); b >= 1; --b)
    if (K % b == 0) return b;
  return 1;
}

// Mean of the terms in [lo, hi).
double cost_of(const CostTable& t, InputIndexSet m, int lo, int hi) {
  const auto& v = t.terms[m];
  double s = 0.0;
  for (int k = lo; k < hi; ++k) s += v[k];
  return s / (hi - lo);
}

struct PermStats {
  std::vector<double> s;
  std::vector<double> perm_sd;  // sd of per-ordering increments
};

// Average marginal increment of each input over the given orderings, using
// costs averaged over outer samples [lo, hi).
PermStats marginal_average(const std::vector<Permutation>& perms, const CostTable& t, int L, int lo, int hi,
                           bool want_sd) {
  std::vector<double> cost(t.terms.size(), 0.0);
  for (std::size_t m = 0; m < t.terms.size(); ++m)
    if (t.have[m]) cost[m] = cost_of(t, static_cast<InputIndexSet>(m), lo, hi);
  std::vector<double> sum(L, 0.0), sumsq(L, 0.0);
  for (const auto& p : perms) {
    InputIndexSet before = 0;
    for (int l : p) {
      const InputIndexSet after = before | (1u << l);
      const double inc = cost[after] - cost[before];
      sum[l] += inc;
      sumsq[l] += inc * inc;
      before = after;
    }
  }
  PermStats out{std::vector<double>(L), std::vector<double>(L, 0.0)};
  const double n = static_cast<double>(perms.size());
  for (int l = 0; l < L; ++l) {
    out.s[l] = sum[l] / n;
    if (want_sd && perms.size() > 1)
      out.perm_sd[l] = std::sqrt(std::max(0.0, (sumsq[l] - n * out.s[l] * out.s[l]) / (n - 1)));
  }
  return out;
}

ShapleyResult combine(const OutputModel& model, const CostSettings& cs, const std::vector<Permutation>& perms,
                      EstimatorKind kind, int threads) {
  const int L = model.size();
  const InputIndexSet full = (1u << L) - 1;

  std::vector<char> need(std::size_t{1} << L, 0);
  need[0] = need[full] = 1;
  for (const auto& p : perms) {
    InputIndexSet m = 0;
    for (int l : p) need[m |= (1u << l)] = 1;
  }
  std::vector<InputIndexSet> masks;
  for (std::size_t m = 0; m < need.size(); ++m)
    if (need[m]) masks.push_back(static_cast<InputIndexSet>(m));
  const CostTable table = evaluate_subsets(model, cs, masks, threads);

  ShapleyResult r;
  r.kind = kind;
  r.permutations = static_cast<int>(perms.size());
  r.subsets_evaluated = static_cast<int>(masks.size());
  for (const auto& f : model.inputs) r.labels.push_back(f.label);

  const int K = cs.outer_K;
  const auto all = marginal_average(perms, table, L, 0, K, kind == EstimatorKind::PermutationSampled);
  r.s = all.s;
  r.total_variance = cost_of(table, full, 0, K);

  // Batch means: s is linear in the costs, so each batch of outer samples
  // yields its own estimate of s.
  const int B = batch_count(K);
  std::vector<double> batch_var(L, 0.0);
  if (B >= 2) {
    std::vector<std::vector<double>> per(L);
    const int size = K / B;
    for (int b = 0; b < B; ++b) {
      const auto sb = marginal_average(perms, table, L, b * size, (b + 1) * size, false);
      for (int l = 0; l < L; ++l) per[l].push_back(sb.s[l]);
    }
    for (int l = 0; l < L; ++l) batch_var[l] = sample_variance(per[l]) / B;
  }
  r.s_stderr.resize(L);
  for (int l = 0; l < L; ++l) {
    const double perm_var = all.perm_sd[l] * all.perm_sd[l] / static_cast<double>(perms.size());
    r.s_stderr[l] = std::sqrt(batch_var[l] + perm_var);
  }

  r.rc.assign(L, 0.0);
  if (r.total_variance > 0.0)
    for (int l = 0; l < L; ++l) r.rc[l] = r.s[l] / r.total_variance;
  return r;
}

}  // namespace

ShapleyResult shapley_exact(const OutputModel& model, const CostSettings& cs, int threads) {
  check_model(model, cs);
  const int L = model.size();
  if (L > kMaxExactInputs) throw TooManyInputs("exact Shapley enumerates L! orderings; use at most 8 inputs");
  std::vector<Permutation> perms;
  Permutation p(L);
  std::iota(p.begin(), p.end(), 0);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return combine(model, cs, perms, EstimatorKind::Exact, threads);
}

ShapleyResult shapley_sampled(const OutputModel& model, int m, const CostSettings& cs, int threads) {
  check_model(model, cs);
  if (m < 1) throw std::invalid_argument("need at least one permutation");
  const int L = model.size();
  stochastic::RngStream rng(cs.seed, cs.label + "/permutations");
  std::vector<Permutation> perms;
  perms.reserve(m);
  for (int j = 0; j < m; ++j) {
    Permutation p(L);
    std::iota(p.begin(), p.end(), 0);
    for (int i = L - 1; i > 0; --i) {
      const auto k = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(p[i], p[k]);
    }
    perms.push_back(std::move(p));
  }
  return combine(model, cs, perms, EstimatorKind::PermutationSampled, threads);
}

RcSummary relative_contributions(const std::vector<ShapleyResult>& reps) {
  if (reps.size() < 2) throw TooFewSamples("relative contributions need at least two macro-replications");
  const std::size_t L = reps.front().s.size();
  RcSummary out;
  out.degenerate = std::all_of(reps.begin(), reps.end(), [](const ShapleyResult& r) { return !(r.total_variance > 0.0); });
  const double J = static_cast<double>(reps.size());
  double total = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> v;
    for (const auto& r : reps) {
      if (r.rc.size() != L) throw std::invalid_argument("macro-replications disagree on the input count");
      v.push_back(r.rc[l]);
    }
    RelativeContribution row;
    row.label = l < reps.front().labels.size() ? reps.front().labels[l] : std::to_string(l);
    row.mean = std::accumulate(v.begin(), v.end(), 0.0) / J;
    row.sd = std::sqrt(sample_variance(v));
    row.std_error = row.sd / std::sqrt(J);
    total += row.mean;
    out.rows.push_back(row);
  }
  out.residual = std::abs(total - 1.0);
  return out;
}

}  // namespace hempsim::risk
