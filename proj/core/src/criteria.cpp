#include "dsy/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dsy/errors.hpp"
#include "dsy/numerics.hpp"
#include "dsy/rng.hpp"

namespace dsy {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double DiscretizedOperator::d(int i) const {
  return std::sqrt(std::max(gamma_values[i] * m_weights[i], 1e-300));
}

void DiscretizedOperator::apply(std::span<const double> x,
                                std::span<double> y) const {
  const int N = n();
  for (int i = 0; i < N; ++i) {
    double acc = 0;
    const double* row = trans.data() + static_cast<std::size_t>(i) * N;
    for (int j = 0; j < N; ++j) acc += row[j] * x[j];
    y[i] = damping(i) * acc;
  }
}

void DiscretizedOperator::apply_symmetrized(std::span<const double> x,
                                            std::span<double> y) const {
  const int N = n();
  std::vector<double> u(N);
  for (int j = 0; j < N; ++j) u[j] = std::sqrt(damping(j)) / d(j) * x[j];
  for (int i = 0; i < N; ++i) {
    double acc = 0;
    const double* row = trans.data() + static_cast<std::size_t>(i) * N;
    for (int j = 0; j < N; ++j) acc += row[j] * u[j];
    y[i] = std::sqrt(damping(i)) * d(i) * acc;
  }
}

double DiscretizedOperator::symmetry_defect() const {
  const int N = n();
  double worst = 0;
  for (int i = 0; i < N; ++i) {
    const double di = d(i);
    for (int j = i + 1; j < N; ++j) {
      const double bij = di * trans[static_cast<std::size_t>(i) * N + j] / d(j);
      const double bji = d(j) * trans[static_cast<std::size_t>(j) * N + i] / di;
      worst = std::max(worst, std::abs(bij - bji));
    }
  }
  return worst;
}

std::pair<double, double> DiscretizedOperator::row_sum_range() const {
  const int N = n();
  double lo = kInf, hi = -kInf;
  for (int i = 0; i < N; ++i) {
    double s = 0;
    const double* row = trans.data() + static_cast<std::size_t>(i) * N;
    for (int j = 0; j < N; ++j) s += row[j];
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

DiscretizedOperator discretize_operator(const MarkovKernel& k,
                                        const GridSpec& grid, double a) {
  if (!k.has_density() || !k.has_invariant())
    throw capability_error(
        "discretize_operator: kernel lacks density or invariant density");
  if (!(a >= 0)) throw config_error("discretize_operator: a must be >= 0");

  DiscretizedOperator op;
  op.a = a;

  if (k.discrete) {
    op.grid = k.discrete_states;
    op.m_weights.assign(op.grid.size(), 1.0);
  } else {
    if (grid.n < 2) throw config_error("discretize_operator: grid needs N >= 2");
    const bool half_open = k.open_lo && grid.lo <= k.support_lo;
    const int N = grid.n;
    op.grid.resize(N);
    op.m_weights.resize(N);
    if (half_open) {
      // (lo, hi]: the lower endpoint carries a zero density value and is
      // folded into the trapezoid weights.
      const double h = (grid.hi - grid.lo) / N;
      for (int j = 0; j < N; ++j) {
        op.grid[j] = grid.lo + h * (j + 1);
        op.m_weights[j] = (j == N - 1) ? 0.5 * h : h;
      }
    } else {
      const double h = (grid.hi - grid.lo) / (N - 1);
      for (int j = 0; j < N; ++j) {
        op.grid[j] = grid.lo + h * j;
        op.m_weights[j] = (j == 0 || j == N - 1) ? 0.5 * h : h;
      }
    }
    // Mass capture: the grid must hold essentially all of gamma.
    const double mass =
        integrate(k.invariant_density, grid.lo, grid.hi, 1e-10);
    if (mass < 1.0 - 1e-6)
      throw numerical_failure(
          "discretize_operator: grid captures only " + std::to_string(mass) +
          " of the gamma-mass; extend [lo, hi]");
  }

  const int N = op.n();
  op.gamma_values.resize(N);
  op.lambda_values.resize(N);
  double gamma_mass = 0;
  for (int i = 0; i < N; ++i) {
    op.gamma_values[i] = k.invariant_density(op.grid[i]);
    op.lambda_values[i] = k.lambda(op.grid[i]);
    gamma_mass += op.gamma_values[i] * op.m_weights[i];
  }
  for (double& gv : op.gamma_values) gv /= gamma_mass;

  op.trans.resize(static_cast<std::size_t>(N) * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      op.trans[static_cast<std::size_t>(i) * N + j] =
          k.density(op.grid[i], op.grid[j]) * op.m_weights[j];
  return op;
}

std::vector<PairSequenceRow> pair_sequence(const DiscretizedOperator& op,
                                           int n_max) {
  if (n_max < 1) throw config_error("pair_sequence: n_max must be >= 1");
  const int N = op.n();
  std::vector<double> v(N, 1.0), w(N);
  double log_scale = 0;
  std::vector<PairSequenceRow> rows;
  rows.reserve(n_max);
  for (int step = 1; step <= n_max; ++step) {
    op.apply(v, w);
    double peak = 0;
    for (double wi : w) peak = std::max(peak, std::abs(wi));
    if (peak == 0.0) {
      for (int n = step; n <= n_max; ++n) rows.push_back({n, 0.0, 0.0});
      return rows;
    }
    for (int i = 0; i < N; ++i) v[i] = w[i] / peak;
    log_scale += std::log(peak);
    double inner = 0;
    for (int i = 0; i < N; ++i)
      inner += op.gamma_values[i] * op.m_weights[i] * v[i];
    const double log_value = log_scale + std::log(inner);
    rows.push_back({step, std::exp(log_value), std::exp(log_value / step)});
  }
  return rows;
}

double spectral_radius(const DiscretizedOperator& op, double tol) {
  std::vector<double> v(op.n(), 1.0);
  auto mv = [&op](std::span<const double> x, std::span<double> y) {
    op.apply_symmetrized(x, y);
  };
  const PowerIterResult r = power_iteration(mv, v, tol);
  if (!r.converged)
    throw numerical_failure("spectral_radius: power iteration did not converge");
  return r.value;
}

double operator_norm(const DiscretizedOperator& op, double tol) {
  const int N = op.n();
  // C = D T_a D^{-1} is T_a in the orthonormalized basis of L2(gamma)
  std::vector<double> scale(N);  // d_i * g_i, the row factor of C
  for (int i = 0; i < N; ++i) scale[i] = op.d(i) * op.damping(i);
  std::vector<double> z(N);
  auto mv = [&op, &scale, &z, N](std::span<const double> x, std::span<double> y) {
    for (int i = 0; i < N; ++i) {
      double acc = 0;
      const double* row = op.trans.data() + static_cast<std::size_t>(i) * N;
      for (int j = 0; j < N; ++j) acc += row[j] * x[j] / op.d(j);
      z[i] = scale[i] * acc;
    }
    for (int j = 0; j < N; ++j) {
      double acc = 0;
      for (int i = 0; i < N; ++i)
        acc += op.trans[static_cast<std::size_t>(i) * N + j] * scale[i] * z[i];
      y[j] = acc / op.d(j);
    }
  };
  std::vector<double> v(N, 1.0);
  const PowerIterResult r = power_iteration(mv, v, tol);
  if (!r.converged)
    throw numerical_failure("operator_norm: power iteration did not converge");
  return std::sqrt(r.value);
}

KeyLemmaEstimate key_lemma_estimate(const MarkovKernel& k,
                                    std::optional<double> initial, double a,
                                    int n, int trials, double b,
                                    std::uint64_t seed) {
  if (!(a > 0)) throw config_error("key_lemma: a must be positive");
  if (!(b >= 1)) throw config_error("key_lemma: branching factor must be >= 1");
  if (n < 0 || trials < 1) throw config_error("key_lemma: bad n or trials");
  if (!initial && !k.sample_invariant)
    throw config_error("key_lemma: no initial state and no stationary sampler");
  if (initial && k.has_invariant() && k.invariant_density(*initial) <= 0.0)
    throw config_error("key_lemma: initial state has zero invariant density");

  double sum = 0, sum_sq = 0;
  std::vector<double> terms(static_cast<std::size_t>(n) + 1);
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t tkey = trial_key(seed, static_cast<std::uint64_t>(t));
    double x;
    if (initial) {
      x = *initial;
    } else {
      CounterStream s0(tkey, Draw::initial);
      x = k.sample_invariant(s0);
    }
    CounterStream s(tkey, Draw::state);
    for (int j = 0; j <= n; ++j) {
      terms[j] = g(a, k.lambda(x));
      if (j < n) x = k.sample(x, s);
    }
    const double p = std::exp(log_product_accumulate(terms));
    sum += p;
    sum_sq += p * p;
  }
  const double mean = sum / trials;
  const double var =
      trials > 1 ? std::max(0.0, (sum_sq - sum * sum / trials) / (trials - 1))
                 : 0.0;
  const double bn = std::pow(b, n);

  KeyLemmaEstimate out;
  out.value = bn * mean;
  out.std_error = bn * std::sqrt(var / trials);
  out.n = n;
  out.a = a;
  out.b = b;
  out.trials = trials;
  return out;
}

namespace {

// Geometric-decay test on the increments of a partial sum: the last quarter
// must be clearly smaller than the quarter before it (or negligible).
bool increments_summable(const std::vector<double>& inc) {
  if (inc.size() < 8) return true;
  const std::size_t q = inc.size() / 4;
  double last = 0, prev = 0, total = 0;
  for (std::size_t i = 0; i < inc.size(); ++i) total += inc[i];
  for (std::size_t i = inc.size() - q; i < inc.size(); ++i) last += inc[i];
  for (std::size_t i = inc.size() - 2 * q; i < inc.size() - q; ++i)
    prev += inc[i];
  if (last <= 1e-12 * total) return true;
  return last < 0.75 * prev;
}

}  // namespace

TraceResult trace_condition(const MarkovKernel& k, double a, double rel_tol) {
  if (!k.has_density())
    throw capability_error("trace_condition: kernel lacks a density");
  if (!(a > 0)) throw config_error("trace_condition: a must be positive");

  TraceResult out;
  if (k.discrete) {
    std::vector<double> damped, plain;
    damped.reserve(k.discrete_states.size());
    for (double x : k.discrete_states) {
      const double p2 = two_step_diagonal(k, x, rel_tol);
      const double ga = g(a, k.lambda(x));
      damped.push_back(ga * ga * p2);
      plain.push_back(p2);
    }
    out.finite = increments_summable(damped);
    out.a_free_finite = increments_summable(plain);
    out.value = out.finite
                    ? std::accumulate(damped.begin(), damped.end(), 0.0)
                    : kInf;
    out.a_free = out.a_free_finite
                     ? std::accumulate(plain.begin(), plain.end(), 0.0)
                     : kInf;
    return out;
  }

  auto diag = [&k, rel_tol](double x) -> double {
    if (x <= k.support_lo && k.open_lo) return 0.0;
    return two_step_diagonal(k, x, rel_tol);
  };
  try {
    out.value = integrate(
        [&](double x) {
          const double ga = g(a, k.lambda(x));
          return ga * ga * diag(x);
        },
        k.support_lo, k.support_hi, std::max(rel_tol, 1e-6));
    out.finite = std::isfinite(out.value);
  } catch (const numerical_failure&) {
    out.value = kInf;
  }
  try {
    out.a_free = integrate(diag, k.support_lo, k.support_hi,
                           std::max(rel_tol, 1e-6));
    out.a_free_finite = std::isfinite(out.a_free);
  } catch (const numerical_failure&) {
    out.a_free = kInf;
  }
  return out;
}

Cor36Result cor36_check(const MarkovKernel& k, double b, double rel_tol) {
  if (!k.has_density())
    throw capability_error("cor36_check: kernel lacks a density");
  if (!(b >= 0 && b <= 2)) throw config_error("cor36: b must lie in [0,2]");

  Cor36Result out;
  std::vector<double> scan;
  if (k.discrete) {
    scan = k.discrete_states;
  } else {
    // Log-spaced scan over the support with a monotone-tail check.
    const double lo = k.open_lo || k.support_lo == 0.0
                          ? 1e-2
                          : std::max(k.support_lo, -1e3);
    const double hi = std::isfinite(k.support_hi) ? k.support_hi : 1e3;
    const int points = 80;
    for (int i = 0; i <= points; ++i)
      scan.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / points));
    if (k.support_lo < 0)  // two-sided supports scan both tails
      for (int i = 0; i <= points; ++i)
        scan.push_back(-lo * std::pow(hi / lo, static_cast<double>(i) / points));
  }

  std::vector<double> values;
  values.reserve(scan.size());
  for (double x : scan) {
    const double p2 = two_step_diagonal(k, x, rel_tol);
    values.push_back(std::pow(k.lambda(x), b) * p2);
    out.sup_term = std::max(out.sup_term, values.back());
  }
  // Tail trend: a sup that is still climbing at the scan boundary is
  // treated as unbounded.
  out.sup_finite = true;
  if (values.size() >= 8) {
    const std::size_t m = values.size();
    if (values[m - 1] > values[m - 5] * 1.05 &&
        values[m - 1] > 1e-9 * out.sup_term)
      out.sup_finite = false;
  }

  auto integrand = [&k, b](double x) {
    const double lam = k.lambda(x);
    return std::pow(lam, 2.0 - b) / ((1.0 + lam) * (1.0 + lam));
  };
  if (k.discrete) {
    std::vector<double> inc;
    for (double x : k.discrete_states) inc.push_back(integrand(x));
    out.integral_finite = increments_summable(inc);
    out.integral_term = out.integral_finite
                            ? std::accumulate(inc.begin(), inc.end(), 0.0)
                            : kInf;
  } else {
    try {
      out.integral_term = integrate(integrand, k.support_lo, k.support_hi,
                                    std::max(rel_tol, 1e-6));
      out.integral_finite = std::isfinite(out.integral_term);
    } catch (const numerical_failure&) {
      out.integral_term = kInf;
      out.integral_finite = false;
    }
  }
  return out;
}

std::optional<double> find_min_a(const MarkovKernel& k, const GridSpec& grid,
                                 double threshold, double a_lo, double a_hi,
                                 double margin, double rel_tol) {
  DiscretizedOperator op = discretize_operator(k, grid, std::max(a_lo, 0.0));
  auto norm_at = [&op](double a) {
    op.a = a;
    return operator_norm(op);
  };
  const double target = threshold - margin;
  if (norm_at(a_lo) < target) return a_lo;
  if (norm_at(a_hi) >= target) return std::nullopt;
  double lo = a_lo, hi = a_hi;  // norm(lo) >= target > norm(hi)
  while (hi - lo > rel_tol * hi) {
    const double mid = std::sqrt(lo * hi) > 0 ? std::sqrt(lo * hi)
                                              : 0.5 * (lo + hi);
    if (norm_at(mid) < target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::passes:
      return "passes";
    case Verdict::fails:
      return "fails";
    default:
      return "inconclusive";
  }
}

Verdict verdict_with_margin(double value, double threshold, double margin) {
  if (value < threshold - margin) return Verdict::passes;
  if (value > threshold + margin) return Verdict::fails;
  return Verdict::inconclusive;
}

}  // namespace dsy
