#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsy/kernels.hpp"

namespace dsy {

// Uniform quadrature grid for operator discretization; inclusive endpoints
// (the CLI syntax lo:hi:N). Discrete kernels ignore the spec and use their
// own state set.
struct GridSpec {
  double lo = 0, hi = 0;
  int n = 0;
};

// Matrix view of the damped transition operator acting on grid functions in
// the gamma-weighted inner product. Only the a-independent part is stored:
//   trans[i*n+j] = p(x_i, x_j) w_j          (T_0 on the grid)
// The symmetrized form sqrt(g_a) D T_0 D^{-1} sqrt(g_a), D = diag(sqrt(gamma w)),
// shares the spectrum of T_a and is symmetric to round-off for reversible
// kernels; all eigen-computations run on it via matvecs.
struct DiscretizedOperator {
  std::vector<double> grid;
  std::vector<double> m_weights;     // quadrature weights for the measure m
  std::vector<double> gamma_values;  // gamma(x_i), normalized so sum(gamma*w)=1
  std::vector<double> lambda_values;
  double a = 0;
  std::vector<double> trans;  // row-major n x n

  int n() const { return static_cast<int>(grid.size()); }
  double damping(int i) const { return lambda_values[i] / (a + lambda_values[i]); }
  // d_i = sqrt(gamma_i w_i), the similarity weight
  double d(int i) const;

  // y = T_a x  (grid function action)
  void apply(std::span<const double> x, std::span<double> y) const;
  // y = S x with S the symmetrized matrix
  void apply_symmetrized(std::span<const double> x, std::span<double> y) const;
  // max_ij |B_ij - B_ji| of the symmetrized T_0; detects non-reversibility
  double symmetry_defect() const;
  // min/max over rows of sum_j p(x_i,x_j) w_j (mass capture diagnostic)
  std::pair<double, double> row_sum_range() const;

  DiscretizedOperator with_a(double a_new) const {
    DiscretizedOperator copy = *this;
    copy.a = a_new;
    return copy;
  }
};

// Builds the grid-function matrix of T_a. Continuous kernels use composite
// trapezoid weights on the uniform grid (a half-open support shifts the grid
// to (lo, hi] and folds the zero-valued lower endpoint into the weights);
// discrete kernels use their state set with unit weights. Fails when the
// domain captures less than 1 - 1e-6 of the gamma-mass.
DiscretizedOperator discretize_operator(const MarkovKernel& k,
                                        const GridSpec& grid, double a);

struct PairSequenceRow {
  int n = 0;
  double value = 0;     // <1, T_a^n 1>_gamma
  double nth_root = 0;  // value^{1/n}
};

// <1, T_a^n 1>_gamma for n = 1..n_max by iterated application to the
// constant-1 vector, accumulated in scaled form to dodge underflow.
std::vector<PairSequenceRow> pair_sequence(const DiscretizedOperator& op,
                                           int n_max);

// Largest-magnitude eigenvalue of the symmetrized matrix (= spectral radius
// of T_a by similarity), by power iteration to `tol`.
double spectral_radius(const DiscretizedOperator& op, double tol = 1e-8);

// Operator norm of T_a on L2(gamma): largest singular value of the
// orthonormal-basis matrix, by power iteration on C^T C.
double operator_norm(const DiscretizedOperator& op, double tol = 1e-8);

// Monte Carlo estimate of b^n * E prod_{j=0}^{n} g_a(lambda(X_j)) along a
// single chain path (the key product bound; b = 2 on the binary tree, the
// offspring mean on Galton-Watson trees). Products accumulate in log space.
struct KeyLemmaEstimate {
  double value = 0;
  double std_error = 0;
  int n = 0;
  double a = 0, b = 0;
  int trials = 0;
};
KeyLemmaEstimate key_lemma_estimate(const MarkovKernel& k,
                                    std::optional<double> initial, double a,
                                    int n, int trials, double b,
                                    std::uint64_t seed);

// Trace integral int g_a(x)^2 p^(2)(x,x) m(dx), plus the a-free sufficient
// variant int p^(2)(x,x) m(dx). Divergent tails report +inf.
struct TraceResult {
  double value = 0;
  double a_free = 0;  // +inf when divergent
  bool finite = false;
  bool a_free_finite = false;
};
TraceResult trace_condition(const MarkovKernel& k, double a,
                            double rel_tol = 1e-8);

// The b-parameterized pair of conditions: sup_x lambda(x)^b p^(2)(x,x) and
// int lambda^{2-b}/(1+lambda)^2 dm, with a monotone-tail divergence test on
// the sup scan. Both finite => non-explosion verdict passes.
struct Cor36Result {
  double sup_term = 0;
  double integral_term = 0;
  bool sup_finite = false;
  bool integral_finite = false;
  bool passes() const { return sup_finite && integral_finite; }
};
Cor36Result cor36_check(const MarkovKernel& k, double b, double rel_tol = 1e-8);

// Smallest a in [a_lo, a_hi] with operator_norm(T_a) < threshold - margin
// (bisection; the norm is nonincreasing in a). nullopt when even a_hi fails.
std::optional<double> find_min_a(const MarkovKernel& k, const GridSpec& grid,
                                 double threshold = 0.5, double a_lo = 1e-3,
                                 double a_hi = 1e6, double margin = 1e-6,
                                 double rel_tol = 1e-4);

enum class Verdict { passes, fails, inconclusive };
const char* to_string(Verdict v);

// A numerical criterion claiming a strict inequality must budget its own
// error: passes only when value < threshold - margin, fails only when
// value > threshold + margin.
Verdict verdict_with_margin(double value, double threshold, double margin);

struct CriterionReport {
  std::string method;  // key_lemma_mc | pair_sequence | spectral_radius | ...
  double a = 0;
  double value = 0;
  double threshold = 0.5;
  Verdict verdict = Verdict::inconclusive;
  std::string diagnostics;
};

}  // namespace dsy
