#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsy/rng.hpp"

namespace dsy {

// Damping factor lam/(a+lam), the Laplace transform of the scaled
// exponential holding time; equals 1 at a=0.
inline double g(double a, double lam) { return lam / (a + lam); }

// A named intensity model: Markov transition sampler along tree paths,
// optional transition density p(x,y) and invariant density gamma(x) (both
// w.r.t. the reference measure m: counting measure on the state set for
// discrete kernels, Lebesgue otherwise), and the intensity function
// lambda(x) > 0.
//
// Kernels are immutable after construction (sampler caches included) and
// take externally owned RNG streams, so they are freely shared across
// threads. States are carried as doubles; discrete kernels hold their
// state values in `discrete_states`.
struct MarkovKernel {
  std::string name;
  bool discrete = false;
  std::vector<double> discrete_states;  // discrete kernels only
  double support_lo = 0.0;
  double support_hi = std::numeric_limits<double>::infinity();
  bool open_lo = false;  // support excludes support_lo (e.g. (0, inf))

  std::function<double(double, CounterStream&)> sample;
  std::function<std::pair<double, double>(double, CounterStream&)> sample_pair;
  std::function<double(double, double)> density;            // optional
  std::function<double(double)> invariant_density;          // optional
  std::function<double(CounterStream&)> sample_invariant;   // optional
  std::function<double(double)> lambda;

  bool has_density() const { return static_cast<bool>(density); }
  bool has_invariant() const { return static_cast<bool>(invariant_density); }

  // Joint draw of the two children's states; falls back to two independent
  // draws when the kernel has no coupled sampler.
  std::pair<double, double> sample_children(double x, CounterStream& s) const {
    if (sample_pair) return sample_pair(x, s);
    return {sample(x, s), sample(x, s)};
  }
};

// Deterministic generation-scaled intensities lambda_v = alpha^{-|v|}.
struct GenerationScaledModel {
  double alpha = 1.0;
};

// --- shipped kernels -------------------------------------------------------

// Birth-death chain on {1..J} with reflection at both ends: p(1,2)=1
// (beta_1 = 1), p(J,J-1)=1, interior p(j,j+1)=beta_j, p(j,j-1)=1-beta_j.
// Invariant density is the product form gamma_j ~ (b2..b_{j-1})/(d2..d_j)
// normalized over {1..J}; lambda(j) = j.
// `betas[j-1]` is beta_j; betas.size() must be >= J-1.
MarkovKernel birth_death_kernel(std::vector<double> betas, int truncation_j);

// Intensity chain of the Navier-Stokes Fourier cascade: state space (0,inf),
// lambda(x) = x^2, invariant density 4x e^{-2x}, transitions realized by the
// iterated map X' = U x + T/2 (U uniform, T mean-one exponential; the two
// children share U_1 + U_2 = 1).
MarkovKernel bessel_kernel();

// Closed-form transition CDF of the Bessel kernel (used as a KS oracle).
double bessel_transition_cdf(double x, double y);

// Fourier-side KPP chain on R: lambda(xi) = 1 + xi^2, transition density
// H(eta|xi) = h(eta)h(xi-eta) / ((1+xi^2)h(xi)) with the majorizing kernel
// h(xi) = 3 xi csch(pi xi); invariant density ~ (1+xi^2) h(xi)^2, normalized
// numerically. Sampling is by rejection against a two-sided exponential
// proposal centered at xi/2.
MarkovKernel kpp_kernel();

// The majorizing kernel h(xi) = 3 xi / sinh(pi xi), evaluated stably through
// the removable singularity at 0 (h(0) = 3/pi).
double majorizing_h(double xi);

// Mean-field kernel: p(x,.) = gamma(.) independent of x.
MarkovKernel mean_field_kernel(
    std::function<double(CounterStream&)> gamma_sampler,
    std::function<double(double)> gamma_density,
    std::function<double(double)> lambda, double support_lo, double support_hi);

// Degenerate mean-field kernel: the chain sits at `state` forever and the
// intensity is constantly `lambda_value` (classical Yule for lambda 1).
MarkovKernel mean_field_point_mass(double lambda_value, double state = 1.0);

// --- diagnostics -----------------------------------------------------------

// max over grid pairs of |p(x,y)g(x) - p(y,x)g(y)| / (1 + |p(x,y)g(x)|);
// the type-(M) time-reversibility contract. Requires density + invariant.
double detailed_balance_residual(const MarkovKernel& k,
                                 std::span<const double> grid);

// Two-step transition diagonal p^(2)(x,x); closed sum for discrete kernels,
// adaptive quadrature for continuous ones. Requires density.
double two_step_diagonal(const MarkovKernel& k, double x, double rel_tol = 1e-8);

// p^(2)(x,x) split at the diagonal: `below` integrates z in (lo, x],
// `above` integrates z in (x, hi). Continuous kernels only.
struct TwoStepSplit {
  double below = 0, above = 0;
  double total() const { return below + above; }
};
TwoStepSplit two_step_diagonal_split(const MarkovKernel& k, double x,
                                     double rel_tol = 1e-8);

}  // namespace dsy
