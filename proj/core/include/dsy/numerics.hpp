#pragma once

#include <functional>
#include <span>

namespace dsy {

// Adaptive Simpson quadrature. Either limit may be infinite; semi-infinite
// tails are folded onto [0,1) by y = lo + u/(1-u). Throws numerical_failure
// when the interval-halving depth cap is exceeded before the tolerance is
// met (which is also how divergent tails surface).
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol = 1e-8, int max_depth = 40);

// Root of a sign-changing function by bisection; bracket width <= tol.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol = 1e-12);

// Sum of logs of terms in (0,1]; exponentiation is deferred to the caller.
double log_product_accumulate(std::span<const double> terms);

struct PowerIterResult {
  double value = 0;  // dominant |eigenvalue| of the (symmetric) operator
  int iterations = 0;
  bool converged = false;
};

// Power iteration for a symmetric operator given as a matvec. `v` holds the
// start vector on entry and the eigenvector estimate on exit.
PowerIterResult power_iteration(
    const std::function<void(std::span<const double>, std::span<double>)>& matvec,
    std::span<double> v, double tol = 1e-8, int max_iter = 20000);

}  // namespace dsy
