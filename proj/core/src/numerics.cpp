#include "dsy/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dsy/errors.hpp"

namespace dsy {
namespace {

struct SimpsonPanel {
  double a, b, fa, fm, fb, s;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double b,
                double fa, double fm, double fb, double s, double eps,
                double eps0, int depth, int max_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double sl = simpson(a, m, fa, flm, fm);
  const double sr = simpson(m, b, fm, frm, fb);
  const double err = sl + sr - s;
  if (std::abs(err) <= 15.0 * eps || (b - a) < 1e-15 * (std::abs(a) + std::abs(b)))
    return sl + sr + err / 15.0;
  if (depth >= max_depth) {
    // A panel squeezed against an endpoint jump has error shrinking with the
    // width; accept it once negligible at the requested overall tolerance.
    // A divergent integrand keeps a non-vanishing panel error and throws.
    if (std::abs(err) <= eps0) return sl + sr + err / 15.0;
    throw numerical_failure("integrate: depth cap exceeded on [" +
                            std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return adaptive(f, a, m, fa, flm, fm, sl, 0.5 * eps, eps0, depth + 1,
                  max_depth) +
         adaptive(f, m, b, fm, frm, fb, sr, 0.5 * eps, eps0, depth + 1,
                  max_depth);
}

double integrate_finite(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double s = simpson(a, b, fa, fm, fb);
  // Coarse magnitude scale for the relative tolerance; refined panels
  // inherit a proportional share. The three-point Simpson value alone can
  // wildly underestimate a peaked integrand, so fold in sampled interior
  // magnitudes.
  double scale = std::abs(s);
  for (int i = 1; i < 16; ++i)
    scale = std::max(scale, std::abs(f(a + (b - a) * i / 16.0)) * (b - a));
  if (scale == 0.0) return 0.0;
  const double eps = rel_tol * scale;
  return adaptive(f, a, b, fa, fm, fb, s, eps, eps, 0, max_depth);
}

// Fold [lo, inf) onto [0,1) via y = lo + u/(1-u).
double integrate_upper_tail(const std::function<double(double)>& f, double lo,
                            double rel_tol, int max_depth) {
  auto g = [&f, lo](double u) -> double {
    if (u >= 1.0) return 0.0;
    const double w = 1.0 / (1.0 - u);
    const double y = lo + u * w;
    const double v = f(y);
    if (v == 0.0) return 0.0;
    return v * w * w;
  };
  return integrate_finite(g, 0.0, 1.0, rel_tol, max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol, int max_depth) {
  const double inf = std::numeric_limits<double>::infinity();
  if (lo > hi) return -integrate(f, hi, lo, rel_tol, max_depth);
  if (lo == -inf && hi == inf) {
    auto fl = [&f](double y) { return f(-y); };
    return integrate_upper_tail(f, 0.0, rel_tol, max_depth) +
           integrate_upper_tail(fl, 0.0, rel_tol, max_depth);
  }
  if (hi == inf) return integrate_upper_tail(f, lo, rel_tol, max_depth);
  if (lo == -inf) {
    auto fl = [&f](double y) { return f(-y); };
    return integrate_upper_tail(fl, -hi, rel_tol, max_depth);
  }
  return integrate_finite(f, lo, hi, rel_tol, max_depth);
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw std::domain_error("bisect: no sign change on the bracket");
  while (hi - lo > tol) {
    const double m = 0.5 * (lo + hi);
    if (m == lo || m == hi) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0) == (flo > 0)) {
      lo = m;
      flo = fm;
    } else {
      hi = m;
    }
  }
  return 0.5 * (lo + hi);
}

double log_product_accumulate(std::span<const double> terms) {
  double acc = 0.0;
  for (double t : terms) {
    if (!(t > 0.0))
      throw std::domain_error("log_product_accumulate: nonpositive term");
    acc += std::log(t);
  }
  return acc;
}

PowerIterResult power_iteration(
    const std::function<void(std::span<const double>, std::span<double>)>& matvec,
    std::span<double> v, double tol, int max_iter) {
  const std::size_t n = v.size();
  std::vector<double> w(n);
  auto norm = [](std::span<const double> x) {
    double s = 0;
    for (double xi : x) s += xi * xi;
    return std::sqrt(s);
  };
  double nv = norm(v);
  if (nv == 0.0) {
    v[0] = 1.0;
    nv = 1.0;
  }
  for (double& vi : v) vi /= nv;

  PowerIterResult res;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    matvec(v, w);
    const double nw = norm(w);
    res.iterations = it;
    if (nw == 0.0) {
      res.value = 0.0;
      res.converged = true;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    res.value = nw;
    if (it > 1 && std::abs(nw - prev) <= tol * std::max(1.0, std::abs(nw))) {
      res.converged = true;
      return res;
    }
    prev = nw;
  }
  return res;
}

}  // namespace dsy
