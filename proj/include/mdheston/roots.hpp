#ifndef MDHESTON_ROOTS_HPP
#define MDHESTON_ROOTS_HPP

#include <cmath>
#include <stdexcept>
#include <utility>

namespace mdheston {

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Bisection on a sign-changing bracket. `f(lo)` and `f(hi)` must differ in sign.
template <typename F>
RootResult bisect(F&& f, double lo, double hi, double x_tol = 1e-14, int max_iter = 400) {
  double flo = f(lo);
  RootResult r;
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(hi - lo) <= x_tol * std::max(1.0, std::abs(mid)) || mid == lo || mid == hi) {
      r.converged = true;
      break;
    }
    const double fm = f(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      r.converged = true;
      break;
    }
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  r.root = 0.5 * (lo + hi);
  r.residual = f(r.root);
  return r;
}

/// Newton's method kept inside a bracket [lo, hi] on which `fdf` (returning
/// {f, f'}) changes sign; steps leaving the bracket or stalling fall back to
/// bisection. Terminates on |f| <= f_tol or bracket width <= x_tol.
template <typename FdF>
RootResult safeguarded_newton(FdF&& fdf, double lo, double hi, double x0, double f_tol,
                              double x_tol = 1e-15, int max_iter = 300) {
  auto [flo, dlo] = fdf(lo);
  auto [fhi, dhi] = fdf(hi);
  (void)dlo;
  (void)dhi;
  if ((flo < 0.0) == (fhi < 0.0) && flo != 0.0 && fhi != 0.0) {
    throw std::domain_error("safeguarded_newton: bracket does not change sign");
  }
  const bool increasing = flo < 0.0;
  double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
  double prev_step = hi - lo;
  RootResult r;
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    auto [fx, dfx] = fdf(x);
    r.root = x;
    r.residual = fx;
    if (std::abs(fx) <= f_tol) {
      r.converged = true;
      return r;
    }
    if ((fx < 0.0) == increasing) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= x_tol * std::max(1.0, std::abs(x))) {
      r.converged = true;
      return r;
    }
    double next = x - fx / dfx;
    const bool inside = std::isfinite(next) && next > lo && next < hi;
    const double step = std::abs(next - x);
    if (!inside || step > 0.5 * prev_step) {
      next = 0.5 * (lo + hi);
    }
    prev_step = std::abs(next - x);
    x = next;
  }
  return r;
}

struct MinimumResult {
  double argmin = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section search for the minimum of a unimodal function on [lo, hi].
template <typename F>
MinimumResult golden_minimize(F&& f, double lo, double hi, double x_tol = 1e-10,
                              int max_iter = 300) {
  constexpr double inv_phi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  MinimumResult r;
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    if (b - a <= x_tol * std::max(1.0, std::abs(c))) break;
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc < fd) {
    r.argmin = c;
    r.value = fc;
  } else {
    r.argmin = d;
    r.value = fd;
  }
  return r;
}

}  // namespace mdheston

#endif  // MDHESTON_ROOTS_HPP
