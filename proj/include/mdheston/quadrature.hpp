#ifndef MDHESTON_QUADRATURE_HPP
#define MDHESTON_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

namespace mdheston {

template <typename T>
struct QuadratureResult {
  T value{};
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-10;
  std::size_t max_intervals = 4000;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
inline constexpr std::array<double, 8> gk15_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk15_gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename F>
auto gk15(F& f, double a, double b) {
  using T = std::invoke_result_t<F&, double>;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kronrod = fc * gk15_kronrod_weights[7];
  T gauss = fc * gk15_gauss_weights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = h * gk15_nodes[j];
    const T s = f(c - dx) + f(c + dx);
    kronrod += s * gk15_kronrod_weights[j];
    if (j % 2 == 1) gauss += s * gk15_gauss_weights[j / 2];
  }
  return Segment<T>{a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
///
/// Works for real and complex integrands. The interval with the largest error
/// estimate is bisected until the summed estimate meets
/// max(abs_tol, rel_tol * |value|) or max_intervals is reached.
template <typename F>
auto integrate(F&& f, double a, double b, const QuadratureOptions& opt = {})
    -> QuadratureResult<std::invoke_result_t<F&, double>> {
  using T = std::invoke_result_t<F&, double>;
  QuadratureResult<T> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Segment<T>> heap;
  auto first = detail::gk15(f, a, b);
  out.evaluations = 15;
  T total = first.value;
  double err = first.error;
  heap.push(first);
  while (heap.size() < opt.max_intervals) {
    if (err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
      out.converged = true;
      break;
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  T sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.error = esum;
  if (!out.converged) out.converged = esum <= std::max(opt.abs_tol, opt.rel_tol * std::abs(sum));
  return out;
}

struct HalfLineOptions {
  QuadratureOptions inner{};
  /// Integration stops once |f| at the frontier, relative to |f(a)|, drops below this.
  double truncation = 1e-14;
  std::size_t max_segments = 64;
};

/// Integral over [a, inf) by consecutive panels of doubling width starting at
/// `scale`. Stops when the integrand has decayed below `truncation` (relative
/// to its value at `a`) and the last panel no longer moves the total.
template <typename F>
auto integrate_half_line(F&& f, double a, double scale, const HalfLineOptions& opt = {})
    -> QuadratureResult<std::invoke_result_t<F&, double>> {
  using T = std::invoke_result_t<F&, double>;
  QuadratureResult<T> out;
  const double f0 = std::max(std::abs(f(a)), std::numeric_limits<double>::min());
  double lo = a;
  double width = scale;
  for (std::size_t k = 0; k < opt.max_segments; ++k) {
    const double hi = lo + width;
    auto piece = integrate(f, lo, hi, opt.inner);
    out.value += piece.value;
    out.error += piece.error;
    out.evaluations += piece.evaluations + 1;
    const double edge = std::abs(f(hi));
    const double budget = std::max(opt.inner.abs_tol, opt.inner.rel_tol * std::abs(out.value));
    if (edge <= opt.truncation * f0 && std::abs(piece.value) <= budget) {
      // Tail beyond hi bounded by the decaying edge value over one more panel.
      out.error += edge * width;
      out.converged = true;
      return out;
    }
    lo = hi;
    width *= 2.0;
  }
  out.converged = false;
  return out;
}

}  // namespace mdheston

#endif  // MDHESTON_QUADRATURE_HPP
