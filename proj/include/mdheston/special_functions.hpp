#ifndef MDHESTON_SPECIAL_FUNCTIONS_HPP
#define MDHESTON_SPECIAL_FUNCTIONS_HPP

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace mdheston {

using cplx = std::complex<double>;

inline constexpr double inf = std::numeric_limits<double>::infinity();

namespace detail {

// Weideman's rational expansion of the Faddeeva function in the upper half
// plane. Coefficients are the cosine transform of exp(-t^2)(L^2 + t^2) on the
// mapped circle t = L tan(theta / 2).
inline constexpr int weideman_terms = 40;

struct WeidemanTable {
  double scale;
  std::array<double, weideman_terms> coeff;  // coeff[n - 1] multiplies Z^(n-1)
};

inline const WeidemanTable& weideman_table() {
  static const WeidemanTable table = [] {
    constexpr int m = 2 * weideman_terms;
    WeidemanTable tab{};
    tab.scale = std::sqrt(weideman_terms / std::numbers::sqrt2);
    const double l = tab.scale;
    std::array<double, 2 * m> f{};
    for (int k = -m + 1; k <= m - 1; ++k) {
      const double th = k * std::numbers::pi / m;
      const double t = l * std::tan(0.5 * th);
      f[static_cast<std::size_t>(k + m)] = std::exp(-t * t) * (l * l + t * t);
    }
    for (int n = 1; n <= weideman_terms; ++n) {
      double acc = 0.0;
      for (int k = -m + 1; k <= m - 1; ++k) {
        acc += f[static_cast<std::size_t>(k + m)] *
               std::cos(n * k * std::numbers::pi / m);
      }
      tab.coeff[static_cast<std::size_t>(n - 1)] = acc / (2.0 * m);
    }
    return tab;
  }();
  return table;
}

// Laplace continued fraction, accurate for |z| large with Im z >= 0.
inline cplx faddeeva_continued_fraction(cplx z) {
  constexpr int depth = 60;
  cplx r = z;
  for (int n = depth; n >= 1; --n) {
    r = z - (0.5 * n) / r;
  }
  return cplx(0.0, std::numbers::inv_sqrtpi) / r;
}

inline cplx faddeeva_upper(cplx z) {
  if (std::abs(z) > 10.0) return faddeeva_continued_fraction(z);
  const auto& tab = weideman_table();
  const cplx iz(-z.imag(), z.real());
  const cplx den = tab.scale - iz;
  const cplx big_z = (tab.scale + iz) / den;
  cplx p = 0.0;
  for (int n = weideman_terms - 1; n >= 0; --n) {
    p = p * big_z + tab.coeff[static_cast<std::size_t>(n)];
  }
  return 2.0 * p / (den * den) + std::numbers::inv_sqrtpi / den;
}

}  // namespace detail

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
///
/// Upper half plane by Weideman's 40-term rational series (continued fraction
/// for |z| > 10); the lower half plane uses w(z) = 2 exp(-z^2) - w(-z).
inline cplx faddeeva(cplx z) {
  if (z.imag() >= 0.0) return detail::faddeeva_upper(z);
  return 2.0 * std::exp(-z * z) - detail::faddeeva_upper(-z);
}

/// log w(z), stable where w itself would overflow (deep lower half plane).
inline cplx log_faddeeva(cplx z) {
  if (z.imag() >= 0.0) return std::log(detail::faddeeva_upper(z));
  const cplx e = -z * z;
  const cplx wm = detail::faddeeva_upper(-z);
  // w(z) = exp(e) (2 - exp(-e) w(-z))
  if (e.real() > 0.0) return e + std::log(2.0 - std::exp(-e) * wm);
  return std::log(2.0 * std::exp(e) - wm);
}

/// Scaled complementary error function exp(x^2) erfc(x).
inline double erfcx(double x) {
  if (x < 0.0) {
    if (x < -26.0) return HUGE_VAL;
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x < 0.5) return std::exp(x * x) * std::erfc(x);
  return detail::faddeeva_upper(cplx(0.0, x)).real();
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
}

inline double log_norm_pdf(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi); }

/// log Phi(x) without underflow in the far left tail.
inline double log_norm_cdf(double x) {
  if (x > -5.0) return std::log(norm_cdf(x));
  const double y = -x / std::numbers::sqrt2;
  return -y * y + std::log(0.5 * erfcx(y));
}

/// log(1 + w) accurate for small |w| (Kahan's correction).
inline cplx log1p(cplx w) {
  const cplx u = 1.0 + w;
  if (u == 1.0) return w;
  return std::log(u) * (w / (u - 1.0));
}

/// (exp(w) - 1) / w, continuous at w = 0.
inline cplx expm1_ratio(cplx w) {
  if (std::abs(w) < 1e-4) return 1.0 + w * (0.5 + w * (1.0 / 6.0 + w / 24.0));
  return (std::exp(w) - 1.0) / w;
}

}  // namespace mdheston

#endif  // MDHESTON_SPECIAL_FUNCTIONS_HPP
