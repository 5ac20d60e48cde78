#ifndef MDHESTON_FOURIER_HPP
#define MDHESTON_FOURIER_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "mdheston/heston.hpp"
#include "mdheston/laws.hpp"
#include "mdheston/quadrature.hpp"
#include "mdheston/roots.hpp"

namespace mdheston {

/// Result of an oracle computation. `error` is a standard error (Monte Carlo) or
/// a quadrature error bound; `log_value` is log(value) computed without underflow.
struct OracleEstimate {
  double value = 0.0;
  double error = 0.0;
  std::string method;
  double log_value = -inf;
  double shift = 0.0;  // contour abscissa for Fourier estimates
};

enum class ShiftRule {
  saddle,         // minimise the integrand modulus along the real axis
  quarter_domain  // a = 1 + (upper - 1) / 4, capped
};

struct ContourOptions {
  ShiftRule rule = ShiftRule::saddle;
  /// Fixed abscissa overriding `rule`; for the tail probability 0 selects the Gil-Pelaez form.
  std::optional<double> shift;
  double rel_tol = 1e-10;
  double truncation = 1e-14;
  /// Upper limit for contour searches when the moment domain is unbounded.
  double shift_cap = 1e4;
};

/// Open real interval on which the randomised MGF is finite at maturity t.
struct RealInterval {
  double lower;
  double upper;
};

inline RealInterval randomised_real_domain(const HestonParams& p, const RandomisationLaw& law, double t) {
  const auto heston = real_mgf_domain(p, t);
  RealInterval out{heston.lower, heston.upper};
  const double m = law.mgf_bound();
  if (!std::isfinite(m)) return out;
  // D(t, .) increases away from [0, 1] on either side; cut where it reaches m.
  auto d_minus_m = [&](double a) { return mgf_components(p, t, a).d_value.real() - m; };
  auto cut = [&](double start, double edge, double direction) {
    double far = std::isfinite(edge) ? edge - direction * 1e-12 * std::max(1.0, std::abs(edge)) : start;
    if (!std::isfinite(edge)) {
      far = start + direction;
      while (d_minus_m(far) < 0.0) {
        far = start + 2.0 * (far - start);
        if (std::abs(far) > 1e12) return edge;
      }
    }
    if (!mgf_components(p, t, far).defined || d_minus_m(far) < 0.0) return edge;
    return bisect(d_minus_m, start, far, 1e-15).root;
  };
  out.upper = cut(1.0, heston.upper, 1.0);
  out.lower = cut(0.0, heston.lower, -1.0);
  return out;
}

namespace detail {

inline double real_log_mgf(const HestonParams& p, const RandomisationLaw& law, double t, double a) {
  const auto lm = randomised_log_mgf(p, law, t, a);
  return lm ? lm->real() : inf;
}

// Contour integral (1/pi) int_0^inf Re[ M(a + iu) e^{-(a+iu) k} / den(a + iu) ] du
// normalised by its value at u = 0; returns log|prefactor| and the normalised integral.
struct ContourIntegral {
  double log_prefactor;  // log(M(a) e^{-ak} / |den(a)|)
  double sign;           // sign of den(a)
  double integral;       // (1/pi) int Re psi
  double error;
  bool converged;
};

template <typename Den>
ContourIntegral contour_integral(const HestonParams& p, const RandomisationLaw& law, double t, double k, double a,
                                 RealInterval dom, Den den, const ContourOptions& opt) {
  const double lm0 = real_log_mgf(p, law, t, a);
  if (!std::isfinite(lm0)) throw std::domain_error("contour shift outside the moment domain");
  // Width of the integrand around u = 0 from the curvature of log M at a.
  const double room = std::min(a - dom.lower, dom.upper - a);
  const double h = std::min(1e-3 * std::max(1.0, std::abs(a)), 0.25 * room);
  const double curv = (real_log_mgf(p, law, t, a + h) - 2.0 * lm0 + real_log_mgf(p, law, t, a - h)) / (h * h);
  const double scale = 1.0 / std::sqrt(std::max(curv, 1e-12));
  const cplx den0 = den(cplx(a, 0.0));
  auto psi = [&](double u) {
    const cplx z(a, u);
    const auto lm = randomised_log_mgf(p, law, t, z);
    if (!lm) throw std::domain_error("contour leaves the moment domain");
    return (std::exp(*lm - lm0 - cplx(0.0, u * k)) * den0 / den(z)).real();
  };
  QuadratureOptions inner{1e-15 * scale, opt.rel_tol, 4000};
  HalfLineOptions hopt{inner, opt.truncation, 200};
  const auto r = integrate_half_line(psi, 0.0, scale, hopt);
  return {lm0 - a * k - std::log(std::abs(den0.real())), den0.real() > 0.0 ? 1.0 : -1.0,
          r.value / std::numbers::pi, r.error / std::numbers::pi, r.converged};
}

template <typename Obj>
double saddle_shift(Obj obj, double lo, double hi) {
  const double a = lo + 1e-10 * std::max(1.0, std::abs(lo));
  const double b = hi - 1e-10 * std::max(1.0, std::abs(hi));
  return golden_minimize(obj, a, b, 1e-9).argmin;
}

}  // namespace detail

/// Price of the out-of-the-money option with log-strike k under unit forward:
/// the call E (e^X - e^k)^+ for k >= 0 and the put E (e^k - e^X)^+ for k < 0.
///
/// Contour integration of the randomised MGF along Re z = a with a > 1 (call) or
/// a < 0 (put); by default a minimises the integrand modulus on the real axis so
/// that the integral is O(1) relative to the price even for tiny prices.
inline OracleEstimate fourier_otm_price(const HestonParams& p, const RandomisationLaw& law, double t, double k,
                                        const ContourOptions& opt = {}) {
  if (!(t > 0.0) || !std::isfinite(t) || !std::isfinite(k)) throw std::invalid_argument("fourier: need t > 0 and finite k");
  const auto dom = randomised_real_domain(p, law, t);
  const bool call = k >= 0.0;
  const double lo = call ? 1.0 : std::max(dom.lower, -opt.shift_cap);
  const double hi = call ? std::min(dom.upper, 1.0 + opt.shift_cap) : 0.0;
  if (!(hi > lo)) throw std::domain_error("fourier: no admissible contour");
  auto den = [](cplx z) { return z * (z - 1.0); };
  double a;
  if (opt.shift) {
    a = *opt.shift;
    if (!(a > lo && a < hi)) throw std::domain_error("fourier: contour shift outside the admissible strip");
  } else if (opt.rule == ShiftRule::quarter_domain) {
    a = call ? 1.0 + 0.25 * (hi - 1.0) : 0.25 * lo;
  } else {
    auto obj = [&](double x) { return detail::real_log_mgf(p, law, t, x) - x * k - std::log(x * (x - 1.0)); };
    a = detail::saddle_shift(obj, lo, hi);
  }
  const auto ci = detail::contour_integral(p, law, t, k, a, dom, den, opt);
  if (!ci.converged) throw std::runtime_error("fourier: integrand does not decay");
  if (!(ci.integral > 0.0)) throw std::runtime_error("fourier: non-positive contour integral");
  OracleEstimate out;
  out.method = call ? "fourier-contour-call" : "fourier-contour-put";
  out.shift = a;
  out.log_value = k + ci.log_prefactor + std::log(ci.integral);
  out.value = std::exp(out.log_value);
  out.error = std::exp(k + ci.log_prefactor) * ci.error;
  return out;
}

/// Undiscounted call price E (e^{X_t} - e^k)^+ from the out-of-the-money price and parity.
inline OracleEstimate fourier_call(const HestonParams& p, const RandomisationLaw& law, double t, double k,
                                   const ContourOptions& opt = {}) {
  if (opt.shift && ((*opt.shift > 1.0) != (k >= 0.0))) {
    // Explicit contour on the in-the-money side: a > 1 gives the call, a < 0 the put.
    const auto dom = randomised_real_domain(p, law, t);
    const double a = *opt.shift;
    if (!(a > dom.lower && a < dom.upper) || (a >= 0.0 && a <= 1.0)) {
      throw std::domain_error("fourier: contour shift outside the admissible strip");
    }
    auto den = [](cplx z) { return z * (z - 1.0); };
    const auto ci = detail::contour_integral(p, law, t, k, a, dom, den, opt);
    if (!ci.converged) throw std::runtime_error("fourier: integrand does not decay");
    OracleEstimate out;
    out.shift = a;
    out.value = std::exp(k + ci.log_prefactor) * ci.integral;
    out.error = std::exp(k + ci.log_prefactor) * ci.error;
    if (a > 1.0) {
      out.method = "fourier-contour-call";
    } else {
      out.method = "fourier-contour-put+parity";
      out.value -= std::expm1(k);
    }
    out.log_value = std::log(out.value);
    return out;
  }
  auto otm = fourier_otm_price(p, law, t, k, opt);
  if (k >= 0.0) return otm;
  otm.value += -std::expm1(k);
  otm.log_value = std::log(otm.value);
  otm.method += "+parity";
  return otm;
}

/// P(X_t >= threshold).
///
/// With the default saddle rule the contour Re z = a lies at a > 0 when the
/// threshold is above the mean (the integral is the upper tail) and at a < 0
/// otherwise (it is minus the lower tail), so small probabilities keep full
/// relative accuracy. `shift = 0` selects the Gil-Pelaez form
/// 1/2 + (1/pi) int_0^inf Im[e^{-iuk} phi(u)] / u du.
inline OracleEstimate tail_probability(const HestonParams& p, const RandomisationLaw& law, double t, double threshold,
                                       const ContourOptions& opt = {}) {
  if (!(t > 0.0) || !std::isfinite(t) || !std::isfinite(threshold)) {
    throw std::invalid_argument("tail_probability: need t > 0 and finite threshold");
  }
  const double k = threshold;
  const auto dom = randomised_real_domain(p, law, t);
  OracleEstimate out;
  if (opt.shift && *opt.shift == 0.0) {
    const double h = 1e-3;
    const double curv =
        (detail::real_log_mgf(p, law, t, h) + detail::real_log_mgf(p, law, t, -h)) / (h * h);
    const double scale = 1.0 / std::sqrt(std::max(curv, 1e-12));
    auto f = [&](double u) {
      const auto lm = randomised_log_mgf(p, law, t, cplx(0.0, u));
      return (std::exp(*lm - cplx(0.0, u * k))).imag() / u;
    };
    QuadratureOptions inner{1e-15, opt.rel_tol, 4000};
    HalfLineOptions hopt{inner, opt.truncation, 200};
    const auto r = integrate_half_line(f, 0.0, scale, hopt);
    out.method = "gil-pelaez";
    out.value = 0.5 + r.value / std::numbers::pi;
    out.error = r.error / std::numbers::pi + (r.converged ? 0.0 : 1e-3);
    out.log_value = std::log(out.value);
    return out;
  }
  auto den = [](cplx z) { return z; };
  auto obj_for = [&](double x) { return detail::real_log_mgf(p, law, t, x) - x * k - std::log(std::abs(x)); };
  double a;
  if (opt.shift) {
    a = *opt.shift;
    if (!(a > dom.lower && a < dom.upper)) throw std::domain_error("tail_probability: shift outside the strip");
  } else {
    // The sign of d/da log M(a) - k at a = 0 tells which tail is small.
    const double h = 1e-6;
    const double mean = (detail::real_log_mgf(p, law, t, h) - detail::real_log_mgf(p, law, t, -h)) / (2.0 * h);
    if (k >= mean) {
      a = detail::saddle_shift(obj_for, 0.0, std::min(dom.upper, opt.shift_cap));
    } else {
      a = detail::saddle_shift(obj_for, std::max(dom.lower, -opt.shift_cap), 0.0);
    }
  }
  const auto ci = detail::contour_integral(p, law, t, k, a, dom, den, opt);
  if (!ci.converged) throw std::runtime_error("tail_probability: integrand does not decay");
  const double scale = std::exp(ci.log_prefactor);
  out.shift = a;
  out.error = scale * ci.error;
  if (a > 0.0) {
    out.method = "contour-upper-tail";
    out.log_value = ci.log_prefactor + std::log(ci.integral);
    out.value = std::exp(out.log_value);
  } else {
    out.method = "contour-lower-tail";
    const double lower = scale * ci.integral;
    out.value = 1.0 - lower;
    out.log_value = std::log1p(-lower);
  }
  return out;
}

}  // namespace mdheston

#endif  // MDHESTON_FOURIER_HPP
