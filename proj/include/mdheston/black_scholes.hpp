#ifndef MDHESTON_BLACK_SCHOLES_HPP
#define MDHESTON_BLACK_SCHOLES_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mdheston/quadrature.hpp"
#include "mdheston/roots.hpp"
#include "mdheston/special_functions.hpp"

namespace mdheston {

// Black-Scholes with unit forward, log-strike k and total variance w = sigma^2 t.

namespace detail {

// log of the out-of-the-money call price for k > 0, w > 0.
//
// Closed form c = Phi(d1) - e^k Phi(d2) written with erfcx; when the two terms
// nearly cancel (small w relative to k) the price comes from
// c = int_k^inf e^y P(X > y) dy, whose integrand is positive.
inline double bs_log_otm_call(double w, double k) {
  const double s = std::sqrt(w);
  const double h = k / s;
  const double a = (h - 0.5 * s) / std::numbers::sqrt2;
  const double b = (h + 0.5 * s) / std::numbers::sqrt2;
  const double ea = erfcx(a);
  const double eb = erfcx(b);
  const double lead = -0.5 * (h - 0.5 * s) * (h - 0.5 * s) + std::log(0.5);
  if (ea - eb > 1e-3 * ea) return lead + std::log(ea - eb);
  auto log_integrand = [&](double y) { return y + log_norm_cdf(-(y + 0.5 * w) / s); };
  const double base = log_integrand(k);
  // Decay rate of the integrand at y = k sets the panel width.
  const double z = (k + 0.5 * w) / s;
  const double mills = std::exp(log_norm_pdf(z) - log_norm_cdf(-z));
  const double rate = std::max(mills / s - 1.0, 1e-300);
  QuadratureOptions opt{1e-300, 1e-13, 2000};
  HalfLineOptions hopt{opt, 1e-20, 200};
  const auto r = integrate_half_line([&](double y) { return std::exp(log_integrand(y) - base); }, k, 1.0 / rate, hopt);
  return base + std::log(r.value);
}

}  // namespace detail

/// log of the out-of-the-money option price: call for k >= 0, put for k < 0.
inline double bs_log_otm_price(double total_var, double k) {
  if (!(total_var >= 0.0) || !std::isfinite(total_var) || !std::isfinite(k)) {
    throw std::invalid_argument("bs_log_otm_price: need finite total variance >= 0 and finite k");
  }
  if (total_var == 0.0) return k == 0.0 ? std::log(0.0) : -std::numeric_limits<double>::infinity();
  // put(k) = e^k call(-k)
  if (k < 0.0) return k + detail::bs_log_otm_call(total_var, -k);
  if (k == 0.0) return std::log(std::erf(0.5 * std::sqrt(total_var) / std::numbers::sqrt2));
  return detail::bs_log_otm_call(total_var, k);
}

/// Undiscounted call price E (e^X - e^k)^+ with X ~ N(-w/2, w).
inline double bs_price(double total_var, double k) {
  const double otm = std::exp(bs_log_otm_price(total_var, k));
  if (k >= 0.0) return otm;
  return -std::expm1(k) + otm;
}

/// Total variance matching an out-of-the-money price (call for k >= 0, put for k < 0),
/// by safeguarded Newton on the log price; converges to 1e-12 relative in total variance.
inline double implied_total_variance_otm(double otm_price, double k) {
  if (!std::isfinite(k)) throw std::invalid_argument("implied vol: k must be finite");
  const double cap = k >= 0.0 ? 1.0 : std::exp(k);
  if (!(otm_price >= 0.0) || !(otm_price < cap)) throw std::domain_error("implied vol: price outside the no-arbitrage band");
  if (otm_price == 0.0) return 0.0;
  const double target = std::log(otm_price);
  auto fdf = [&](double w) {
    if (w <= 0.0) return std::pair{-inf, inf};
    const double s = std::sqrt(w);
    const double kk = std::abs(k);
    const double d1 = -kk / s + 0.5 * s;
    const double logc = bs_log_otm_price(w, k) - (k < 0.0 ? k : 0.0);
    // d log c / dw = phi(d1) / (2 s c) for the call at |k|.
    const double dlog = std::exp(log_norm_pdf(d1) - logc) / (2.0 * s);
    return std::pair{bs_log_otm_price(w, k) - target, dlog};
  };
  double hi = 1.0;
  while (fdf(hi).first < 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw std::domain_error("implied vol: price too close to the upper bound");
  }
  // Initial guess from the leading small-variance behaviour log c ~ -k^2 / (2 w).
  double guess = k == 0.0 ? 0.5 * hi : std::min(0.5 * hi, 0.5 * k * k / std::max(-target, 1.0));
  const auto r = safeguarded_newton(fdf, 0.0, hi, guess, 1e-14, 1e-17, 400);
  return r.root;
}

/// Black-Scholes implied volatility sqrt(w / t) of a call price.
inline double implied_vol(double price, double k, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("implied_vol: t must be positive");
  const double intrinsic = k < 0.0 ? -std::expm1(k) : 0.0;
  if (!(price >= intrinsic) || !(price < 1.0)) throw std::domain_error("implied_vol: price outside the no-arbitrage band");
  const double otm = k < 0.0 ? price - intrinsic : price;
  return std::sqrt(implied_total_variance_otm(otm, k) / t);
}

}  // namespace mdheston

#endif  // MDHESTON_BLACK_SCHOLES_HPP
