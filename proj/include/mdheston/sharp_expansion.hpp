#ifndef MDHESTON_SHARP_EXPANSION_HPP
#define MDHESTON_SHARP_EXPANSION_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "mdheston/fourier.hpp"
#include "mdheston/heston.hpp"
#include "mdheston/laws.hpp"
#include "mdheston/roots.hpp"

namespace mdheston {

/// Strike rescaling g with g(t) -> 0 and sqrt(t) = o(g(t)); h(t) = sqrt(t) / g(t).
class RescalingG {
 public:
  /// g(t) = t^beta with beta in (0, 1/2).
  static RescalingG power(double beta) {
    if (!(beta > 0.0 && beta < 0.5)) throw std::invalid_argument("RescalingG: beta must lie in (0, 1/2)");
    RescalingG r([beta](double t) { return std::pow(t, beta); });
    r.beta_ = beta;
    return r;
  }

  explicit RescalingG(std::function<double(double)> g) : g_(std::move(g)) {
    if (!g_) throw std::invalid_argument("RescalingG: empty function");
  }

  RescalingG() : RescalingG(power(0.25)) {}

  double g(double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("RescalingG: t must be positive");
    const double v = g_(t);
    if (!(v > 0.0 && std::isfinite(v))) throw std::domain_error("RescalingG: g(t) must be finite and positive");
    return v;
  }
  double h(double t) const { return std::sqrt(t) / g(t); }
  /// Exponent when g is a power, NaN otherwise.
  double beta() const { return beta_; }

 private:
  std::function<double(double)> g_;
  double beta_ = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline TailRegime require_fat_omega1(const RandomisationLaw& law, const char* who) {
  const auto r = classify_tail(law);
  if (r.kind != TailKind::fat_tail || r.omega != 1) {
    throw std::invalid_argument(std::string(who) + ": fat-tail law with omega = 1 required");
  }
  return r;
}

// d/dz log E exp(z X_t) = C'(z) + D'(z) M_V'/M_V(D(z)).
inline std::optional<cplx> log_mgf_derivative(const HestonParams& p, const RandomisationLaw& law, double t, cplx z) {
  const auto c = mgf_components_with_derivative(p, t, z);
  if (!c.defined) return std::nullopt;
  const auto psi = law_mgf_log_derivative(law, c.d_value);
  if (!psi) return std::nullopt;
  return c.dc + c.dd * *psi;
}

}  // namespace detail

/// Lambda^g_t(u) = h(t) log E exp(u X_t / (h(t) g(t))); nullopt past explosion.
inline std::optional<double> rescaled_cgf(const HestonParams& p, const RandomisationLaw& law, const RescalingG& g,
                                          double t, double u) {
  detail::require_fat_omega1(law, "rescaled_cgf");
  const double h = g.h(t);
  const auto lm = randomised_log_mgf(p, law, t, cplx(u / std::sqrt(t), 0.0));
  if (!lm) return std::nullopt;
  return h * lm->real();
}

/// d/du Lambda^g_t(u), from the analytic derivatives of C, D and M_V'/M_V.
inline std::optional<double> rescaled_cgf_derivative(const HestonParams& p, const RandomisationLaw& law,
                                                     const RescalingG& g, double t, double u) {
  detail::require_fat_omega1(law, "rescaled_cgf_derivative");
  const auto d = detail::log_mgf_derivative(p, law, t, cplx(u / std::sqrt(t), 0.0));
  if (!d) return std::nullopt;
  return d->real() / g.g(t);
}

enum class SaddleMethod { asymptotic, newton_exact };

struct SaddlePoint {
  double u_star = 0.0;
  SaddleMethod method = SaddleMethod::asymptotic;
  double residual = 0.0;  // d/du Lambda^g_t(u_star) - x; 0 for the asymptotic form
};

/// Solution of d/du Lambda^g_t(u) = x. The asymptotic form is sgn(x) sqrt(2m) - |gamma0| h(t) / x.
inline SaddlePoint saddle_point(const HestonParams& p, const RandomisationLaw& law, const RescalingG& g, double t,
                                double x, SaddleMethod method = SaddleMethod::newton_exact) {
  const auto r = detail::require_fat_omega1(law, "saddle_point");
  if (x == 0.0 || !std::isfinite(x)) throw std::invalid_argument("saddle_point: x must be finite and nonzero");
  SaddlePoint out;
  out.method = method;
  if (method == SaddleMethod::asymptotic) {
    out.u_star = (x > 0.0 ? 1.0 : -1.0) * std::sqrt(2.0 * r.m) - std::abs(r.gamma0) / x * g.h(t);
    return out;
  }
  const double st = std::sqrt(t);
  const double gt = g.g(t);
  const auto dom = randomised_real_domain(p, law, t);
  auto slope = [&](double u) {
    const auto d = detail::log_mgf_derivative(p, law, t, cplx(u / st, 0.0));
    if (!d) throw std::domain_error("saddle_point: derivative undefined inside the domain");
    return d->real() / gt - x;
  };
  // Second derivative by complex step on the analytic first derivative.
  auto curvature = [&](double u) {
    const double eps = 1e-20 * std::max(1.0, std::abs(u / st));
    const auto d = detail::log_mgf_derivative(p, law, t, cplx(u / st, eps));
    if (!d) return std::numeric_limits<double>::quiet_NaN();
    return d->imag() / eps / (st * gt);
  };
  auto inside = [&](double end) {
    if (!std::isfinite(end)) throw std::domain_error("saddle_point: unbounded moment domain");
    for (double eps = 1e-2; eps > 1e-15; eps *= 0.1) {
      const double u = st * end * (1.0 - eps);
      if ((x > 0.0) == (slope(u) > 0.0)) return u;
    }
    throw std::runtime_error("saddle_point: could not bracket the saddle point (t too large?)");
  };
  double lo, hi;
  if (x > 0.0) {
    lo = 0.0;
    hi = inside(dom.upper);
  } else {
    lo = inside(dom.lower);
    hi = 0.0;
  }
  const double guess = (x > 0.0 ? 1.0 : -1.0) * std::sqrt(2.0 * r.m) - std::abs(r.gamma0) / x * g.h(t);
  auto fdf = [&](double u) { return std::pair{slope(u), curvature(u)}; };
  const double tol = 1e-11 * std::max(1.0, std::abs(x));
  const auto root = safeguarded_newton(fdf, lo, hi, guess, tol, 1e-16, 400);
  out.u_star = root.root;
  out.residual = slope(root.root);
  if (!(std::abs(out.residual) <= 1e-10 * std::max(1.0, std::abs(x)))) {
    throw std::runtime_error("saddle_point: Newton and bisection did not converge (t too large?)");
  }
  return out;
}

/// Limit characteristic function of Z_t under the tilted measure:
/// omega = 1: e^{-iux} (1 - iux / |gamma0|)^gamma0; omega = 2: exp(-u^2 zeta(x)^2 / 2).
inline cplx tilted_cf_limit(const TailRegime& r, double x, double u) {
  if (r.kind != TailKind::fat_tail) throw std::invalid_argument("tilted_cf_limit: fat-tail regime required");
  if (x == 0.0 || !std::isfinite(x)) throw std::invalid_argument("tilted_cf_limit: x must be finite and nonzero");
  if (r.omega == 1) {
    const cplx base(1.0, -u * x / std::abs(r.gamma0));
    return std::exp(cplx(0.0, -u * x) + r.gamma0 * std::log(base));
  }
  const double zeta = std::numbers::sqrt2 * std::pow(2.0 * r.m / (r.gamma0 * r.gamma0), 0.125) *
                      std::pow(std::abs(x), 0.75);
  return std::exp(-0.5 * u * u * zeta * zeta);
}

/// E^{Q_t} exp(iu Z_t), Z_t = X_t / g(t) - x, as a ratio of randomised MGFs along Re = u_star.
inline cplx finite_tilted_cf(const HestonParams& p, const RandomisationLaw& law, const RescalingG& g, double t,
                             double x, double u) {
  const auto sp = saddle_point(p, law, g, t, x);
  const double st = std::sqrt(t);
  const double h = g.h(t);
  const auto base = randomised_log_mgf(p, law, t, cplx(sp.u_star / st, 0.0));
  const auto moved = randomised_log_mgf(p, law, t, cplx(sp.u_star, u * h) / st);
  if (!base || !moved) throw std::domain_error("finite_tilted_cf: tilted MGF undefined");
  return std::exp(*moved - *base - cplx(0.0, u * x));
}

/// Gamma density y^{|g0|-1} e^{-|g0/x| y} |g0/x|^{|g0|} / Gamma(|g0|) for y > 0.
inline double gamma_limit_density(double gamma0, double x, double y) {
  if (!(gamma0 < 0.0)) throw std::invalid_argument("gamma_limit_density: gamma0 must be negative");
  if (x == 0.0 || !std::isfinite(x)) throw std::invalid_argument("gamma_limit_density: x must be finite and nonzero");
  if (!(y > 0.0)) throw std::invalid_argument("gamma_limit_density: y must be positive");
  const double a = std::abs(gamma0);
  const double rate = std::abs(gamma0 / x);
  return std::exp((a - 1.0) * std::log(y) - std::lgamma(a) - rate * y + a * std::log(rate));
}

struct CallExpansion {
  double intrinsic = 0.0;
  double prefactor = 0.0;
  double exponent = 0.0;
  double full_value = 0.0;
  /// exponent + log(prefactor): log of the time value.
  double log_correction = 0.0;
  std::string claimed_error = "1+o(1)";
};

/// Small-time call price at log-strike x g(t):
/// (1 - e^{x_t})^+ + exp(-sqrt(2m/t)|x_t| + gamma1 + x_t) |x_t|^{|g0|-1} t^{1+g0/2} g(t) / (Gamma(|g0|) (2m)^{1-g0/2}).
inline CallExpansion call_expansion(const RandomisationLaw& law, const RescalingG& g, double t, double x) {
  const auto r = detail::require_fat_omega1(law, "call_expansion");
  if (x == 0.0 || !std::isfinite(x)) throw std::invalid_argument("call_expansion: x must be finite and nonzero");
  const double gt = g.g(t);
  const double xt = x * gt;
  const double a = std::abs(r.gamma0);
  CallExpansion out;
  out.intrinsic = std::max(-std::expm1(xt), 0.0);
  out.exponent = -std::sqrt(2.0 * r.m / t) * std::abs(xt) + r.gamma1 + xt;
  const double log_pref = (a - 1.0) * std::log(std::abs(xt)) - std::lgamma(a) -
                          (1.0 - 0.5 * r.gamma0) * std::log(2.0 * r.m) + (1.0 + 0.5 * r.gamma0) * std::log(t) +
                          std::log(gt);
  out.prefactor = std::exp(log_pref);
  out.log_correction = out.exponent + log_pref;
  out.full_value = out.intrinsic + std::exp(out.log_correction);
  return out;
}

/// h1 as displayed, with x_t = x g(t) inside.
inline double implied_var_h1(const TailRegime& r, double xt) {
  const double a = std::abs(r.gamma0);
  const double lg = std::lgamma(a);
  return (xt - (2.0 * r.gamma0 + 1.0) * std::log(std::abs(xt)) +
          std::log(16.0 * std::numbers::pi) + 2.0 * r.gamma1 - 2.0 * lg - (a + 0.5) * std::log(2.0 * r.m)) /
         (8.0 * r.m);
}

inline double implied_var_h2(const TailRegime& r) { return (0.5 - std::abs(r.gamma0)) / (8.0 * r.m); }

/// sigma_t^2(x_t) ~ |x_t| / (2 sqrt(2 m t)) + h1 + h2 log t + log g(t) / (4 m).
inline double implied_var_expansion(const RandomisationLaw& law, const RescalingG& g, double t, double x) {
  const auto r = detail::require_fat_omega1(law, "implied_var_expansion");
  if (x == 0.0 || !std::isfinite(x)) throw std::invalid_argument("implied_var_expansion: x must be finite and nonzero");
  const double gt = g.g(t);
  const double xt = x * gt;
  return std::abs(xt) / (2.0 * std::sqrt(2.0 * r.m * t)) + implied_var_h1(r, xt) + implied_var_h2(r) * std::log(t) +
         std::log(gt) / (4.0 * r.m);
}

}  // namespace mdheston

#endif  // MDHESTON_SHARP_EXPANSION_HPP
