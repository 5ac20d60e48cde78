#ifndef MDHESTON_HESTON_HPP
#define MDHESTON_HESTON_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "mdheston/laws.hpp"
#include "mdheston/roots.hpp"
#include "mdheston/special_functions.hpp"

namespace mdheston {

/// Heston dynamics: dV = kappa (theta - V) dt + xi sqrt(V) dW1,
/// dX = -V/2 dt + sqrt(V) (rho dW1 + rho_bar dW2).
class HestonParams {
 public:
  HestonParams(double kappa, double theta, double xi, double rho)
      : kappa_(kappa), theta_(theta), xi_(xi), rho_(rho) {
    if (!(std::isfinite(kappa) && kappa > 0.0)) throw std::invalid_argument("HestonParams: kappa must be positive");
    if (!(std::isfinite(theta) && theta > 0.0)) throw std::invalid_argument("HestonParams: theta must be positive");
    if (!(std::isfinite(xi) && xi > 0.0)) throw std::invalid_argument("HestonParams: xi must be positive");
    if (!(std::isfinite(rho) && std::abs(rho) <= 1.0)) throw std::invalid_argument("HestonParams: |rho| must be <= 1");
    rho_bar_ = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  }

  double kappa() const { return kappa_; }
  double theta() const { return theta_; }
  double xi() const { return xi_; }
  double rho() const { return rho_; }
  double rho_bar() const { return rho_bar_; }

 private:
  double kappa_, theta_, xi_, rho_, rho_bar_;
};

/// C(t, u) and D(t, u) of the Heston MGF M(t, u) = exp(C + D v0).
struct MgfComponents {
  cplx c_value{};
  cplx d_value{};
  bool defined = false;
};

/// Components together with their u-derivatives.
struct MgfComponentsWithDerivative : MgfComponents {
  cplx dc{};
  cplx dd{};
};

/// Moment explosion time of E exp(u X_t) for real u (inf when moments never explode).
inline double explosion_time(const HestonParams& p, double u) {
  const double xi = p.xi();
  const double b = p.kappa() - p.rho() * xi * u;
  const double d2 = b * b + xi * xi * u * (1.0 - u);
  if (d2 >= 0.0) {
    if (u >= 0.0 && u <= 1.0) return inf;
    if (b >= 0.0) return inf;
    const double d = std::sqrt(d2);
    const double nb = -b;
    if (d < 1e-6 * nb) return 2.0 / nb * (1.0 + d2 / (3.0 * nb * nb));
    return std::log((nb + d) / (nb - d)) / d;
  }
  const double gamma = std::sqrt(-d2);
  return 2.0 * (std::numbers::pi - std::atan2(gamma, b)) / gamma;
}

namespace detail {

inline void check_time(double t) {
  if (!(std::isfinite(t) && t > 0.0)) throw std::invalid_argument("maturity t must be finite and positive");
}

inline void check_arg(cplx u) {
  if (!(std::isfinite(u.real()) && std::isfinite(u.imag()))) throw std::invalid_argument("argument must be finite");
}

struct RiccatiPieces {
  cplx b, d, num, den, g, e, one_minus_e, q;
};

inline RiccatiPieces riccati_pieces(const HestonParams& p, double t, cplx u) {
  const double xi = p.xi();
  RiccatiPieces r;
  r.b = p.kappa() - p.rho() * xi * u;
  const cplx prod = xi * xi * u * (1.0 - u);
  r.d = std::sqrt(r.b * r.b + prod);
  if (r.d.real() < 0.0) r.d = -r.d;
  r.den = r.b + r.d;
  if (std::abs(r.den) == 0.0) {
    // b = -d: the formulas are even in d, so take the other root.
    r.d = -r.d;
    r.den = r.b + r.d;
  }
  // b - d = -xi^2 u (1 - u) / (b + d) avoids cancellation when |b + d| >= |b - d|.
  r.num = std::abs(r.den) >= std::abs(r.b - r.d) ? -prod / r.den : r.b - r.d;
  r.g = r.num / r.den;
  r.e = std::exp(-r.d * t);
  r.one_minus_e = r.d * t * expm1_ratio(-r.d * t);
  r.q = 1.0 - r.g * r.e;
  return r;
}

inline constexpr double pole_tolerance = 1e-12;

}  // namespace detail

/// C(t, u), D(t, u) in the g-form with Re d >= 0.
///
/// `defined` is false when Re u lies outside the real moment domain at t
/// (the closed-form explosion time is <= t) or the denominator 1 - g e^{-dt}
/// vanishes to within 1e-12.
inline MgfComponents mgf_components(const HestonParams& p, double t, cplx u) {
  detail::check_time(t);
  detail::check_arg(u);
  MgfComponents out;
  if (!(explosion_time(p, u.real()) > t)) return out;
  const auto r = detail::riccati_pieces(p, t, u);
  if (std::abs(r.q) < detail::pole_tolerance) return out;
  const double xi2 = p.xi() * p.xi();
  out.d_value = r.num / xi2 * r.one_minus_e / r.q;
  out.c_value = p.kappa() * p.theta() / xi2 * (r.num * t - 2.0 * log1p(r.g * r.one_minus_e / (1.0 - r.g)));
  out.defined = std::isfinite(out.c_value.real()) && std::isfinite(out.d_value.real());
  return out;
}

/// mgf_components plus analytic dC/du and dD/du.
inline MgfComponentsWithDerivative mgf_components_with_derivative(const HestonParams& p, double t, cplx u) {
  detail::check_time(t);
  detail::check_arg(u);
  MgfComponentsWithDerivative out;
  if (!(explosion_time(p, u.real()) > t)) return out;
  const auto r = detail::riccati_pieces(p, t, u);
  if (std::abs(r.q) < detail::pole_tolerance) return out;
  const double xi = p.xi();
  const double xi2 = xi * xi;
  const double db = -p.rho() * xi;
  const cplx dd = (r.b * db + 0.5 * xi2 * (1.0 - 2.0 * u)) / r.d;
  const cplx dnum = db - dd;
  const cplx dden = db + dd;
  const cplx dg = (dnum * r.den - r.num * dden) / (r.den * r.den);
  const cplx de = -t * dd * r.e;
  const cplx dq = -(dg * r.e + r.g * de);
  out.d_value = r.num / xi2 * r.one_minus_e / r.q;
  out.c_value = p.kappa() * p.theta() / xi2 * (r.num * t - 2.0 * log1p(r.g * r.one_minus_e / (1.0 - r.g)));
  out.dd = (dnum * r.one_minus_e / r.q - r.num * de / r.q - r.num * r.one_minus_e * dq / (r.q * r.q)) / xi2;
  out.dc = p.kappa() * p.theta() / xi2 * (dnum * t - 2.0 * dq / r.q - 2.0 * dg / (1.0 - r.g));
  out.defined = std::isfinite(out.c_value.real()) && std::isfinite(out.d_value.real());
  return out;
}

/// log E exp(u X_t) = C(t, u) + log M_V(D(t, u)) under the randomised model.
/// nullopt when (t, u) is outside the Heston domain or D leaves the law's MGF domain.
inline std::optional<cplx> randomised_log_mgf(const HestonParams& p, const RandomisationLaw& law, double t,
                                              cplx u) {
  const auto comp = mgf_components(p, t, u);
  if (!comp.defined) return std::nullopt;
  const auto lm = law_log_mgf(law, comp.d_value);
  if (!lm) return std::nullopt;
  return comp.c_value + *lm;
}

/// E exp(u X_t) = exp(C(t, u)) M_V(D(t, u)).
inline std::optional<cplx> randomised_mgf(const HestonParams& p, const RandomisationLaw& law, double t, cplx u) {
  const auto lm = randomised_log_mgf(p, law, t, u);
  if (!lm) return std::nullopt;
  return std::exp(*lm);
}

/// Moment bounds of the standard Heston model at maturity t.
struct RealMgfDomain {
  double lower;  // -inf when no explosion below -cap
  double upper;  // +inf when no explosion below cap
};

namespace detail {

inline double domain_edge(const HestonParams& p, double t, double direction, double cap) {
  const double start = direction > 0.0 ? 1.0 : 0.0;
  double inside = start;
  double step = 1.0;
  double outside = start + direction * step;
  while (explosion_time(p, outside) > t) {
    inside = outside;
    step *= 2.0;
    outside = start + direction * step;
    if (std::abs(outside) > cap) return direction * inf;
  }
  auto gap = [&](double u) { return explosion_time(p, u) > t ? -1.0 : 1.0; };
  // Bisection on the first pole: inside has finite moments, outside does not.
  double lo = inside, hi = outside;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (gap(mid) < 0.0) lo = mid;
    else hi = mid;
    if (std::abs(hi - lo) <= 1e-15 * std::abs(lo)) break;
  }
  return lo;
}

}  // namespace detail

/// sup{u real : M(t, u) finite}; +inf when no pole lies below `cap`.
inline double real_mgf_domain_upper(const HestonParams& p, double t, double cap = 1e12) {
  detail::check_time(t);
  return detail::domain_edge(p, t, 1.0, cap);
}

inline double real_mgf_domain_lower(const HestonParams& p, double t, double cap = 1e12) {
  detail::check_time(t);
  return detail::domain_edge(p, t, -1.0, cap);
}

inline RealMgfDomain real_mgf_domain(const HestonParams& p, double t, double cap = 1e12) {
  return {real_mgf_domain_lower(p, t, cap), real_mgf_domain_upper(p, t, cap)};
}

// ---------------------------------------------------------------------------
// Small-time limit of the rescaled cgf

namespace detail {

// z cot z and its first two derivatives; Taylor series near the origin.
struct ZCot {
  double value, d1, d2;
};

inline ZCot zcot(double z) {
  if (std::abs(z) < 0.5) {
    // z cot z = sum c_n z^(2n)
    constexpr double c[] = {1.0,
                            -1.0 / 3.0,
                            -1.0 / 45.0,
                            -2.0 / 945.0,
                            -1.0 / 4725.0,
                            -2.0 / 93555.0,
                            -1382.0 / 638512875.0,
                            -4.0 / 18243225.0,
                            -3617.0 / 162820783125.0};
    const double z2 = z * z;
    ZCot r{0.0, 0.0, 0.0};
    double pw = 1.0;  // z^(2n - 2)
    for (int n = 0; n < 9; ++n) {
      if (n == 0) {
        r.value += c[0];
        continue;
      }
      r.d2 += 2.0 * n * (2.0 * n - 1.0) * c[n] * pw;
      r.d1 += 2.0 * n * c[n] * pw * z;
      pw *= z2;
      r.value += c[n] * pw;
    }
    return r;
  }
  const double s = std::sin(z);
  const double ct = std::cos(z) / s;
  const double csc2 = 1.0 / (s * s);
  return {z * ct, ct - z * csc2, 2.0 * csc2 * (z * ct - 1.0)};
}

}  // namespace detail

/// Lambda(u) = u / (xi (rho_bar cot(xi rho_bar u / 2) - rho)) on (u_minus, u_plus),
/// evaluated as u^2 / (2 z cot z - rho xi u) with z = xi rho_bar u / 2 so that
/// u = 0 and rho_bar = 0 are covered by continuity.
class LimitCgf {
 public:
  explicit LimitCgf(const HestonParams& p) : xi_(p.xi()), rho_(p.rho()), rho_bar_(p.rho_bar()) {
    constexpr double pi = std::numbers::pi;
    if (rho_bar_ == 0.0) {
      // cot z ~ 1/z: Lambda(u) = u^2 / (2 - rho xi u).
      u_minus_ = rho_ > 0.0 ? -inf : -2.0 / xi_;
      u_plus_ = rho_ > 0.0 ? 2.0 / xi_ : inf;
    } else if (rho_ < 0.0) {
      const double a = std::atan(rho_bar_ / rho_);
      u_minus_ = 2.0 / (xi_ * rho_bar_) * a;
      u_plus_ = 2.0 / (xi_ * rho_bar_) * (a + pi);
    } else if (rho_ == 0.0) {
      u_minus_ = -pi / xi_;
      u_plus_ = pi / xi_;
    } else {
      const double a = std::atan(rho_bar_ / rho_);
      u_minus_ = 2.0 / (xi_ * rho_bar_) * (a - pi);
      u_plus_ = 2.0 / (xi_ * rho_bar_) * a;
    }
  }

  double u_minus() const { return u_minus_; }
  double u_plus() const { return u_plus_; }
  bool contains(double u) const { return u > u_minus_ && u < u_plus_; }

  double operator()(double u) const {
    if (!contains(u)) return inf;
    return u * u / denom(u).value;
  }

  double derivative(double u) const {
    if (!contains(u)) return u > 0.0 ? inf : -inf;
    const auto q = denom(u);
    return 2.0 * u / q.value - u * u * q.d1 / (q.value * q.value);
  }

  double second_derivative(double u) const {
    if (!contains(u)) return inf;
    const auto q = denom(u);
    const double q2 = q.value * q.value;
    return 2.0 / q.value - 4.0 * u * q.d1 / q2 - u * u * q.d2 / q2 + 2.0 * u * u * q.d1 * q.d1 / (q2 * q.value);
  }

 private:
  // Q(u) = 2 z cot z - rho xi u and its derivatives in u.
  detail::ZCot denom(double u) const {
    const double w = 0.5 * xi_ * rho_bar_;
    const auto zc = detail::zcot(w * u);
    return {2.0 * zc.value - rho_ * xi_ * u, 2.0 * w * zc.d1 - rho_ * xi_, 2.0 * w * w * zc.d2};
  }

  double xi_, rho_, rho_bar_;
  double u_minus_, u_plus_;
};

inline LimitCgf limit_cgf(const HestonParams& p) { return LimitCgf(p); }

// ---------------------------------------------------------------------------
// Small-time approximations of C and D under rescaling u -> u / h(t)

enum class RescalingScale {
  sub_ldp,  // h(t) = o(t): undefined
  ldp,      // h(t) = t
  mdp,      // t = o(h(t))
};

struct CdApproximation {
  double d_value = 0.0;
  /// Leading C; empty at LDP scale where only C = O(1) is known.
  std::optional<double> c_value;
  /// Size of the claimed error term for D: absolute at LDP scale, relative at MDP scale.
  double d_error_order = 0.0;
  bool d_error_relative = false;
  /// Size of the claimed error for C (absolute).
  double c_error_order = 0.0;
};

/// Leading-order C(t, u/h) and D(t, u/h) for small t. At LDP scale h = t is
/// used and `h` is ignored; at MDP scale `h` is the value h(t) with t = o(h).
inline CdApproximation cd_asymptotic(const HestonParams& p, double t, double u, RescalingScale scale,
                                     double h = std::numeric_limits<double>::quiet_NaN()) {
  detail::check_time(t);
  CdApproximation out;
  if (scale == RescalingScale::sub_ldp) {
    if (u == 0.0) return out;
    throw std::invalid_argument("cd_asymptotic: undefined for h(t) = o(t)");
  }
  if (scale == RescalingScale::ldp) {
    const LimitCgf lambda(p);
    if (!lambda.contains(u)) throw std::domain_error("cd_asymptotic: u outside (u_minus, u_plus)");
    out.d_value = lambda(u) / t;
    out.d_error_order = 1.0;
    out.c_error_order = 1.0;
    return out;
  }
  if (!(std::isfinite(h) && h > 0.0)) throw std::invalid_argument("cd_asymptotic: MDP scale needs h(t) > 0");
  const double r = t / h;
  out.d_value = 0.5 * u * u * t / (h * h) - 0.5 * u * r + 0.25 * p.rho() * p.xi() * u * u * u * r * r / h;
  out.c_value = 0.25 * p.kappa() * p.theta() * u * u * r * r;
  out.d_error_relative = true;
  out.d_error_order = t + h * h + r * r;
  out.c_error_order = t * h + h * h * h + std::abs(*out.c_value) * (h + r);
  return out;
}

}  // namespace mdheston

#endif  // MDHESTON_HESTON_HPP
