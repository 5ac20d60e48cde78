#ifndef MDHESTON_MDP_RATES_HPP
#define MDHESTON_MDP_RATES_HPP

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mdheston/heston.hpp"
#include "mdheston/laws.hpp"
#include "mdheston/roots.hpp"

namespace mdheston {

/// Rate function x^2 / (2 v_plus) for a randomisation with bounded support.
inline double bounded_support_rate(double v_plus, double x) {
  if (!(v_plus > 0.0)) throw std::invalid_argument("bounded_support_rate: v_plus must be positive");
  return x * x / (2.0 * v_plus);
}

/// Fat-tail rate sqrt(2 m) |x|.
inline double fat_tail_rate(double m, double x) {
  if (!(m > 0.0 && std::isfinite(m))) throw std::invalid_argument("fat_tail_rate: m must be finite and positive");
  return std::sqrt(2.0 * m) * std::abs(x);
}

struct ThinTailConstants {
  double gamma_lo;  // l2 / (1 + l2)
  double gamma_hi;  // l2 / (l2 - 1)
  double c_lo;      // (2 l1 l2)^(1 / (1 + l2))
  double c_hi;      // (2 l1 l2)^(1 / (1 - l2))
};

inline ThinTailConstants thin_tail_constants(double l1, double l2) {
  if (!(std::isfinite(l1) && l1 > 0.0)) throw std::invalid_argument("thin_tail_constants: l1 must be positive");
  if (!(std::isfinite(l2) && l2 > 1.0)) throw std::invalid_argument("thin_tail_constants: l2 must exceed 1");
  const double k = 2.0 * l1 * l2;
  return {l2 / (1.0 + l2), l2 / (l2 - 1.0), std::pow(k, 1.0 / (1.0 + l2)), std::pow(k, 1.0 / (1.0 - l2))};
}

inline ThinTailConstants thin_tail_constants(const TailRegime& r) {
  if (r.kind != TailKind::thin_tail) throw std::invalid_argument("thin_tail_constants: thin-tail regime required");
  return thin_tail_constants(r.l1, r.l2);
}

/// c_lo / (2 gamma_lo) |x|^(2 gamma_lo), extended evenly to negative x.
inline double thin_tail_rate_lo(const ThinTailConstants& c, double x) {
  return c.c_lo / (2.0 * c.gamma_lo) * std::pow(std::abs(x), 2.0 * c.gamma_lo);
}

struct ConjugateResult {
  double value = 0.0;
  double maximiser = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// f(u) = (c_hi / gamma_hi) 2^(gamma_hi - 1) Lambda(u)^gamma_hi with f' and f''.
class BoundaryCgf {
 public:
  BoundaryCgf(const ThinTailConstants& c, const LimitCgf& lambda)
      : g_(c.gamma_hi), k_(c.c_hi * std::pow(2.0, c.gamma_hi - 1.0)), lambda_(lambda) {}

  double value(double u) const { return k_ / g_ * std::pow(lambda_(u), g_); }

  double derivative(double u) const {
    const double l = lambda_(u);
    return k_ * std::pow(l, g_ - 1.0) * lambda_.derivative(u);
  }

  double second_derivative(double u) const {
    const double l = lambda_(u);
    const double d = lambda_.derivative(u);
    return k_ * ((g_ - 1.0) * d * d * std::pow(l, g_ - 2.0) + std::pow(l, g_ - 1.0) * lambda_.second_derivative(u));
  }

  const LimitCgf& lambda() const { return lambda_; }

 private:
  double g_, k_;
  LimitCgf lambda_;
};

/// sup over (u_minus, u_plus) of u x - f(u), solving f'(u) = x by Newton kept
/// inside a bracket (u_minus + eps, u_plus - eps) whose eps shrinks from 1e-2.
inline ConjugateResult thin_tail_rate_hi(const ThinTailConstants& c, const LimitCgf& lambda, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("thin_tail_rate_hi: x must be finite");
  ConjugateResult out;
  if (x == 0.0) {
    out.converged = true;
    return out;
  }
  const BoundaryCgf f(c, lambda);
  auto edge = [&](double end, double toward) {
    // Point inside the domain, near `end`, where f' exceeds |x| in the direction of `toward`.
    if (std::isinf(end)) {
      double u = toward;
      while (toward * f.derivative(u) <= toward * x) u *= 2.0;
      return u;
    }
    double eps = 1e-2 * std::abs(end);
    double u = end - toward * eps;
    for (int i = 0; i < 200 && toward * f.derivative(u) <= toward * x; ++i) {
      eps *= 0.1;
      u = end - toward * eps;
    }
    return u;
  };
  double lo, hi;
  if (x > 0.0) {
    lo = 0.0;
    hi = edge(lambda.u_plus(), 1.0);
  } else {
    lo = edge(lambda.u_minus(), -1.0);
    hi = 0.0;
  }
  if (!(f.derivative(lo) < x && f.derivative(hi) > x)) {
    throw std::runtime_error("thin_tail_rate_hi: could not bracket f'(u) = x");
  }
  auto fdf = [&](double u) { return std::pair{f.derivative(u) - x, f.second_derivative(u)}; };
  const auto r = safeguarded_newton(fdf, lo, hi, 0.5 * (lo + hi), 1e-15 * std::max(1.0, std::abs(x)), 1e-16);
  if (!r.converged) throw std::runtime_error("thin_tail_rate_hi: Newton and bisection stalled");
  out.maximiser = r.root;
  out.value = r.root * x - f.value(r.root);
  out.iterations = r.iterations;
  out.converged = true;
  return out;
}

// ---------------------------------------------------------------------------
// Regimes

/// Speed t^gamma, rescaling X_t / t^alpha and the rate function for one law class.
/// Fat tails use g(t) = t^alpha with speed h(t) = sqrt(t) / g(t) = t^gamma, alpha = 1/2 - gamma.
struct MdpRegime {
  TailRegime law_class;
  double gamma = 0.0;
  double alpha = 0.0;
  bool boundary = false;  // thin tail at gamma = gamma_hi
  std::function<double(double)> rate;
  std::string description;
};

/// Builds the regime for speed exponent `gamma`. Windows: bounded support (0, 1);
/// thin tail (0, gamma_hi], gamma_hi itself giving the conjugate rate; fat tail (0, 1/2).
inline MdpRegime make_regime(const TailRegime& law_class, const HestonParams& p, double gamma) {
  if (!std::isfinite(gamma)) throw std::invalid_argument("make_regime: gamma must be finite");
  MdpRegime r;
  r.law_class = law_class;
  r.gamma = gamma;
  std::ostringstream msg;
  switch (law_class.kind) {
    case TailKind::bounded_support: {
      if (!(gamma > 0.0 && gamma < 1.0)) {
        msg << "bounded support: gamma = " << gamma << " outside the admissible window (0, 1)";
        throw std::invalid_argument(msg.str());
      }
      r.alpha = 0.5 * (1.0 - gamma);
      const double v = law_class.v_plus;
      r.rate = [v](double x) { return bounded_support_rate(v, x); };
      r.description = "bounded support, rate x^2 / (2 v_plus)";
      return r;
    }
    case TailKind::thin_tail: {
      const auto c = thin_tail_constants(law_class);
      const double tol = 1e-12 * c.gamma_hi;
      if (!(gamma > 0.0 && gamma <= c.gamma_hi + tol)) {
        msg << "thin tail: gamma = " << gamma << " outside the admissible window (0, " << c.gamma_hi << "]";
        throw std::invalid_argument(msg.str());
      }
      if (std::abs(gamma - c.gamma_hi) <= tol) {
        r.gamma = c.gamma_hi;
        r.alpha = 1.0 - c.gamma_hi;
        r.boundary = true;
        const LimitCgf lambda(p);
        r.rate = [c, lambda](double x) { return thin_tail_rate_hi(c, lambda, x).value; };
        r.description = "thin tail at gamma_hi, rate by Legendre transform of the boundary cgf";
      } else {
        r.alpha = 0.5 * (1.0 - gamma / c.gamma_lo);
        r.rate = [c](double x) { return thin_tail_rate_lo(c, x); };
        r.description = "thin tail, power rate c_lo / (2 gamma_lo) |x|^(2 gamma_lo)";
      }
      return r;
    }
    case TailKind::fat_tail: {
      if (!(gamma > 0.0 && gamma < 0.5)) {
        msg << "fat tail: gamma = " << gamma << " outside the admissible window (0, 1/2)";
        throw std::invalid_argument(msg.str());
      }
      r.alpha = 0.5 - gamma;
      const double m = law_class.m;
      r.rate = [m](double x) { return fat_tail_rate(m, x); };
      r.description = "fat tail, speed sqrt(t)/g(t), rate sqrt(2 m) |x|";
      return r;
    }
  }
  throw std::invalid_argument("make_regime: unknown tail kind");
}

/// Leading log P(X_t >= x t^alpha) (x > 0) or log P(X_t <= x t^alpha) (x < 0): -rate(x) / t^gamma.
inline double motm_tail_asymptote(const MdpRegime& regime, double x, double t) {
  if (regime.law_class.kind != TailKind::thin_tail || regime.boundary) {
    throw std::invalid_argument("motm_tail_asymptote: thin-tail regime with gamma < gamma_hi required");
  }
  if (x == 0.0 || !std::isfinite(x)) throw std::invalid_argument("motm_tail_asymptote: x must be nonzero");
  if (!(t > 0.0)) throw std::invalid_argument("motm_tail_asymptote: t must be positive");
  return -regime.rate(x) / std::pow(t, regime.gamma);
}

struct TailAsymptote {
  double log_probability;
  double alpha;
};

/// -rate(s(t)) / t^gamma for strikes t^alpha s(t), s slowly varying at zero.
inline TailAsymptote slowly_varying_tail(const ThinTailConstants& c, const std::function<double(double)>& s,
                                         double gamma, double t) {
  if (!(gamma > 0.0 && gamma < c.gamma_lo)) {
    std::ostringstream msg;
    msg << "slowly_varying_tail: gamma = " << gamma << " outside (0, " << c.gamma_lo << ")";
    throw std::invalid_argument(msg.str());
  }
  if (!(t > 0.0)) throw std::invalid_argument("slowly_varying_tail: t must be positive");
  const double st = s(t);
  if (!(st > 0.0 && std::isfinite(st))) throw std::invalid_argument("slowly_varying_tail: s(t) must be positive");
  return {-thin_tail_rate_lo(c, st) / std::pow(t, gamma), 0.5 * (1.0 - gamma / c.gamma_lo)};
}

struct ImpliedVolLimit {
  double gamma_hat;
  double limit;
};

/// lim t^gamma_hat sigma_t^2(x t^alpha) = gamma_lo |x|^(2 (1 - gamma_lo)) / c_lo
/// with gamma_hat = (1 - 2 alpha)(1 - gamma_lo); alpha in (0, 1/2) or (1 - gamma_hi, 0).
inline ImpliedVolLimit motm_implied_vol_limit(const ThinTailConstants& c, double alpha, double x) {
  const bool motm = alpha > 0.0 && alpha < 0.5;
  const bool large_strike = alpha > 1.0 - c.gamma_hi && alpha < 0.0;
  if (!(motm || large_strike)) {
    std::ostringstream msg;
    msg << "motm_implied_vol_limit: alpha = " << alpha << " outside (0, 1/2) and (" << 1.0 - c.gamma_hi << ", 0)";
    throw std::invalid_argument(msg.str());
  }
  if (x == 0.0 || !std::isfinite(x)) throw std::invalid_argument("motm_implied_vol_limit: x must be nonzero");
  return {(1.0 - 2.0 * alpha) * (1.0 - c.gamma_lo),
          c.gamma_lo * std::pow(std::abs(x), 2.0 * (1.0 - c.gamma_lo)) / c.c_lo};
}

}  // namespace mdheston

#endif  // MDHESTON_MDP_RATES_HPP
