#ifndef MDHESTON_LAWS_HPP
#define MDHESTON_LAWS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mdheston/quadrature.hpp"
#include "mdheston/roots.hpp"
#include "mdheston/special_functions.hpp"

namespace mdheston {

// Distributions for the random initial variance.

struct PointMass {
  double v0;
};

struct UniformLaw {
  double lower;
  double upper;
};

/// |N(0, sigma^2)|.
struct FoldedGaussian {
  double sigma;
};

struct GammaLaw {
  double shape;
  double rate;
};

/// scale * chi'^2(df, noncentrality).
struct NoncentralChiSquared {
  double df;
  double noncentrality;
  double scale;
};

/// Density on (lower, inf) given by its log, with log f(v) ~ -l1 v^l2 at infinity.
struct GenericThinTail {
  double l1;
  double l2;
  std::function<double(double)> log_density;
  double lower = 0.0;
  /// Optional exact sampler; when absent draws come from a tabulated inverse CDF.
  std::function<double(std::mt19937_64&)> sampler;

  struct InverseCdf {
    std::vector<double> v;
    std::vector<double> cdf;
  };
  std::shared_ptr<const InverseCdf> table;
};

using LawVariant =
    std::variant<PointMass, UniformLaw, FoldedGaussian, GammaLaw, NoncentralChiSquared, GenericThinTail>;

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

inline bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// Peak of v -> s v + log f(v) on (lower, inf) for a log-concave tail.
inline double generic_peak(const GenericThinTail& law, double s) {
  auto obj = [&](double v) { return -(s * v + law.log_density(v)); };
  double hi = std::max(law.lower + 1.0, 2.0 * law.lower);
  while (obj(2.0 * hi) < obj(hi) && hi < 1e12) hi *= 2.0;
  return golden_minimize(obj, law.lower, 2.0 * hi, 1e-12).argmin;
}

inline std::shared_ptr<const GenericThinTail::InverseCdf> build_inverse_cdf(const GenericThinTail& law) {
  const double peak = generic_peak(law, 0.0);
  const double top = law.log_density(peak);
  double hi = std::max(peak, law.lower) + 1.0;
  while (law.log_density(hi) > top - 45.0) hi = law.lower + 2.0 * (hi - law.lower);
  constexpr std::size_t n = 1 << 14;
  auto tab = std::make_shared<GenericThinTail::InverseCdf>();
  tab->v.resize(n + 1);
  tab->cdf.resize(n + 1);
  const double dv = (hi - law.lower) / n;
  double prev = std::exp(law.log_density(law.lower + 1e-12 * dv) - top);
  tab->v[0] = law.lower;
  tab->cdf[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    tab->v[i] = law.lower + i * dv;
    const double cur = std::exp(law.log_density(tab->v[i]) - top);
    tab->cdf[i] = tab->cdf[i - 1] + 0.5 * (prev + cur) * dv;
    prev = cur;
  }
  for (auto& c : tab->cdf) c /= tab->cdf.back();
  return tab;
}

}  // namespace detail

/// The law of the initial variance, with validated parameters.
class RandomisationLaw {
 public:
  RandomisationLaw(PointMass law) : law_(law) {
    detail::require(detail::finite_positive(law.v0), "PointMass: v0 must be positive");
  }
  RandomisationLaw(UniformLaw law) : law_(law) {
    detail::require(detail::finite_positive(law.lower) && std::isfinite(law.upper) && law.upper > law.lower,
                    "Uniform: need 0 < a < b");
  }
  RandomisationLaw(FoldedGaussian law) : law_(law) {
    detail::require(detail::finite_positive(law.sigma), "FoldedGaussian: sigma must be positive");
  }
  RandomisationLaw(GammaLaw law) : law_(law) {
    detail::require(detail::finite_positive(law.shape) && detail::finite_positive(law.rate),
                    "Gamma: shape and rate must be positive");
  }
  RandomisationLaw(NoncentralChiSquared law) : law_(law) {
    detail::require(detail::finite_positive(law.df) && detail::finite_positive(law.noncentrality) &&
                        detail::finite_positive(law.scale),
                    "NoncentralChiSquared: df, noncentrality and scale must be positive");
  }
  RandomisationLaw(GenericThinTail law) {
    detail::require(detail::finite_positive(law.l1), "GenericThinTail: l1 must be positive");
    detail::require(std::isfinite(law.l2) && law.l2 > 1.0, "GenericThinTail: l2 must exceed 1");
    detail::require(static_cast<bool>(law.log_density), "GenericThinTail: log density required");
    detail::require(std::isfinite(law.lower) && law.lower >= 0.0, "GenericThinTail: lower must be >= 0");
    if (!law.sampler && !law.table) law.table = detail::build_inverse_cdf(law);
    law_ = std::move(law);
  }

  static RandomisationLaw point_mass(double v0) { return PointMass{v0}; }
  static RandomisationLaw uniform(double a, double b) { return UniformLaw{a, b}; }
  static RandomisationLaw folded_gaussian(double sigma) { return FoldedGaussian{sigma}; }
  static RandomisationLaw gamma(double shape, double rate) { return GammaLaw{shape, rate}; }
  static RandomisationLaw noncentral_chi_squared(double df, double nc, double scale) {
    return NoncentralChiSquared{df, nc, scale};
  }

  /// Density proportional to exp(-l1 v^l2) on (0, inf).
  static RandomisationLaw stretched_exponential(double l1, double l2) {
    detail::require(detail::finite_positive(l1) && std::isfinite(l2) && l2 > 1.0,
                    "stretched exponential: need l1 > 0, l2 > 1");
    const double log_norm = std::log(l2) + std::log(l1) / l2 - std::lgamma(1.0 / l2);
    GenericThinTail law{l1, l2, [=](double v) { return log_norm - l1 * std::pow(v, l2); }, 0.0,
                        [=](std::mt19937_64& rng) {
                          std::gamma_distribution<double> g(1.0 / l2, 1.0);
                          return std::pow(g(rng) / l1, 1.0 / l2);
                        },
                        nullptr};
    return law;
  }

  const LawVariant& variant() const { return law_; }

  std::string name() const {
    return std::visit(
        [](const auto& l) -> std::string {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, PointMass>) return "point_mass";
          else if constexpr (std::is_same_v<L, UniformLaw>) return "uniform";
          else if constexpr (std::is_same_v<L, FoldedGaussian>) return "folded_gaussian";
          else if constexpr (std::is_same_v<L, GammaLaw>) return "gamma";
          else if constexpr (std::is_same_v<L, NoncentralChiSquared>) return "noncentral_chi_squared";
          else return "generic_thin_tail";
        },
        law_);
  }

  /// sup{u : E exp(u V) < inf}.
  double mgf_bound() const {
    if (auto g = std::get_if<GammaLaw>(&law_)) return g->rate;
    if (auto n = std::get_if<NoncentralChiSquared>(&law_)) return 0.5 / n->scale;
    return inf;
  }

  /// Upper end of the support.
  double support_upper() const {
    if (auto p = std::get_if<PointMass>(&law_)) return p->v0;
    if (auto u = std::get_if<UniformLaw>(&law_)) return u->upper;
    return inf;
  }

  double mean() const;

 private:
  LawVariant law_;
};

// ---------------------------------------------------------------------------
// Moment generating function

namespace detail {

struct GenericMgf {
  cplx log_value;
  double rel_error;
};

inline GenericMgf generic_log_mgf(const GenericThinTail& law, cplx z) {
  const double s = z.real();
  const double peak = generic_peak(law, s);
  const double top = s * peak + law.log_density(peak);
  const double step = 1e-3 * std::max(1.0, peak);
  const double curv = -(law.log_density(peak + step) - 2.0 * law.log_density(peak) +
                        law.log_density(peak - std::min(step, peak - law.lower))) /
                      (step * step);
  const double width = curv > 0.0 && std::isfinite(curv) ? 1.0 / std::sqrt(curv) : 1.0;
  auto integrand = [&](double v) { return std::exp(z * v + (law.log_density(v) - top)); };
  QuadratureOptions opt{1e-300, 1e-12, 20000};
  auto left = integrate(integrand, law.lower, peak, opt);
  HalfLineOptions hopt{opt, 1e-18, 80};
  auto right = integrate_half_line(integrand, peak, 4.0 * width, hopt);
  const cplx total = left.value + right.value;
  return {top + std::log(total), (left.error + right.error) / std::abs(total)};
}

}  // namespace detail

/// log M_V(z); nullopt outside the domain Re z < mgf_bound().
inline std::optional<cplx> law_log_mgf(const RandomisationLaw& law, cplx z) {
  if (!(z.real() < law.mgf_bound())) return std::nullopt;
  return std::visit(
      [z](const auto& l) -> cplx {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PointMass>) {
          return z * l.v0;
        } else if constexpr (std::is_same_v<L, UniformLaw>) {
          const double width = l.upper - l.lower;
          if (z.real() >= 0.0) return z * l.upper + std::log(expm1_ratio(-z * width));
          return z * l.lower + std::log(expm1_ratio(z * width));
        } else if constexpr (std::is_same_v<L, FoldedGaussian>) {
          return log_faddeeva(cplx(0.0, -l.sigma / std::numbers::sqrt2) * z);
        } else if constexpr (std::is_same_v<L, GammaLaw>) {
          return -l.shape * std::log(1.0 - z / l.rate);
        } else if constexpr (std::is_same_v<L, NoncentralChiSquared>) {
          const cplx q = 1.0 - 2.0 * l.scale * z;
          return l.noncentrality * l.scale * z / q - 0.5 * l.df * std::log(q);
        } else {
          return detail::generic_log_mgf(l, z).log_value;
        }
      },
      law.variant());
}

/// M_V(z) = E exp(z V); nullopt outside the domain.
inline std::optional<cplx> law_mgf(const RandomisationLaw& law, cplx z) {
  auto lm = law_log_mgf(law, z);
  if (!lm) return std::nullopt;
  return std::exp(*lm);
}

/// M_V'(z) / M_V(z).
inline std::optional<cplx> law_mgf_log_derivative(const RandomisationLaw& law, cplx z) {
  if (!(z.real() < law.mgf_bound())) return std::nullopt;
  return std::visit(
      [z](const auto& l) -> cplx {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PointMass>) {
          return l.v0;
        } else if constexpr (std::is_same_v<L, UniformLaw>) {
          const double width = l.upper - l.lower;
          const cplx w = z * width;
          const double mid = 0.5 * (l.lower + l.upper);
          if (std::abs(w) < 1e-3) return mid + width * w / 12.0 - width * w * w * w / 720.0;
          if (z.real() >= 0.0) {
            const cplx q = std::exp(-w);
            return (l.upper - l.lower * q) / (1.0 - q) - 1.0 / z;
          }
          const cplx p = std::exp(w);
          return (l.upper * p - l.lower) / (p - 1.0) - 1.0 / z;
        } else if constexpr (std::is_same_v<L, FoldedGaussian>) {
          const cplx dz(0.0, -l.sigma / std::numbers::sqrt2);
          const cplx zeta = dz * z;
          const cplx inv_w = std::exp(-log_faddeeva(zeta));
          return dz * (-2.0 * zeta + cplx(0.0, 2.0 * std::numbers::inv_sqrtpi) * inv_w);
        } else if constexpr (std::is_same_v<L, GammaLaw>) {
          return l.shape / (l.rate - z);
        } else if constexpr (std::is_same_v<L, NoncentralChiSquared>) {
          const cplx q = 1.0 - 2.0 * l.scale * z;
          return l.noncentrality * l.scale / (q * q) + l.df * l.scale / q;
        } else {
          // d/dz log M by a central complex difference of the quadrature cgf.
          const double step = 1e-5 * std::max(1.0, std::abs(z));
          const cplx up = detail::generic_log_mgf(l, z + step).log_value;
          const cplx dn = detail::generic_log_mgf(l, z - step).log_value;
          return (up - dn) / (2.0 * step);
        }
      },
      law.variant());
}

inline double RandomisationLaw::mean() const {
  return std::visit(
      [](const auto& l) -> double {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PointMass>) return l.v0;
        else if constexpr (std::is_same_v<L, UniformLaw>) return 0.5 * (l.lower + l.upper);
        else if constexpr (std::is_same_v<L, FoldedGaussian>) return l.sigma * std::sqrt(2.0 / std::numbers::pi);
        else if constexpr (std::is_same_v<L, GammaLaw>) return l.shape / l.rate;
        else if constexpr (std::is_same_v<L, NoncentralChiSquared>) return l.scale * (l.df + l.noncentrality);
        else return std::real(*law_mgf_log_derivative(RandomisationLaw(l), 0.0));
      },
      law_);
}

// ---------------------------------------------------------------------------
// Tail classification

enum class TailKind { bounded_support, thin_tail, fat_tail };

struct TailRegime {
  TailKind kind = TailKind::bounded_support;
  double v_plus = inf;  // upper end of the support
  double l1 = std::numeric_limits<double>::quiet_NaN();
  double l2 = std::numeric_limits<double>::quiet_NaN();
  double m = inf;  // MGF explosion point
  double gamma0 = std::numeric_limits<double>::quiet_NaN();
  double gamma1 = std::numeric_limits<double>::quiet_NaN();
  int omega = 0;

  static TailRegime bounded(double v_plus) {
    detail::require(detail::finite_positive(v_plus), "bounded support needs finite v_plus > 0");
    TailRegime r;
    r.v_plus = v_plus;
    return r;
  }
  static TailRegime thin(double l1, double l2) {
    detail::require(detail::finite_positive(l1) && std::isfinite(l2) && l2 > 1.0,
                    "thin tail needs l1 > 0 and l2 > 1");
    TailRegime r;
    r.kind = TailKind::thin_tail;
    r.l1 = l1;
    r.l2 = l2;
    return r;
  }
  static TailRegime fat(double m, double gamma0, double gamma1, int omega) {
    detail::require(detail::finite_positive(m), "fat tail needs finite m > 0");
    detail::require(omega == 1 || omega == 2, "fat tail needs omega in {1, 2}");
    detail::require(omega == 1 ? gamma0 < 0.0 : gamma0 > 0.0,
                    "fat tail needs gamma0 < 0 for omega = 1 and gamma0 > 0 for omega = 2");
    TailRegime r;
    r.kind = TailKind::fat_tail;
    r.m = m;
    r.gamma0 = gamma0;
    r.gamma1 = gamma1;
    r.omega = omega;
    return r;
  }
};

inline TailRegime classify_tail(const RandomisationLaw& law) {
  return std::visit(
      [](const auto& l) -> TailRegime {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PointMass>) {
          return TailRegime::bounded(l.v0);
        } else if constexpr (std::is_same_v<L, UniformLaw>) {
          return TailRegime::bounded(l.upper);
        } else if constexpr (std::is_same_v<L, FoldedGaussian>) {
          return TailRegime::thin(0.5 / (l.sigma * l.sigma), 2.0);
        } else if constexpr (std::is_same_v<L, GammaLaw>) {
          return TailRegime::fat(l.rate, -l.shape, l.shape * std::log(l.rate), 1);
        } else if constexpr (std::is_same_v<L, NoncentralChiSquared>) {
          // log M = g0 / e - nc / 2 - (df / 2) log(2 s e) with e = m - u, m = 1 / (2 s).
          const double g0 = l.noncentrality / (4.0 * l.scale);
          return TailRegime::fat(0.5 / l.scale, g0, -0.5 * l.df / g0, 2);
        } else {
          return TailRegime::thin(l.l1, l.l2);
        }
      },
      law.variant());
}

struct FatTailResidual {
  double u;
  double cgf_residual;    // log M - displayed leading form
  double cgf_leading;     // displayed leading form
  double ratio_residual;  // M'/M - displayed leading form
  double ratio_leading;
};

/// Residuals of the cumulant generating function and of M'/M against their
/// displayed fat-tail asymptotic forms along `u_grid` (each point below m).
inline std::vector<FatTailResidual> verify_fat_tail_asymptotics(const RandomisationLaw& law,
                                                                std::span<const double> u_grid) {
  const TailRegime r = classify_tail(law);
  if (r.kind != TailKind::fat_tail) throw std::invalid_argument("verify_fat_tail_asymptotics: law is not fat-tailed");
  std::vector<FatTailResidual> out;
  out.reserve(u_grid.size());
  for (double u : u_grid) {
    if (!(u < r.m)) throw std::invalid_argument("verify_fat_tail_asymptotics: grid point outside (-inf, m)");
    const double e = r.m - u;
    const double cgf = law_log_mgf(law, u)->real();
    const double ratio = law_mgf_log_derivative(law, u)->real();
    FatTailResidual row{u, 0, 0, 0, 0};
    if (r.omega == 1) {
      row.cgf_leading = r.gamma0 * std::log(e) + r.gamma1;
      row.ratio_leading = std::abs(r.gamma0) / e;
    } else {
      row.cgf_leading = r.gamma0 / e * (1.0 + r.gamma1 * e * std::log(e));
      row.ratio_leading = r.gamma0 / (e * e) * (1.0 - r.gamma1 * e);
    }
    row.cgf_residual = cgf - row.cgf_leading;
    row.ratio_residual = ratio - row.ratio_leading;
    out.push_back(row);
  }
  return out;
}

/// Leading growth of log M_V(z) for a thin tail with log f(v) = -l1 v^l2:
/// (l2 - 1) l2^(-l2/(l2-1)) l1^(-1/(l2-1)) z^(l2/(l2-1)).
inline double kasahara_mgf_asymptote(const TailRegime& regime, double z) {
  if (regime.kind != TailKind::thin_tail) throw std::invalid_argument("kasahara_mgf_asymptote: thin tail required");
  const double l = regime.l2;
  if (!(l > 1.0)) throw std::invalid_argument("kasahara_mgf_asymptote: l2 must exceed 1");
  const double q = l / (l - 1.0);
  return (l - 1.0) * std::pow(l, -q) * std::pow(regime.l1, -1.0 / (l - 1.0)) * std::pow(z, q);
}

// ---------------------------------------------------------------------------
// Sampling

inline double draw(const RandomisationLaw& law, std::mt19937_64& rng) {
  return std::visit(
      [&rng](const auto& l) -> double {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PointMass>) {
          return l.v0;
        } else if constexpr (std::is_same_v<L, UniformLaw>) {
          return std::uniform_real_distribution<double>(l.lower, l.upper)(rng);
        } else if constexpr (std::is_same_v<L, FoldedGaussian>) {
          return std::abs(l.sigma * std::normal_distribution<double>()(rng));
        } else if constexpr (std::is_same_v<L, GammaLaw>) {
          return std::gamma_distribution<double>(l.shape, 1.0 / l.rate)(rng);
        } else if constexpr (std::is_same_v<L, NoncentralChiSquared>) {
          const auto n = std::poisson_distribution<long>(0.5 * l.noncentrality)(rng);
          return l.scale * std::gamma_distribution<double>(0.5 * l.df + static_cast<double>(n), 2.0)(rng);
        } else {
          if (l.sampler) return l.sampler(rng);
          const auto& tab = *l.table;
          const double p = std::uniform_real_distribution<double>()(rng);
          const auto it = std::upper_bound(tab.cdf.begin(), tab.cdf.end(), p);
          const auto i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - tab.cdf.begin(), 1,
                                                  static_cast<std::ptrdiff_t>(tab.cdf.size()) - 1));
          const double w = (p - tab.cdf[i - 1]) / std::max(tab.cdf[i] - tab.cdf[i - 1], 1e-300);
          return tab.v[i - 1] + w * (tab.v[i] - tab.v[i - 1]);
        }
      },
      law.variant());
}

inline std::vector<double> sample(const RandomisationLaw& law, std::mt19937_64& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
  std::vector<double> out(n);
  for (auto& v : out) v = draw(law, rng);
  return out;
}

}  // namespace mdheston

#endif  // MDHESTON_LAWS_HPP
