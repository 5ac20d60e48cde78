#ifndef MDHESTON_EXPERIMENTS_HPP
#define MDHESTON_EXPERIMENTS_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdheston/black_scholes.hpp"
#include "mdheston/fourier.hpp"
#include "mdheston/heston.hpp"
#include "mdheston/laws.hpp"
#include "mdheston/mdp_rates.hpp"
#include "mdheston/monte_carlo.hpp"
#include "mdheston/sharp_expansion.hpp"

namespace mdheston {

// Convergence experiments behind `mdheston verify` and the acceptance binary.

struct ExperimentOptions {
  std::uint64_t seed = 20240611;
  unsigned workers = 1;
  std::size_t mc_paths = 1'000'000;
};

struct ExperimentReport {
  std::string id;     // ac1 .. ac10
  std::string name;   // verify subcommand name
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> row_verdicts;  // per-row trend verdict, may be empty
  bool pass = false;
  std::string verdict;  // pass, fail or inconclusive
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

/// Heston parameters used where a criterion does not fix them.
inline HestonParams reference_params() { return HestonParams(1.0, 0.04, 0.5, -0.7); }

namespace detail {

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

inline ExperimentReport make_report(std::string id, std::string name, std::string title) {
  ExperimentReport r;
  r.id = std::move(id);
  r.name = std::move(name);
  r.title = std::move(title);
  return r;
}

inline void finish(ExperimentReport& r, const Stopwatch& w, bool ok, bool inconclusive = false) {
  r.seconds = w.seconds();
  const bool in_time = r.seconds < r.budget_seconds;
  if (!in_time) {
    std::ostringstream s;
    s << (r.detail.empty() ? "" : "; ") << "runtime " << r.seconds << " s exceeds " << r.budget_seconds << " s";
    r.detail += s.str();
  }
  r.pass = ok && in_time;
  r.verdict = r.pass ? "pass" : (inconclusive && in_time ? "inconclusive" : "fail");
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// Trend of `values` toward `target`: per-step verdicts "toward", "away" or
// "inconclusive" (step smaller than the combined error bars).
inline std::vector<std::string> trend_verdicts(const std::vector<double>& values, const std::vector<double>& errors,
                                               double target) {
  std::vector<std::string> out(values.size(), "");
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double before = std::abs(values[i - 1] - target);
    const double after = std::abs(values[i] - target);
    const double noise = errors[i - 1] + errors[i];
    if (std::abs(before - after) <= noise) out[i] = "inconclusive";
    else out[i] = after < before ? "toward" : "away";
  }
  return out;
}

inline bool all_toward(const std::vector<std::string>& v, bool& inconclusive) {
  bool ok = true;
  inconclusive = false;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] == "inconclusive") inconclusive = true;
    if (v[i] != "toward") ok = false;
  }
  return ok;
}

}  // namespace detail

/// AC1: M(t, 1) = 1 on a 27-point grid and Monte Carlo E exp(u X_t) against the closed form.
inline ExperimentReport experiment_martingale(const ExperimentOptions& opt = {}) {
  auto r = detail::make_report("ac1", "martingale", "martingale and tower property");
  r.budget_seconds = 120.0;
  r.columns = {"case", "kappa", "theta", "xi", "rho", "t", "u", "closed_form", "estimate", "std_error", "deviation"};
  detail::Stopwatch w;
  const std::vector<RandomisationLaw> laws = {RandomisationLaw::uniform(0.02, 0.06), RandomisationLaw::gamma(2.0, 50.0),
                                              RandomisationLaw::folded_gaussian(0.05)};
  const double kappas[] = {0.8, 1.5, 3.0};
  const double xis[] = {0.2, 0.5, 1.0};
  const double thetas[] = {0.02, 0.04, 0.09};
  const double rhos[] = {-0.7, 0.0, 0.5};
  bool ok = true;
  double worst = 0.0;
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int l = 0; l < 3; ++l) {
        const HestonParams p(kappas[i], thetas[(i + j + l) % 3], xis[j], rhos[(i + 2 * j + l) % 3]);
        const double t = 1.0;
        const auto m = randomised_mgf(p, laws[l], t, 1.0);
        const double dev = m ? std::abs(m->real() - 1.0) + std::abs(m->imag()) : inf;
        worst = std::max(worst, dev);
        ok = ok && dev < 1e-10;
        r.rows.push_back({static_cast<double>(n++), p.kappa(), p.theta(), p.xi(), p.rho(), t, 1.0, 1.0,
                          m ? m->real() : std::nan(""), 0.0, dev});
      }
    }
  }
  const std::vector<RandomisationLaw> mc_laws = {laws[0], laws[1], laws[2],
                                                 RandomisationLaw::noncentral_chi_squared(2.0, 1.0, 0.01)};
  const HestonParams p = reference_params();
  const double t = 0.5;
  double worst_z = 0.0;
  for (std::size_t l = 0; l < mc_laws.size(); ++l) {
    McConfig cfg{opt.mc_paths, 16, McScheme::exact_cir, opt.seed + l, opt.workers};
    const auto s = simulate_paths(p, mc_laws[l], t, cfg);
    for (double u : {-0.5, 0.5}) {
      const double exact = randomised_mgf(p, mc_laws[l], t, u)->real();
      const auto est = mc_mgf(s, u);
      const double z = std::abs(est.value - exact) / est.error;
      worst_z = std::max(worst_z, z);
      ok = ok && z <= 4.0;
      r.rows.push_back({static_cast<double>(n++), p.kappa(), p.theta(), p.xi(), p.rho(), t, u, exact, est.value,
                        est.error, z});
    }
  }
  r.detail = "max |M(t,1) - 1| = " + detail::fmt(worst) + " (< 1e-10); max MC deviation = " + detail::fmt(worst_z) +
             " SE (<= 4)";
  detail::finish(r, w, ok);
  return r;
}

/// AC2: relative error of the MDP-scale D approximation with h(t) = t^0.7 decays like a power of t.
inline ExperimentReport experiment_cd_order(const ExperimentOptions& = {}) {
  auto r = detail::make_report("ac2", "cd-order", "order of the MDP-scale D approximation");
  r.budget_seconds = 1.0;
  r.columns = {"t", "u", "exact", "approximation", "rel_error", "ratio_to_next"};
  detail::Stopwatch w;
  const HestonParams p(0.5, 0.04, 1.0, -0.7);
  const double u = 1.0;
  const std::vector<double> ts = {1e-3, 5e-4, 2.5e-4};
  std::vector<double> errs;
  for (double t : ts) {
    const double h = std::pow(t, 0.7);
    const double exact = mgf_components(p, t, u / h).d_value.real();
    const double approx = cd_asymptotic(p, t, u, RescalingScale::mdp, h).d_value;
    errs.push_back(std::abs(approx / exact - 1.0));
    r.rows.push_back({t, u, exact, approx, errs.back(), std::nan("")});
  }
  bool ok = true;
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double q = errs[i] / errs[i + 1];
    r.rows[i].back() = q;
    ok = ok && q >= 1.5 && q <= 2.5;
  }
  r.detail = "err(t)/err(t/2) = " + detail::fmt(r.rows[0].back()) + ", " + detail::fmt(r.rows[1].back()) +
             " (in [1.5, 2.5])";
  detail::finish(r, w, ok);
  return r;
}

/// AC3: bounded support, -t^gamma log P(X_t >= x t^alpha) -> x^2 / (2 v_plus).
inline ExperimentReport experiment_bounded_support(const ExperimentOptions& = {}) {
  auto r = detail::make_report("ac3", "bounded-support", "bounded-support tail, Uniform(1, 2), gamma = 1/2");
  r.budget_seconds = 60.0;
  r.columns = {"t", "log_probability", "scaled", "limit", "rel_gap"};
  detail::Stopwatch w;
  const auto law = RandomisationLaw::uniform(1.0, 2.0);
  const HestonParams p = reference_params();
  const auto regime = make_regime(classify_tail(law), p, 0.5);
  const double x = 1.0;
  const double limit = regime.rate(x);
  std::vector<double> vals, errs;
  for (int j = 2; j <= 5; ++j) {
    const double t = std::pow(10.0, -j);
    const auto est = tail_probability(p, law, t, x * std::pow(t, regime.alpha));
    const double a = -std::pow(t, regime.gamma) * est.log_value;
    vals.push_back(a);
    errs.push_back(std::pow(t, regime.gamma) * est.error / est.value);
    r.rows.push_back({t, est.log_value, a, limit, std::abs(a / limit - 1.0)});
  }
  r.row_verdicts = detail::trend_verdicts(vals, errs, limit);
  bool inconclusive = false;
  const bool monotone = detail::all_toward(r.row_verdicts, inconclusive);
  const bool close = std::abs(vals.back() / limit - 1.0) <= 0.15;
  r.detail = "final " + detail::fmt(vals.back()) + " vs " + detail::fmt(limit) + " (within 15%: " +
             (close ? "yes" : "no") + "), monotone: " + (monotone ? "yes" : "no");
  detail::finish(r, w, monotone && close, inconclusive);
  return r;
}

/// AC4: thin tail, FoldedGaussian(1), gamma = 1/2: -t^gamma log P / rate -> 1.
inline ExperimentReport experiment_thin_tail(const ExperimentOptions& = {}) {
  auto r = detail::make_report("ac4", "thin-tail", "thin-tail tail, FoldedGaussian(1), gamma = 1/2");
  r.budget_seconds = 120.0;
  r.columns = {"t", "log_probability", "scaled", "rate", "ratio"};
  detail::Stopwatch w;
  const auto law = RandomisationLaw::folded_gaussian(1.0);
  const HestonParams p = reference_params();
  const auto regime = make_regime(classify_tail(law), p, 0.5);
  const double x = 1.0;
  const double rate = regime.rate(x);
  std::vector<double> vals, errs;
  // Smallest stable t: below 1e-6 the tail falls under exp(-1000).
  for (int j = 2; j <= 6; ++j) {
    const double t = std::pow(10.0, -j);
    const auto est = tail_probability(p, law, t, x * std::pow(t, regime.alpha));
    const double a = -std::pow(t, regime.gamma) * est.log_value;
    vals.push_back(a / rate);
    errs.push_back(std::pow(t, regime.gamma) * est.error / est.value / rate);
    r.rows.push_back({t, est.log_value, a, rate, a / rate});
  }
  r.row_verdicts = detail::trend_verdicts(vals, errs, 1.0);
  bool inconclusive = false;
  const bool monotone = detail::all_toward(r.row_verdicts, inconclusive);
  const bool close = std::abs(vals.back() - 1.0) <= 0.20;
  r.detail = "final ratio " + detail::fmt(vals.back()) + " (within 20%: " + (close ? "yes" : "no") +
             "), monotone: " + (monotone ? "yes" : "no");
  detail::finish(r, w, monotone && close, inconclusive);
  return r;
}

/// AC5: the boundary conjugate against a brute-force grid supremum, and Fenchel-Young.
inline ExperimentReport experiment_conjugate_duality(const ExperimentOptions& opt = {}) {
  auto r = detail::make_report("ac5", "duality", "conjugate duality of the boundary rate function");
  r.budget_seconds = 10.0;
  r.columns = {"x", "conjugate", "grid_supremum", "abs_gap", "maximiser", "equality_gap", "worst_fenchel_young"};
  detail::Stopwatch w;
  const HestonParams p = reference_params();
  const auto c = thin_tail_constants(0.5, 2.0);
  const LimitCgf lambda(p);
  const BoundaryCgf f(c, lambda);
  const double lo = lambda.u_minus(), hi = lambda.u_plus();
  const double step = 1e-5;
  std::vector<double> grid_u, grid_f;
  for (double u = lo + step; u < hi; u += step) {
    grid_u.push_back(u);
    grid_f.push_back(f.value(u));
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> pick(lo, hi);
  std::vector<double> random_u(1000);
  for (auto& u : random_u) u = pick(rng);
  bool ok = true;
  double worst_gap = 0.0, worst_eq = 0.0, worst_fy = -inf;
  for (int i = 0; i < 50; ++i) {
    const double x = -3.0 + 6.0 * i / 49.0;
    const auto conj = thin_tail_rate_hi(c, lambda, x);
    double sup = -inf;
    for (std::size_t k = 0; k < grid_u.size(); ++k) sup = std::max(sup, grid_u[k] * x - grid_f[k]);
    const double gap = std::abs(conj.value - sup);
    const double eq = std::abs(conj.value + f.value(conj.maximiser) - conj.maximiser * x);
    double fy = -inf;
    for (double u : random_u) {
      if (!lambda.contains(u)) continue;
      fy = std::max(fy, u * x - f.value(u) - conj.value);
    }
    worst_gap = std::max(worst_gap, gap);
    worst_eq = std::max(worst_eq, eq);
    worst_fy = std::max(worst_fy, fy);
    ok = ok && gap <= 1e-6 && eq <= 1e-8 && fy <= 1e-12 * std::max(1.0, std::abs(conj.value));
    r.rows.push_back({x, conj.value, sup, gap, conj.maximiser, eq, fy});
  }
  r.detail = "max |conjugate - grid sup| = " + detail::fmt(worst_gap) + " (<= 1e-6); max equality gap = " +
             detail::fmt(worst_eq) + " (<= 1e-8); max u x - f(u) - conjugate = " + detail::fmt(worst_fy) + " (<= 0)";
  detail::finish(r, w, ok);
  return r;
}

/// AC6: Fourier call time value over the displayed expansion along t = 10^-j.
inline ExperimentReport experiment_sharp_call(const ExperimentOptions& = {}) {
  auto r = detail::make_report("ac6", "sharp-call", "fat-tail call expansion, Gamma(2, 3), g(t) = t^(1/4)");
  r.budget_seconds = 120.0;
  r.columns = {"x", "t", "log_oracle_time_value", "log_expansion_time_value", "ratio", "ratio_times_g"};
  detail::Stopwatch w;
  const HestonParams p = reference_params();
  const auto law = RandomisationLaw::gamma(2.0, 3.0);
  const auto g = RescalingG::power(0.25);
  bool ok = true, inconclusive_any = false;
  std::ostringstream d;
  for (double x : {0.5, -0.5}) {
    std::vector<double> vals, errs;
    for (int j = 2; j <= 5; ++j) {
      const double t = std::pow(10.0, -j);
      const auto ce = call_expansion(law, g, t, x);
      // Out-of-the-money price equals the call minus its intrinsic value on both sides.
      const auto oracle = fourier_otm_price(p, law, t, x * g.g(t));
      const double ratio = std::exp(oracle.log_value - ce.log_correction);
      vals.push_back(ratio);
      errs.push_back(ratio * oracle.error / oracle.value);
      r.rows.push_back({x, t, oracle.log_value, ce.log_correction, ratio, ratio * g.g(t)});
    }
    const auto v = detail::trend_verdicts(vals, errs, 1.0);
    r.row_verdicts.insert(r.row_verdicts.end(), v.begin(), v.end());
    bool inconclusive = false;
    const bool monotone = detail::all_toward(v, inconclusive);
    const bool close = vals.back() >= 0.9 && vals.back() <= 1.1;
    inconclusive_any = inconclusive_any || inconclusive;
    ok = ok && monotone && close;
    d << "x = " << x << ": final ratio " << detail::fmt(vals.back()) << " (in [0.9, 1.1]: " << (close ? "yes" : "no")
      << "), monotone toward 1: " << (monotone ? "yes" : "no") << "; ";
  }
  d << "diagnostic: ratio * g(t) is listed in the last column";
  r.detail = d.str();
  detail::finish(r, w, ok, inconclusive_any);
  return r;
}

/// AC7: tilted characteristic function at t = 1e-6 against t = 1e-4.
inline ExperimentReport experiment_tilted_cf(const ExperimentOptions& = {}) {
  auto r = detail::make_report("ac7", "tilted-cf", "tilted characteristic function, Gamma(2, 3), x = 0.5");
  r.budget_seconds = 30.0;
  r.columns = {"t", "max_gap", "argmax_u"};
  detail::Stopwatch w;
  const HestonParams p = reference_params();
  const auto law = RandomisationLaw::gamma(2.0, 3.0);
  const auto regime = classify_tail(law);
  const auto g = RescalingG::power(0.25);
  const double x = 0.5;
  std::vector<double> gaps;
  for (double t : {1e-4, 1e-6}) {
    double worst = 0.0, at = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double u = -5.0 + 0.05 * i;
      const double gap = std::abs(finite_tilted_cf(p, law, g, t, x, u) - tilted_cf_limit(regime, x, u));
      if (gap > worst) {
        worst = gap;
        at = u;
      }
    }
    gaps.push_back(worst);
    r.rows.push_back({t, worst, at});
  }
  const double factor = gaps[0] / gaps[1];
  r.detail = "gap reduction factor " + detail::fmt(factor) + " (>= 2)";
  detail::finish(r, w, factor >= 2.0);
  return r;
}

/// AC8: t^gamma_hat sigma_t^2(x t^alpha) for FoldedGaussian(1), alpha = 1/4, x = 1.
inline ExperimentReport experiment_motm_implied_vol(const ExperimentOptions& = {}) {
  auto r = detail::make_report("ac8", "motm-impvol", "moderately out-of-the-money implied variance, FoldedGaussian(1)");
  r.budget_seconds = 120.0;
  r.columns = {"t", "call_price", "implied_variance", "scaled", "limit", "gap"};
  detail::Stopwatch w;
  const HestonParams p = reference_params();
  const auto law = RandomisationLaw::folded_gaussian(1.0);
  const auto c = thin_tail_constants(classify_tail(law));
  const double alpha = 0.25, x = 1.0;
  const auto lim = motm_implied_vol_limit(c, alpha, x);
  std::vector<double> vals, errs;
  for (int j = 2; j <= 5; ++j) {
    const double t = std::pow(10.0, -j);
    const double k = x * std::pow(t, alpha);
    const auto price = fourier_otm_price(p, law, t, k);
    const double var = implied_total_variance_otm(price.value, k) / t;
    const double scaled = std::pow(t, lim.gamma_hat) * var;
    // d log(price) / d w = phi(d1) / (2 s c): propagate the quadrature error into w.
    const double s = std::sqrt(var * t);
    const double dlogc = std::exp(log_norm_pdf(-k / s + 0.5 * s) - price.log_value) / (2.0 * s);
    vals.push_back(scaled);
    errs.push_back(std::pow(t, lim.gamma_hat) / t * (price.error / price.value) / dlogc);
    r.rows.push_back({t, price.value, var, scaled, lim.limit, std::abs(scaled - lim.limit)});
  }
  r.row_verdicts = detail::trend_verdicts(vals, errs, lim.limit);
  bool inconclusive = false;
  const bool ok = detail::all_toward(r.row_verdicts, inconclusive);
  r.detail = "limit " + detail::fmt(lim.limit) + ", final " + detail::fmt(vals.back()) +
             ", every step reduces the gap: " + (ok ? "yes" : "no");
  detail::finish(r, w, ok, inconclusive);
  return r;
}

/// AC9: log M_V(z) / (z^2 / 2) at z = 1e4 for FoldedGaussian(1).
inline ExperimentReport experiment_kasahara(const ExperimentOptions& = {}) {
  auto r = detail::make_report("ac9", "kasahara", "thin-tail MGF growth, FoldedGaussian(1)");
  r.budget_seconds = 1.0;
  r.columns = {"z", "log_mgf", "asymptote", "ratio"};
  detail::Stopwatch w;
  const auto law = RandomisationLaw::folded_gaussian(1.0);
  const double z = 1e4;
  const double lm = law_log_mgf(law, z)->real();
  const double asym = kasahara_mgf_asymptote(classify_tail(law), z);
  const double ratio = lm / (0.5 * z * z);
  r.rows.push_back({z, lm, asym, ratio});
  r.detail = "ratio " + detail::fmt(ratio) + " (in [0.98, 1.02])";
  detail::finish(r, w, ratio >= 0.98 && ratio <= 1.02);
  return r;
}

/// AC10: Fourier calls against exact-transition Monte Carlo for the four law families.
inline ExperimentReport experiment_oracle_cross(const ExperimentOptions& opt = {}) {
  auto r = detail::make_report("ac10", "oracles", "Fourier against Monte Carlo, four law families");
  r.budget_seconds = 300.0;
  r.columns = {"law", "t", "k", "fourier", "monte_carlo", "std_error", "deviation_se"};
  detail::Stopwatch w;
  const HestonParams p = reference_params();
  const std::vector<RandomisationLaw> laws = {RandomisationLaw::uniform(0.02, 0.06),
                                              RandomisationLaw::folded_gaussian(0.05),
                                              RandomisationLaw::gamma(2.0, 50.0),
                                              RandomisationLaw::noncentral_chi_squared(2.0, 1.0, 0.01)};
  bool ok = true;
  double worst = 0.0;
  for (std::size_t l = 0; l < laws.size(); ++l) {
    for (double t : {0.25, 0.5, 1.0}) {
      McConfig cfg{opt.mc_paths, 32, McScheme::exact_cir, opt.seed + 100 * l + static_cast<std::uint64_t>(8 * t),
                   opt.workers};
      const auto s = simulate_paths(p, laws[l], t, cfg);
      for (double k : {-0.1, 0.0, 0.1}) {
        const double f = fourier_call(p, laws[l], t, k).value;
        const auto mc = mc_call(s, k);
        const double z = std::abs(mc.value - f) / mc.error;
        worst = std::max(worst, z);
        ok = ok && z <= 4.0;
        r.rows.push_back({static_cast<double>(l), t, k, f, mc.value, mc.error, z});
      }
    }
  }
  r.detail = "max deviation " + detail::fmt(worst) + " SE (<= 4); law index: 0 uniform, 1 folded_gaussian, 2 gamma, "
             "3 noncentral_chi_squared";
  detail::finish(r, w, ok);
  return r;
}

struct ExperimentEntry {
  std::string id;
  std::string name;
  std::function<ExperimentReport(const ExperimentOptions&)> run;
};

inline const std::vector<ExperimentEntry>& experiments() {
  static const std::vector<ExperimentEntry> all = {
      {"ac1", "martingale", experiment_martingale},        {"ac2", "cd-order", experiment_cd_order},
      {"ac3", "bounded-support", experiment_bounded_support}, {"ac4", "thin-tail", experiment_thin_tail},
      {"ac5", "duality", experiment_conjugate_duality},    {"ac6", "sharp-call", experiment_sharp_call},
      {"ac7", "tilted-cf", experiment_tilted_cf},          {"ac8", "motm-impvol", experiment_motm_implied_vol},
      {"ac9", "kasahara", experiment_kasahara},            {"ac10", "oracles", experiment_oracle_cross},
  };
  return all;
}

/// Looks an experiment up by id (ac1..ac10) or name.
inline const ExperimentEntry& find_experiment(const std::string& key) {
  for (const auto& e : experiments()) {
    if (e.id == key || e.name == key) return e;
  }
  throw std::invalid_argument("unknown experiment '" + key + "'");
}

}  // namespace mdheston

#endif  // MDHESTON_EXPERIMENTS_HPP
