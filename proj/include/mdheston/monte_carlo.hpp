#ifndef MDHESTON_MONTE_CARLO_HPP
#define MDHESTON_MONTE_CARLO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mdheston/fourier.hpp"
#include "mdheston/heston.hpp"
#include "mdheston/laws.hpp"

namespace mdheston {

enum class McScheme { full_truncation_euler, exact_cir };

struct McConfig {
  std::size_t n_paths = 100'000;
  std::size_t n_steps = 64;
  McScheme scheme = McScheme::full_truncation_euler;
  std::uint64_t seed = 1;
  /// Worker threads; results do not depend on this value.
  unsigned workers = 1;
  /// Paths per independently seeded batch. Together with the seed this fixes the estimate.
  std::size_t batch_size = 16384;
};

struct PathSample {
  std::vector<double> x;  // X_t
  std::vector<double> v;  // V_t
};

namespace detail {

inline void validate(const McConfig& cfg) {
  if (cfg.n_paths < 1) throw std::invalid_argument("McConfig: n_paths must be >= 1");
  if (cfg.n_steps < 1) throw std::invalid_argument("McConfig: n_steps must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("McConfig: batch_size must be >= 1");
}

// One CIR transition over dt: c * chi'^2(d, v e^{-kappa dt} / c) as a Poisson mixture of gammas.
inline double cir_transition(const HestonParams& p, double v, double dt, std::mt19937_64& rng) {
  const double e = std::exp(-p.kappa() * dt);
  const double c = p.xi() * p.xi() * (-std::expm1(-p.kappa() * dt)) / (4.0 * p.kappa());
  const double dof = 4.0 * p.kappa() * p.theta() / (p.xi() * p.xi());
  const double lambda = v * e / c;
  const double n = lambda > 0.0 ? static_cast<double>(std::poisson_distribution<long long>(0.5 * lambda)(rng)) : 0.0;
  return c * std::gamma_distribution<double>(0.5 * dof + n, 2.0)(rng);
}

inline void simulate_batch(const HestonParams& p, const RandomisationLaw& law, double t, const McConfig& cfg,
                           std::size_t batch, std::size_t begin, std::size_t end, PathSample& out) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(batch & 0xffffffffu), static_cast<std::uint32_t>(batch >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  const double dt = t / static_cast<double>(cfg.n_steps);
  const double sdt = std::sqrt(dt);
  const double rho = p.rho(), rho_bar = p.rho_bar(), kappa = p.kappa(), theta = p.theta(), xi = p.xi();
  for (std::size_t i = begin; i < end; ++i) {
    double v = draw(law, rng);
    double x = 0.0;
    if (cfg.scheme == McScheme::full_truncation_euler) {
      for (std::size_t s = 0; s < cfg.n_steps; ++s) {
        const double vp = std::max(v, 0.0);
        const double sv = std::sqrt(vp) * sdt;
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        x += -0.5 * vp * dt + sv * (rho * z1 + rho_bar * z2);
        v += kappa * (theta - vp) * dt + xi * sv * z1;
      }
      v = std::max(v, 0.0);
    } else {
      for (std::size_t s = 0; s < cfg.n_steps; ++s) {
        const double next = cir_transition(p, v, dt, rng);
        const double iv = 0.5 * (v + next) * dt;  // integrated variance, trapezoid
        // int sqrt(V) dW1 recovered from the variance dynamics.
        const double w1 = (next - v - kappa * theta * dt + kappa * iv) / xi;
        x += -0.5 * iv + rho * w1 + rho_bar * std::sqrt(iv) * normal(rng);
        v = next;
      }
    }
    out.x[i] = x;
    out.v[i] = v;
  }
}

}  // namespace detail

/// Terminal samples of (X_t, V_t) with V_0 drawn from `law`. Paths are split into
/// fixed batches, batch b seeded from (seed, b), so the output is identical for
/// any number of workers.
inline PathSample simulate_paths(const HestonParams& p, const RandomisationLaw& law, double t, const McConfig& cfg) {
  detail::validate(cfg);
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("simulate_paths: t must be positive");
  PathSample out;
  out.x.resize(cfg.n_paths);
  out.v.resize(cfg.n_paths);
  const std::size_t n_batches = (cfg.n_paths + cfg.batch_size - 1) / cfg.batch_size;
  auto run = [&](std::size_t b) {
    const std::size_t begin = b * cfg.batch_size;
    const std::size_t end = std::min(cfg.n_paths, begin + cfg.batch_size);
    detail::simulate_batch(p, law, t, cfg, b, begin, end, out);
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(n_batches)));
  if (workers == 1) {
    for (std::size_t b = 0; b < n_batches; ++b) run(b);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < n_batches; b += workers) run(b);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

/// Sample mean of f over the values with its standard error.
inline OracleEstimate mc_mean(const std::vector<double>& values, const std::function<double(double)>& f,
                              std::string method = "monte-carlo") {
  if (values.empty()) throw std::invalid_argument("mc_mean: empty sample");
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    const double y = f(v);
    ++n;
    const double d = y - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (y - mean);
  }
  OracleEstimate out;
  out.value = mean;
  out.error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  out.method = std::move(method);
  out.log_value = std::log(mean);
  return out;
}

/// Monte Carlo call price E (e^{X_t} - e^k)^+.
inline OracleEstimate mc_call(const PathSample& s, double k) {
  const double ek = std::exp(k);
  return mc_mean(s.x, [ek](double x) { return std::max(std::exp(x) - ek, 0.0); }, "monte-carlo-call");
}

/// Monte Carlo E exp(u X_t).
inline OracleEstimate mc_mgf(const PathSample& s, double u) {
  return mc_mean(s.x, [u](double x) { return std::exp(u * x); }, "monte-carlo-mgf");
}

/// Monte Carlo P(X_t >= threshold).
inline OracleEstimate mc_tail(const PathSample& s, double threshold) {
  return mc_mean(s.x, [threshold](double x) { return x >= threshold ? 1.0 : 0.0; }, "monte-carlo-tail");
}

}  // namespace mdheston

#endif  // MDHESTON_MONTE_CARLO_HPP
