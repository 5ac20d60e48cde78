#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mdheston/mdp_rates.hpp"

using namespace mdheston;

namespace {

const HestonParams duality_params(1.0, 0.04, 0.5, -0.3);

}  // namespace

TEST(BoundedSupportRate, Examples) {
  EXPECT_EQ(bounded_support_rate(2.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(bounded_support_rate(2.0, 1.0), 0.25);
  EXPECT_EQ(bounded_support_rate(2.0, -1.3), bounded_support_rate(2.0, 1.3));
}

TEST(FatTailRate, Examples) {
  EXPECT_EQ(fat_tail_rate(3.0, 0.0), 0.0);
  EXPECT_NEAR(fat_tail_rate(3.0, 1.0), std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(fat_tail_rate(3.0, 2.5), 2.5 * fat_tail_rate(3.0, 1.0), 1e-14);
}

TEST(ThinTailConstants, Examples) {
  const auto a = thin_tail_constants(0.5, 2.0);
  EXPECT_DOUBLE_EQ(a.gamma_lo, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(a.gamma_hi, 2.0);
  EXPECT_NEAR(a.c_lo, std::cbrt(2.0), 1e-15);
  EXPECT_NEAR(a.c_hi, 0.5, 1e-15);
  const auto b = thin_tail_constants(1.0, 2.0);
  EXPECT_NEAR(b.c_lo, std::cbrt(4.0), 1e-15);
  EXPECT_NEAR(b.c_hi, 0.25, 1e-15);
  EXPECT_THROW(thin_tail_constants(1.0, 1.0), std::invalid_argument);
}

TEST(ThinTailConstants, OrderingAndProductIdentity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> l1(0.01, 10.0), l2(1.01, 8.0);
  for (int i = 0; i < 500; ++i) {
    const auto c = thin_tail_constants(l1(rng), l2(rng));
    const double l = c.gamma_hi / (c.gamma_hi - 1.0);
    EXPECT_LT(c.gamma_lo, 1.0);
    EXPECT_GT(c.gamma_lo, 0.5);
    EXPECT_GT(c.gamma_hi, 1.0);
    EXPECT_NEAR(std::pow(c.c_lo, 1.0 + l) * std::pow(c.c_hi, l - 1.0), 1.0, 1e-10);
  }
}

TEST(ThinTailRateLo, Examples) {
  const auto c = thin_tail_constants(1.0, 2.0);
  EXPECT_EQ(thin_tail_rate_lo(c, 0.0), 0.0);
  EXPECT_NEAR(thin_tail_rate_lo(c, 1.0), std::cbrt(4.0) * 0.75, 1e-15);
  EXPECT_NEAR(thin_tail_rate_lo(c, 1.0), 1.19055, 1e-5);
  for (double lam : {0.3, 2.0, 7.5}) {
    EXPECT_NEAR(thin_tail_rate_lo(c, lam * 1.7), std::pow(lam, 2.0 * c.gamma_lo) * thin_tail_rate_lo(c, 1.7), 1e-12);
  }
  EXPECT_EQ(thin_tail_rate_lo(c, -0.8), thin_tail_rate_lo(c, 0.8));
}

TEST(ThinTailRateLo, ContinuousInParameters) {
  const double base = thin_tail_rate_lo(thin_tail_constants(1.0, 2.0), 1.0);
  EXPECT_LE(std::abs(thin_tail_rate_lo(thin_tail_constants(1.0 + 1e-6, 2.0), 1.0) - base), 1e-5);
  EXPECT_LE(std::abs(thin_tail_rate_lo(thin_tail_constants(1.0, 2.0 + 1e-6), 1.0) - base), 1e-5);
}

TEST(ThinTailRateHi, ZeroAndFenchelYoung) {
  const auto c = thin_tail_constants(1.0, 2.0);
  const LimitCgf lam(duality_params);
  const auto z = thin_tail_rate_hi(c, lam, 0.0);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_EQ(z.maximiser, 0.0);

  const BoundaryCgf f(c, lam);
  const auto r = thin_tail_rate_hi(c, lam, 1.0);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.value, r.maximiser - f.value(r.maximiser), 1e-8);
  EXPECT_NEAR(f.derivative(r.maximiser), 1.0, 1e-12);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(lam.u_minus(), lam.u_plus());
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_GE(r.value, v - f.value(v) - 1e-12);
  }
}

TEST(ThinTailRateHi, MatchesGridSupremum) {
  const auto c = thin_tail_constants(1.0, 2.0);
  const LimitCgf lam(duality_params);
  const BoundaryCgf f(c, lam);
  std::vector<double> us, fs;
  for (double u = lam.u_minus() + 1e-4; u < lam.u_plus(); u += 1e-4) {
    us.push_back(u);
    fs.push_back(f.value(u));
  }
  for (double x = -3.0; x <= 3.0; x += 0.5) {
    double best = -inf;
    for (std::size_t i = 0; i < us.size(); ++i) best = std::max(best, us[i] * x - fs[i]);
    const double v = thin_tail_rate_hi(c, lam, x).value;
    EXPECT_GE(v, best - 1e-12);
    EXPECT_NEAR(v, best, 1e-6) << x;
  }
}

TEST(ThinTailRateHi, ConvexNondecreasingOnPositiveAxis) {
  const auto c = thin_tail_constants(0.5, 2.0);
  for (double rho : {-0.9, 0.0, 0.6, -1.0}) {
    const LimitCgf lam(HestonParams(1.0, 0.04, 0.7, rho));
    std::vector<double> v;
    for (int i = -60; i <= 60; ++i) v.push_back(thin_tail_rate_hi(c, lam, 0.05 * i).value);
    for (std::size_t i = 1; i + 1 < v.size(); ++i) EXPECT_GE(v[i + 1] - 2 * v[i] + v[i - 1], -1e-9) << rho;
    for (std::size_t i = 61; i < v.size(); ++i) EXPECT_GE(v[i], v[i - 1]);
    EXPECT_EQ(v[60], 0.0);
  }
}

TEST(MdpRegime, WindowsAndRates) {
  const HestonParams p(1.0, 0.04, 0.5, -0.7);
  const auto b = make_regime(TailRegime::bounded(2.0), p, 0.5);
  EXPECT_DOUBLE_EQ(b.alpha, 0.25);
  EXPECT_DOUBLE_EQ(b.rate(1.0), 0.25);
  EXPECT_THROW(make_regime(TailRegime::bounded(2.0), p, 1.0), std::invalid_argument);

  const auto thin = TailRegime::thin(1.0, 2.0);
  const auto t1 = make_regime(thin, p, 0.5);
  EXPECT_FALSE(t1.boundary);
  EXPECT_NEAR(t1.alpha, 0.5 * (1.0 - 0.5 / (2.0 / 3.0)), 1e-15);
  EXPECT_NEAR(t1.rate(1.0), 1.19055, 1e-5);
  const auto t2 = make_regime(thin, p, 2.0);
  EXPECT_TRUE(t2.boundary);
  EXPECT_DOUBLE_EQ(t2.alpha, -1.0);
  EXPECT_GT(t2.rate(1.0), 0.0);
  EXPECT_THROW(make_regime(thin, p, 2.1), std::invalid_argument);
  // Beyond gamma_lo the scaling exponent alpha turns negative but stays admissible.
  EXPECT_LT(make_regime(thin, p, 1.5).alpha, 0.0);

  const auto fat = make_regime(TailRegime::fat(3.0, -2.0, 2.0 * std::log(3.0), 1), p, 0.25);
  EXPECT_DOUBLE_EQ(fat.alpha, 0.25);
  EXPECT_NEAR(fat.rate(1.0), std::sqrt(6.0), 1e-15);
  EXPECT_THROW(make_regime(TailRegime::fat(3.0, -2.0, 0.0, 1), p, 0.5), std::invalid_argument);
}

TEST(MotmTail, Examples) {
  const HestonParams p(1.0, 0.04, 0.5, -0.7);
  const auto r = make_regime(TailRegime::thin(1.0, 2.0), p, 0.5);
  EXPECT_NEAR(motm_tail_asymptote(r, 1.0, 1e-4), -119.055, 1e-3);
  EXPECT_THROW(motm_tail_asymptote(r, 0.0, 1e-4), std::invalid_argument);
  EXPECT_THROW(motm_tail_asymptote(make_regime(TailRegime::thin(1.0, 2.0), p, 2.0), 1.0, 1e-4),
               std::invalid_argument);
  const auto c = thin_tail_constants(1.0, 2.0);
  const auto sv = slowly_varying_tail(c, [](double) { return 1.0; }, 0.5, 1e-4);
  EXPECT_DOUBLE_EQ(sv.log_probability, motm_tail_asymptote(r, 1.0, 1e-4));
  EXPECT_DOUBLE_EQ(sv.alpha, r.alpha);
}

TEST(SlowlyVaryingTail, Examples) {
  const auto c = thin_tail_constants(1.0, 2.0);
  auto s = [](double t) { return std::log(1.0 / t); };
  const double t = 1e-3;
  const auto r = slowly_varying_tail(c, s, 0.5, t);
  EXPECT_NEAR(r.log_probability, -(std::cbrt(4.0) * 0.75) * std::pow(std::log(1000.0), 4.0 / 3.0) / std::pow(t, 0.5),
              1e-9);
  EXPECT_NEAR(thin_tail_rate_lo(c, s(t)), thin_tail_rate_lo(c, 1.0) * std::pow(s(t), 2.0 * c.gamma_lo), 1e-12);
  EXPECT_THROW(slowly_varying_tail(c, [](double) { return -1.0; }, 0.5, t), std::invalid_argument);
  EXPECT_THROW(slowly_varying_tail(c, s, 0.7, t), std::invalid_argument);
}

TEST(MotmImpliedVol, Examples) {
  const auto c = thin_tail_constants(1.0, 2.0);
  const auto r = motm_implied_vol_limit(c, 0.25, 1.0);
  EXPECT_NEAR(r.gamma_hat, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(r.limit, (2.0 / 3.0) / std::cbrt(4.0), 1e-15);
  EXPECT_NEAR(r.limit, 0.41997, 1e-5);
  EXPECT_EQ(motm_implied_vol_limit(c, 0.25, -1.3).limit, motm_implied_vol_limit(c, 0.25, 1.3).limit);
  EXPECT_NEAR(motm_implied_vol_limit(c, 0.25, 2.0).limit / r.limit, std::pow(2.0, 2.0 * (1.0 - c.gamma_lo)), 1e-14);
  EXPECT_NO_THROW(motm_implied_vol_limit(c, -0.5, 1.0));
  EXPECT_THROW(motm_implied_vol_limit(c, -1.5, 1.0), std::invalid_argument);
  EXPECT_THROW(motm_implied_vol_limit(c, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(motm_implied_vol_limit(c, 0.6, 1.0), std::invalid_argument);
}

TEST(GartnerEllis, BoundedSupportRescaledCgfConverges) {
  // t^gamma log M(t, u / t^(gamma + alpha)) -> v_plus u^2 / 2 with gamma = 1/2, alpha = 1/4.
  const HestonParams p(1.0, 0.04, 0.5, -0.7);
  const auto law = RandomisationLaw::uniform(1.0, 2.0);
  for (double u : {-1.0, -0.5, 0.5, 1.0}) {
    double prev = inf;
    for (int j = 3; j <= 6; ++j) {
      const double t = std::pow(10.0, -j);
      const auto lm = randomised_log_mgf(p, law, t, u / std::pow(t, 0.75));
      ASSERT_TRUE(lm);
      const double gap = std::abs(std::sqrt(t) * lm->real() - u * u);
      EXPECT_LT(gap, prev) << u << " " << t;
      prev = gap;
    }
  }
}
