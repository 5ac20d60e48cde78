#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mdheston/black_scholes.hpp"
#include "mdheston/fourier.hpp"

using namespace mdheston;

namespace {

const HestonParams base(1.0, 0.04, 0.5, -0.7);

}  // namespace

TEST(FourierCall, StandardHestonReference) {
  // 30-digit quadrature of the same representation at shifts 1.5 and -0.5.
  const auto r = fourier_call(base, RandomisationLaw::point_mass(0.04), 1.0, 0.0);
  EXPECT_NEAR(r.value, 0.067929147398749483, 1e-10);
  EXPECT_LT(r.error, 1e-8);
  ContourOptions fixed;
  fixed.shift = 1.5;
  EXPECT_NEAR(fourier_call(base, RandomisationLaw::point_mass(0.04), 1.0, 0.0, fixed).value, 0.067929147398749483,
              1e-10);
  fixed.rule = ShiftRule::quarter_domain;
  fixed.shift.reset();
  EXPECT_NEAR(fourier_call(base, RandomisationLaw::point_mass(0.04), 1.0, 0.0, fixed).value, 0.067929147398749483,
              1e-9);
}

TEST(FourierCall, DeepInTheMoney) {
  const auto r = fourier_call(base, RandomisationLaw::gamma(2.0, 50.0), 1.0, -10.0);
  EXPECT_NEAR(r.value, 1.0 - std::exp(-10.0), 1e-6);
}

TEST(FourierCall, PutCallParity) {
  for (const auto& law : {RandomisationLaw::uniform(0.02, 0.06), RandomisationLaw::folded_gaussian(0.05),
                          RandomisationLaw::gamma(2.0, 50.0), RandomisationLaw::noncentral_chi_squared(2.0, 1.0, 0.01)}) {
    for (double k : {-0.2, 0.15}) {
      ContourOptions call_side, put_side;
      call_side.shift = 1.5;
      put_side.shift = -0.5;
      const double c = fourier_call(base, law, 0.5, k, call_side).value;
      const double c_via_put = fourier_call(base, law, 0.5, k, put_side).value;
      EXPECT_NEAR(c, c_via_put, 1e-10) << law.name() << " " << k;
    }
  }
}

TEST(FourierCall, ConstantVarianceLimitMatchesBlackScholes) {
  // Tiny vol-of-vol with v0 = theta: X_t is Gaussian with total variance theta t.
  const HestonParams p(1.0, 0.04, 1e-5, 0.0);
  for (double k : {-0.3, 0.0, 0.25}) {
    EXPECT_NEAR(fourier_call(p, RandomisationLaw::point_mass(0.04), 0.5, k).value, bs_price(0.02, k), 1e-9) << k;
  }
}

TEST(FourierCall, TinyPricesKeepRelativeAccuracy) {
  // Constant-variance limit again, deep out of the money: relative agreement in log space.
  const HestonParams p(1.0, 0.04, 1e-5, 0.0);
  const auto r = fourier_otm_price(p, RandomisationLaw::point_mass(0.04), 1e-3, 0.2);
  EXPECT_NEAR(r.log_value, bs_log_otm_price(0.04 * 1e-3, 0.2), 1e-6);
  EXPECT_LT(r.log_value, -400.0);
}

TEST(FourierCall, NoAdmissibleContourReported) {
  ContourOptions bad;
  bad.shift = 0.5;
  EXPECT_THROW(fourier_call(base, RandomisationLaw::point_mass(0.04), 1.0, 0.1, bad), std::domain_error);
}

TEST(TailProbability, FarLeftThresholdIsOne) {
  const auto r = tail_probability(base, RandomisationLaw::uniform(0.02, 0.06), 1.0, -20.0);
  EXPECT_GE(r.value, 1.0 - 1e-8);
}

TEST(TailProbability, GilPelaezAgreesWithContour) {
  ContourOptions gp;
  gp.shift = 0.0;
  for (const auto& law : {RandomisationLaw::gamma(2.0, 50.0), RandomisationLaw::folded_gaussian(0.2)}) {
    for (double k : {-0.2, -0.05, 0.0, 0.1}) {
      const auto a = tail_probability(base, law, 0.5, k);
      const auto b = tail_probability(base, law, 0.5, k, gp);
      EXPECT_NEAR(a.value, b.value, 1e-8) << law.name() << " " << k;
    }
  }
}

TEST(TailProbability, GaussianLimit) {
  const HestonParams p(1.0, 0.04, 1e-5, 0.0);
  const double t = 0.25, w = 0.04 * t;
  for (double k : {-0.3, -0.01, 0.05, 0.4}) {
    const auto r = tail_probability(p, RandomisationLaw::point_mass(0.04), t, k);
    const double z = (k + 0.5 * w) / std::sqrt(w);
    EXPECT_NEAR(r.log_value, log_norm_cdf(-z), 1e-7) << k;
  }
}

TEST(TailProbability, SymmetryAtZeroCorrelationAfterMeanShift) {
  const HestonParams p(1.0, 0.04, 0.3, 0.0);
  const auto law = RandomisationLaw::uniform(0.03, 0.05);
  const double t = 0.01;
  const double h = 1e-5;
  const double mean = (randomised_log_mgf(p, law, t, h)->real() - randomised_log_mgf(p, law, t, -h)->real()) / (2 * h);
  for (double c : {0.01, 0.03}) {
    const double up = tail_probability(p, law, t, mean + c).value;
    const double down = 1.0 - tail_probability(p, law, t, mean - c).value;
    EXPECT_NEAR(up / down, 1.0, 0.05) << c;
  }
}

TEST(RandomisedDomain, GammaCutsBeforeHestonExplosion) {
  const auto law = RandomisationLaw::gamma(2.0, 3.0);
  const double t = 1e-3;
  const auto dom = randomised_real_domain(base, law, t);
  const auto heston = real_mgf_domain(base, t);
  EXPECT_LT(dom.upper, heston.upper);
  EXPECT_GT(dom.lower, heston.lower);
  EXPECT_NEAR(mgf_components(base, t, dom.upper).d_value.real(), 3.0, 1e-8);
  EXPECT_NEAR(mgf_components(base, t, dom.lower).d_value.real(), 3.0, 1e-8);
}
