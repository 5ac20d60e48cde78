#include <gtest/gtest.h>

#include <cmath>

#include "mdheston/black_scholes.hpp"

using namespace mdheston;

TEST(BlackScholes, AtTheMoneyClosedForm) {
  EXPECT_NEAR(bs_price(0.04, 0.0), 2.0 * norm_cdf(0.1) - 1.0, 1e-15);
  EXPECT_NEAR(bs_price(0.04, 0.0), 0.0797, 1e-4);
}

TEST(BlackScholes, MatchesTextbookFormula) {
  for (double w : {0.01, 0.09, 0.5}) {
    for (double k : {-0.3, -0.05, 0.02, 0.2}) {
      const double s = std::sqrt(w);
      const double d1 = -k / s + 0.5 * s;
      const double ref = norm_cdf(d1) - std::exp(k) * norm_cdf(d1 - s);
      EXPECT_NEAR(bs_price(w, k), ref, 1e-14) << w << " " << k;
    }
  }
}

TEST(BlackScholes, DeepOutOfTheMoneyLogPrice) {
  // Far below machine range of the closed form; reference from 60-digit arithmetic.
  EXPECT_NEAR(bs_log_otm_price(1e-4, 0.5), -1263.0993655444768345, 1e-10);
  // Continuity across the switch between closed form and integral.
  for (double ww = 0.002; ww < 0.02; ww *= 1.05) {
    const double a = bs_log_otm_price(ww, 0.3), b = bs_log_otm_price(ww * (1 + 1e-7), 0.3);
    EXPECT_GT(b, a);
    EXPECT_LT(b - a, 1e-3);
  }
}

TEST(BlackScholes, PutCallSymmetry) {
  EXPECT_NEAR(bs_log_otm_price(0.05, -0.2), -0.2 + bs_log_otm_price(0.05, 0.2), 1e-14);
}

TEST(ImpliedVol, RoundTrip) {
  EXPECT_NEAR(implied_vol(bs_price(0.04, 0.1), 0.1, 1.0), 0.2, 1e-10);
  for (double vol : {0.05, 0.3, 1.2}) {
    for (double t : {1e-4, 0.1, 2.0}) {
      for (double k : {-0.4, -0.01, 0.0, 0.05, 0.6}) {
        const double w = vol * vol * t;
        const double otm = std::exp(bs_log_otm_price(w, k));
        if (otm < 1e-300) continue;
        EXPECT_NEAR(implied_total_variance_otm(otm, k) / w, 1.0, 1e-12) << vol << " " << t << " " << k;
      }
    }
  }
}

TEST(ImpliedVol, TinyPricesInLogSpace) {
  const double w = 2e-4, k = 0.3;
  const double logc = bs_log_otm_price(w, k);
  EXPECT_LT(logc, -200.0);
  EXPECT_NEAR(implied_total_variance_otm(std::exp(logc), k) / w, 1.0, 1e-10);
}

TEST(ImpliedVol, Boundaries) {
  EXPECT_EQ(implied_vol(0.0, 0.1, 1.0), 0.0);
  const double v = implied_vol(1e-15, 0.1, 1.0);
  EXPECT_GE(v, 0.0);
  EXPECT_LT(v, 0.05);
  const double itm = -std::expm1(-0.1);
  EXPECT_LT(implied_vol(itm + 1e-15, -0.1, 1.0), 0.05);
  EXPECT_THROW(implied_vol(itm - 1e-6, -0.1, 1.0), std::domain_error);
  EXPECT_THROW(implied_vol(1.0, 0.1, 1.0), std::domain_error);
  EXPECT_THROW(implied_vol(0.1, 0.1, 0.0), std::invalid_argument);
}
