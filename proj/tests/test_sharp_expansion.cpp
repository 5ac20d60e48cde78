#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "mdheston/black_scholes.hpp"
#include "mdheston/quadrature.hpp"
#include "mdheston/sharp_expansion.hpp"

using namespace mdheston;

namespace {

const HestonParams base(1.0, 0.04, 0.5, -0.7);
const RandomisationLaw gamma23 = RandomisationLaw::gamma(2.0, 3.0);
const RescalingG quarter = RescalingG::power(0.25);

}  // namespace

TEST(RescalingG, PowerOnTestGrid) {
  EXPECT_GT(quarter.g(1e-2), quarter.g(1e-8));
  EXPECT_LT(quarter.g(1e-8), 1e-1);
  EXPECT_GT(quarter.h(1e-2), quarter.h(1e-8));
  EXPECT_LT(quarter.h(1e-8), 0.011);
  EXPECT_NEAR(quarter.g(1e-4) * quarter.h(1e-4), 1e-2, 1e-17);
  EXPECT_THROW(RescalingG::power(0.5), std::invalid_argument);
  EXPECT_THROW(RescalingG::power(0.0), std::invalid_argument);
  EXPECT_THROW(quarter.g(0.0), std::invalid_argument);
}

TEST(RescaledCgf, ZeroAndRegression) {
  EXPECT_EQ(*rescaled_cgf(base, gamma23, quarter, 1e-4, 0.0), 0.0);
  // 50-digit evaluation of the same closed form.
  EXPECT_NEAR(*rescaled_cgf(base, gamma23, quarter, 1e-4, 1.0), 0.035993851080229747, 1e-16);
}

TEST(RescaledCgf, ConvexOnGrid) {
  const double t = 1e-4;
  const double du = 0.02;
  for (double u = -2.0; u <= 2.0; u += 0.1) {
    const double a = *rescaled_cgf(base, gamma23, quarter, t, u - du);
    const double b = *rescaled_cgf(base, gamma23, quarter, t, u);
    const double c = *rescaled_cgf(base, gamma23, quarter, t, u + du);
    EXPECT_GT(a - 2 * b + c, 0.0) << u;
  }
}

TEST(RescaledCgf, UndefinedPastExplosionAndWrongLaw) {
  EXPECT_FALSE(rescaled_cgf(base, gamma23, quarter, 1e-4, 3.0).has_value());
  EXPECT_THROW(rescaled_cgf(base, RandomisationLaw::uniform(1, 2), quarter, 1e-4, 0.5), std::invalid_argument);
  EXPECT_THROW(rescaled_cgf(base, RandomisationLaw::noncentral_chi_squared(2, 1, 0.1), quarter, 1e-4, 0.5),
               std::invalid_argument);
}

TEST(RescaledCgf, AnalyticDerivativeMatchesDifference) {
  const double t = 1e-4;
  for (double u : {-1.5, -0.3, 0.4, 1.2, 2.0}) {
    const double e = 1e-6;
    const double fd = (*rescaled_cgf(base, gamma23, quarter, t, u + e) - *rescaled_cgf(base, gamma23, quarter, t, u - e)) /
                      (2 * e);
    EXPECT_NEAR(*rescaled_cgf_derivative(base, gamma23, quarter, t, u), fd, 1e-7 * std::max(1.0, std::abs(fd))) << u;
  }
}

TEST(SaddlePoint, AsymptoticFormExample) {
  // m = 3, gamma0 = -2; g(t) = t^{1/4} at t = 1e-8 gives h = 0.01.
  const auto s = saddle_point(base, gamma23, quarter, 1e-8, 1.0, SaddleMethod::asymptotic);
  EXPECT_NEAR(s.u_star, std::sqrt(6.0) - 0.02, 1e-12);
  EXPECT_EQ(s.method, SaddleMethod::asymptotic);
}

TEST(SaddlePoint, ResidualOnGrid) {
  for (double t : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    for (double x : {-1.0, -0.5, 0.25, 0.5, 1.0}) {
      const auto s = saddle_point(base, gamma23, quarter, t, x);
      EXPECT_LE(std::abs(s.residual), 1e-10 * std::max(1.0, std::abs(x))) << t << " " << x;
      EXPECT_EQ(s.u_star > 0, x > 0);
    }
  }
}

TEST(SaddlePoint, ReflectionAtZeroCorrelation) {
  // With rho = 0 the cgf is symmetric about u = sqrt(t) / 2, so u*(-x) = sqrt(t) - u*(x).
  const HestonParams p(1.0, 0.04, 0.5, 0.0);
  for (double t : {1e-3, 1e-5}) {
    for (double x : {0.3, 0.8}) {
      const double a = saddle_point(p, gamma23, quarter, t, x).u_star;
      const double b = saddle_point(p, gamma23, quarter, t, -x).u_star;
      EXPECT_NEAR(a + b, std::sqrt(t), 1e-9) << t << " " << x;
    }
  }
}

TEST(SaddlePoint, ExactMinusAsymptoticIsOrderSqrtT) {
  // With g = t^{1/4}, h^2 = sqrt(t): halving t divides the gap by about sqrt(2).
  const double x = 0.5;
  double prev = 0.0;
  for (double t : {1e-5, 5e-6, 2.5e-6}) {
    const double gap = std::abs(saddle_point(base, gamma23, quarter, t, x).u_star -
                                saddle_point(base, gamma23, quarter, t, x, SaddleMethod::asymptotic).u_star);
    if (prev > 0.0) {
      EXPECT_GT(prev / gap, 1.2);
      EXPECT_LT(prev / gap, 1.8);
    }
    prev = gap;
  }
}

TEST(SaddlePoint, RejectsZeroStrikeAndLargeTime) {
  EXPECT_THROW(saddle_point(base, gamma23, quarter, 1e-4, 0.0), std::invalid_argument);
}

TEST(TiltedCfLimit, Examples) {
  const auto r = classify_tail(gamma23);
  EXPECT_EQ(tilted_cf_limit(r, 1.0, 0.0), cplx(1.0, 0.0));
  const cplx expected = std::exp(cplx(0, -1)) / std::pow(cplx(1.0, -0.5), 2);
  const cplx got = tilted_cf_limit(r, 1.0, 1.0);
  EXPECT_NEAR(got.real(), expected.real(), 1e-15);
  EXPECT_NEAR(got.imag(), expected.imag(), 1e-15);
  EXPECT_NEAR(std::abs(got), 0.8, 1e-15);
}

TEST(TiltedCfLimit, OmegaTwoIsGaussian) {
  const auto r = classify_tail(RandomisationLaw::noncentral_chi_squared(2.0, 1.0, 0.1));
  ASSERT_EQ(r.omega, 2);
  EXPECT_EQ(tilted_cf_limit(r, 0.7, 0.0), cplx(1.0, 0.0));
  for (double u : {-3.0, -0.5, 0.2, 1.0, 4.0}) {
    const cplx v = tilted_cf_limit(r, 0.7, u);
    EXPECT_EQ(v.imag(), 0.0);
    EXPECT_GT(v.real(), 0.0);
    EXPECT_LE(v.real(), 1.0);
  }
}

TEST(TiltedCf, FiniteTimeConvergesToLimit) {
  const auto r = classify_tail(gamma23);
  auto max_gap = [&](double t) {
    double m = 0.0;
    for (double u = -5.0; u <= 5.0; u += 0.25) {
      m = std::max(m, std::abs(finite_tilted_cf(base, gamma23, quarter, t, 0.5, u) - tilted_cf_limit(r, 0.5, u)));
    }
    return m;
  };
  const double a = max_gap(1e-4), b = max_gap(1e-6);
  EXPECT_LT(b, a);
  EXPECT_EQ(finite_tilted_cf(base, gamma23, quarter, 1e-4, 0.5, 0.0), cplx(1.0, 0.0));
}

TEST(GammaLimitDensity, ExampleAndMass) {
  EXPECT_NEAR(gamma_limit_density(-2.0, 1.0, 1.0), 4.0 * std::exp(-2.0), 1e-15);
  HalfLineOptions opt{{1e-14, 1e-12, 2000}, 1e-16, 200};
  const auto mass = integrate_half_line([](double y) { return y > 0.0 ? gamma_limit_density(-2.5, 0.7, y) : 0.0; }, 0.0, 1.0, opt);
  EXPECT_NEAR(mass.value, 1.0, 1e-10);
  EXPECT_THROW(gamma_limit_density(1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(gamma_limit_density(-2.0, 1.0, 0.0), std::invalid_argument);
}

TEST(GammaLimitDensity, FourierPairWithTiltedLimit) {
  // f(y) = (1/pi) int_0^inf Re[e^{-iuy} e^{iux} Psi(u)] du.
  const auto r = classify_tail(gamma23);
  const double x = 1.0;
  for (double y : {0.5, 1.0, 2.0}) {
    auto f = [&](double u) {
      return (std::exp(cplx(0.0, u * (x - y))) * tilted_cf_limit(r, x, u)).real();
    };
    HalfLineOptions opt{{1e-10, 1e-10, 4000}, 1e-14, 400};
    const auto v = integrate_half_line(f, 0.0, 1.0, opt);
    EXPECT_NEAR(v.value / std::numbers::pi, gamma_limit_density(r.gamma0, x, y), 1e-6) << y;
  }
}

TEST(CallExpansion, RegressionAndStructure) {
  const auto c = call_expansion(gamma23, quarter, 1e-4, 0.5);
  // 40-digit evaluation of the same expression.
  EXPECT_NEAR(c.exponent, -10.000224136579671108, 1e-13);
  EXPECT_NEAR(c.prefactor, 1.3888888888888888889e-4, 1e-19);
  EXPECT_NEAR(c.log_correction, -18.882060441583817787, 1e-13);
  EXPECT_EQ(c.intrinsic, 0.0);
  EXPECT_GT(c.full_value, c.intrinsic);
  EXPECT_EQ(c.claimed_error, "1+o(1)");
}

TEST(CallExpansion, PutSideAndMonotoneExponent) {
  const double t = 1e-4;
  const auto c = call_expansion(gamma23, quarter, t, -0.5);
  EXPECT_NEAR(c.intrinsic, -std::expm1(-0.5 * quarter.g(t)), 1e-16);
  EXPECT_GT(c.intrinsic, 0.0);
  EXPECT_GT(c.full_value, c.intrinsic);
  double prev = 0.0;
  for (double x = 0.1; x < 3.0; x += 0.1) {
    const double e = call_expansion(gamma23, quarter, t, x).exponent;
    if (x > 0.15) {
      EXPECT_LT(e, prev);
    }
    prev = e;
    EXPECT_LT(call_expansion(gamma23, quarter, t, -x - 0.05).exponent,
              call_expansion(gamma23, quarter, t, -x).exponent);
  }
  EXPECT_THROW(call_expansion(gamma23, quarter, t, 0.0), std::invalid_argument);
}

TEST(ImpliedVarExpansion, Coefficients) {
  const auto r = classify_tail(gamma23);
  EXPECT_NEAR(implied_var_h2(r), -1.0 / 16.0, 1e-16);
  // 40-digit evaluation of the full right-hand side.
  EXPECT_NEAR(implied_var_expansion(gamma23, quarter, 1e-4, 0.5), 1.1916837528682280589, 1e-14);
}

TEST(ImpliedVarExpansion, LeadingTermDoubles) {
  const auto r = classify_tail(gamma23);
  const double t = 1e-5;
  auto leading = [&](double x) {
    const double xt = x * quarter.g(t);
    return implied_var_expansion(gamma23, quarter, t, x) - implied_var_h1(r, xt) - implied_var_h2(r) * std::log(t) -
           std::log(quarter.g(t)) / (4.0 * r.m);
  };
  EXPECT_NEAR(leading(1.0), 2.0 * leading(0.5), 1e-12);
}

TEST(ImpliedVarExpansion, BlackScholesRoundTripGapShrinks) {
  const double x = 0.5;
  double prev = inf;
  for (int j = 3; j <= 6; ++j) {
    const double t = std::pow(10.0, -j);
    const double k = x * quarter.g(t);
    const auto c = call_expansion(gamma23, quarter, t, x);
    const double bs = bs_price(implied_var_expansion(gamma23, quarter, t, x) * t, k);
    const double gap = std::abs(bs - c.full_value) / (c.full_value - c.intrinsic);
    EXPECT_LT(gap, prev) << j;
    prev = gap;
  }
}
