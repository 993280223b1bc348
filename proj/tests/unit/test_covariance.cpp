#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "ccx/covariance.hpp"
#include "ccx/errors.hpp"

namespace {

// Adaptive Gauss-Kronrod on the defining proper-time integral.
double reference_cov(double r, int d) {
  auto f = [&](double a) {
    return std::pow(4.0 * std::numbers::pi * a, -0.5 * d) * std::exp(-a - r * r / (4.0 * a));
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.5, 1.0, 10, 1e-15);
}

}  // namespace

TEST(Covariance, MatchesAdaptiveQuadrature) {
  const ccx::CovarianceKernel c1({1, 32});
  const ccx::CovarianceKernel c2({2, 32});
  for (double r : {0.0, 0.3, 1.0, 1.5, 2.0, 4.0, 9.0}) {
    EXPECT_NEAR(c1(r), reference_cov(r, 1), 1e-14 + 1e-12 * reference_cov(r, 1)) << r;
    EXPECT_NEAR(c2(r), reference_cov(r, 2), 1e-14 + 1e-12 * reference_cov(r, 2)) << r;
  }
}

TEST(Covariance, KnownValues) {
  const ccx::CovarianceKernel c;
  EXPECT_NEAR(c(0.0), 0.0800056504, 1e-10);
  EXPECT_NEAR(c(2.0), 0.0194442185, 1e-10);
}

TEST(Covariance, SymmetricInPoints) {
  const ccx::Point a{0.3, 0.0}, b{2.1, 0.0};
  EXPECT_DOUBLE_EQ(ccx::covariance(a, b), ccx::covariance(b, a));
}

TEST(Covariance, FullKernelInOneDimension) {
  // Integral over all proper times of the heat kernel times e^{-alpha}.
  for (double r : {0.0, 0.5, 1.0, 3.0, 7.0}) EXPECT_NEAR(ccx::full_covariance_r(r, 1), 0.5 * std::exp(-r), 1e-10);
}

TEST(Covariance, FullKernelSingularInTwoDimensions) {
  EXPECT_THROW(ccx::full_covariance_r(0.0, 2), ccx::SingularityError);
  // K_0(r) / (2 pi)
  EXPECT_NEAR(ccx::full_covariance_r(1.0, 2), 0.42102443824070834 / (2 * std::numbers::pi), 1e-9);
}

TEST(Covariance, RejectsBadParameters) {
  EXPECT_THROW(ccx::CovarianceKernel({3, 32}), std::invalid_argument);
  EXPECT_THROW(ccx::CovarianceKernel({1, 4}), std::invalid_argument);
  EXPECT_THROW(ccx::covariance({NAN, 0.0}, {0.0, 0.0}), std::domain_error);
}

TEST(Covariance, DecayCertificate) {
  const auto cert = ccx::decay_constant({});
  EXPECT_GT(cert.min_value, 0.0);
  EXPECT_LE(cert.max_violation, 0.0);
  const ccx::CovarianceKernel c;
  for (double r = 0.0; r <= 20.0; r += 0.37) EXPECT_LE(c(r), cert.c1 * std::exp(-2.0 * r) * (1 + 1e-9));
  EXPECT_LT(ccx::decay_refinement_drift({}), 0.01);
  EXPECT_THROW(ccx::decay_constant({}, 5.0), std::invalid_argument);
}

TEST(Covariance, MatrixIsPositiveDefinite) {
  std::vector<ccx::Point> pts;
  for (int i = 0; i < 13; ++i) pts.push_back({0.5 * i, 0.0});
  EXPECT_GT(ccx::psd_check(pts), 0.0);
  std::vector<ccx::Point> many(201, ccx::Point{});
  EXPECT_THROW(ccx::psd_check(many), ccx::CapabilityError);
}
