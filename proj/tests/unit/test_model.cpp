#include <gtest/gtest.h>

#include <cmath>

#include "ccx/errors.hpp"
#include "ccx/model.hpp"

namespace {

ccx::LatticeModel make(double lambda, double hi = 4.0, double h = 1.0) {
  ccx::ModelParams p;
  p.lambda = lambda;
  p.h = h;
  p.window_lo = 0.0;
  p.window_hi = hi;
  return ccx::LatticeModel(p);
}

}  // namespace

TEST(Model, RejectsBadParameters) {
  ccx::ModelParams p;
  p.lambda = -1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.lambda = 0;
  p.kernel.dimension = 2;
  EXPECT_THROW(p.validate(), ccx::CapabilityError);
}

TEST(Model, FreePartitionFunctionWithSource) {
  // Z[J] = exp(h^2 J.C.J / 2) at lambda = 0.
  const auto m = make(0.0);
  EXPECT_NEAR(ccx::partition_function(m, {}).value, 1.0, 1e-14);
  ccx::SourceField j = {0.3, 0.0, -0.2, 0.1, 0.0};
  double q = 0.0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) q += j[a] * m.cov()(a, b) * j[b];
  EXPECT_NEAR(ccx::partition_function(m, j, {ccx::Method::Tensor, {8, 4, 2.0}}).value, std::exp(0.5 * q), 1e-12);
}

TEST(Model, CumulantFromMoments) {
  // Moments of (X, Y) with means a, b and covariance c.
  const double a = 0.3, b = -0.7, c = 0.11;
  EXPECT_NEAR(ccx::cumulant_from_moments({1.0, a, b, a * b + c}, 2), c, 1e-15);
  EXPECT_THROW(ccx::cumulant_from_moments({1.0}, 2), std::invalid_argument);
}

TEST(Model, FreeSchwingerIsThePropagator) {
  const auto m = make(0.0);
  const auto s = ccx::schwinger_bruteforce(m, {0, 3});
  EXPECT_NEAR(s.value, m.cov()(0, 3), 1e-13);
  EXPECT_NEAR(s.fd_value, m.cov()(0, 3), 1e-7);
  EXPECT_NEAR(ccx::schwinger_bruteforce(m, {0, 1, 2, 3}).value, 0.0, 1e-13);
}

TEST(Model, InsertionsAgreeWithFiniteDifferences) {
  const auto m = make(0.05);
  const auto s = ccx::schwinger_bruteforce(m, {1, 3}, {8, 3, 2.0});
  EXPECT_NEAR(s.value, s.fd_value, 10 * s.fd_error + 1e-9);
  // The interaction lowers the two-point function.
  EXPECT_LT(s.value, m.cov()(1, 3));
}

TEST(Model, TensorAgreesWithMonteCarlo) {
  const auto m = make(0.05);
  const auto t = ccx::partition_function(m, {});
  const auto mc = ccx::partition_function(m, {}, {ccx::Method::MonteCarlo, {}, 200000, 4});
  EXPECT_NEAR(t.value, mc.value, 4 * mc.mc_stderr + t.quad_error);
}

TEST(Model, FreeZTildeOfOnePoint) {
  // With no interaction the one-point Z-tilde is the normalized measure.
  const auto m = make(0.0);
  EXPECT_NEAR(ccx::ztilde(m, {2}).value, 1.0, 1e-13);
}

TEST(Model, FactorizationIdentity) {
  const auto m = make(0.02);
  for (const std::vector<int>& x : {std::vector<int>{2}, std::vector<int>{0, 3}}) {
    const auto r = ccx::identity13_residual(m, x);
    EXPECT_TRUE(r.pass) << r.residual << " > " << r.tolerance;
    EXPECT_LT(r.residual, 1e-8);
  }
  EXPECT_THROW(ccx::identity13_residual(m, {1, 2}), std::invalid_argument);
}

TEST(Model, IteratedFactorization) {
  const auto m = make(0.02, 6.0);
  const auto e = ccx::expansion14_check(m, {3}, 0, 3);
  EXPECT_TRUE(e.terminated);
  EXPECT_LT(e.residuals.back(), e.tolerance);
  EXPECT_THROW(ccx::expansion14_check(m, {3}, 3, 2), std::invalid_argument);
}
