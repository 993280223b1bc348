#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>

#include "ccx/expectation.hpp"
#include "ccx/gaussian.hpp"

namespace {

ccx::ExpectationProblem problem(double lambda_h, std::vector<double> source = {}) {
  const auto g = ccx::line_grid(0.0, 2.5, 0.5);
  ccx::ExpectationProblem p;
  p.cov = ccx::grid_covariance(g);
  p.lambda_h = lambda_h;
  p.source_h = std::move(source);
  const std::vector<char> all(g.size(), 1);
  std::vector<char> half(g.size(), 0);
  half[0] = half[1] = half[2] = 1;
  p.tasks.push_back({all, {{1.0, {}}}});
  p.tasks.push_back({all, {{1.0, {{0, 1, 0}, {4, 1, 0}}}}});
  p.tasks.push_back({half, {{2.0, {{1, 2, 0}}}, {-1.0, {{3, 1, 1}}}}});
  p.tasks.push_back({all, {{1.0, {{2, 3, 0}}}}});
  return p;
}

}  // namespace

TEST(Expectation, FreeMomentsAreExact) {
  const auto p = problem(0.0);
  const auto v = ccx::expect_quadrature(p, {6, 2, 2.0});
  EXPECT_NEAR(v[0], 1.0, 1e-14);
  EXPECT_NEAR(v[1], p.cov(0, 4), 1e-14);
  EXPECT_NEAR(v[3], 0.0, 1e-15);
}

TEST(Expectation, FoldedKernelMatchesSerial) {
  // Zero source: the parallel kernel folds the rule, the serial one does not.
  const auto p = problem(0.05);
  const ccx::QuadratureOptions q{6, 2, 2.0};
  const auto a = ccx::expect_quadrature(p, q);
  const auto b = ccx::expect_quadrature_serial(p, q);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-13 * (1 + std::abs(b[i])));
}

TEST(Expectation, SourcedKernelMatchesSerial) {
  const auto p = problem(0.05, {0.1, -0.2, 0.0, 0.3, 0.05, 0.0});
  const ccx::QuadratureOptions q{5, 2, 2.0};
  const auto a = ccx::expect_quadrature(p, q);
  const auto b = ccx::expect_quadrature_serial(p, q);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-13 * (1 + std::abs(b[i])));
}

TEST(Expectation, IndependentOfThreadCount) {
  const auto p = problem(0.05);
  omp_set_num_threads(1);
  const auto a = ccx::expect_quadrature(p);
  omp_set_num_threads(4);
  const auto b = ccx::expect_quadrature(p);
  const auto ma = ccx::expect_monte_carlo(p, 50000, 9);
  omp_set_num_threads(1);
  const auto mb = ccx::expect_monte_carlo(p, 50000, 9);
  EXPECT_EQ(a, b);
  EXPECT_EQ(ma.mean, mb.mean);
}

TEST(Expectation, MonteCarloAgreesWithQuadrature) {
  const auto p = problem(0.05);
  const auto q = ccx::expect_quadrature(p, {8, 3, 2.0});
  const auto mc = ccx::expect_monte_carlo(p, 400000, 21);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(mc.mean[i], q[i], 5 * mc.stderr_[i] + 1e-12) << i;
}

TEST(Expectation, OneSiteQuarticAgainstDirectIntegral) {
  // E[exp(-g phi^4)] for phi ~ N(0, s^2) by a fine trapezoid sum.
  ccx::ExpectationProblem p;
  p.cov = Eigen::MatrixXd::Constant(1, 1, 0.08);
  p.lambda_h = 0.3;
  p.tasks.push_back({{1}, {{1.0, {}}}});
  const double s = std::sqrt(0.08);
  double ref = 0.0;
  const double dx = 1e-4;
  for (double x = -12 * s; x <= 12 * s; x += dx)
    ref += dx * std::exp(-x * x / (2 * 0.08) - 0.3 * std::pow(x, 4)) / std::sqrt(2 * M_PI * 0.08);
  EXPECT_NEAR(ccx::expect_quadrature(p, {30, 2, 2.0})[0], ref, 1e-10);
}

TEST(Expectation, SiteFactorPolynomial) {
  // d/dphi of phi e^{u} / e^{u} = 1 + phi u'(phi), u = -l phi^4 + j phi.
  const auto c = ccx::site_factor_poly(1, 1, 0.5, 0.2);
  ASSERT_GE(c.size(), 5u);
  EXPECT_NEAR(c[0], 1.0, 1e-15);
  EXPECT_NEAR(c[1], 0.2, 1e-15);
  EXPECT_NEAR(c[4], -2.0, 1e-15);
}

TEST(Expectation, NodeCountRespectsBudget) {
  const auto p = problem(0.0);
  EXPECT_GT(ccx::quadrature_node_count(p.cov, {6, 2, 2.0}), 0);
  ccx::QuadratureOptions tiny{6, 2, 2.0};
  tiny.node_budget = 10;
  EXPECT_THROW(ccx::expect_quadrature(p, tiny), std::exception);
}
