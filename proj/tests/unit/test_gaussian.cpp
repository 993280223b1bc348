#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ccx/errors.hpp"
#include "ccx/gaussian.hpp"

namespace {

struct Fixture {
  ccx::Grid grid = ccx::line_grid(0.0, 4.0, 0.5);
  Eigen::MatrixXd base = ccx::grid_covariance(grid);
};

ccx::Monomial mono(std::size_t dim, std::vector<std::pair<int, int>> sp) {
  ccx::Monomial m{std::vector<int>(dim, 0)};
  for (auto [s, p] : sp) m.powers[static_cast<std::size_t>(s)] += p;
  return m;
}

}  // namespace

TEST(Gaussian, LineGrid) {
  const auto g = ccx::line_grid(0.0, 4.0, 0.5);
  EXPECT_EQ(g.size(), 9u);
  EXPECT_EQ(g.index_of({2.5, 0.0}), 5);
  EXPECT_EQ(g.index_of({2.25, 0.0}), -1);
  EXPECT_THROW(ccx::line_grid(0.0, 1.0, 0.0), std::invalid_argument);
}

TEST(Gaussian, InterpolationEndpoints) {
  Fixture f;
  const std::vector<ccx::Point> cfg = {{1.0, 0.0}, {3.0, 0.0}};
  EXPECT_EQ((ccx::interpolate(f.base, f.grid, cfg, {1.0, 1.0}) - f.base).cwiseAbs().maxCoeff(), 0.0);
  // t_2 = 0 splits B_{x_1 x_2} from its complement.
  const auto c = ccx::interpolate(f.base, f.grid, cfg, {0.4, 0.0});
  const auto in_b = ccx::ball_mask(f.grid, cfg);
  for (Eigen::Index a = 0; a < c.rows(); ++a)
    for (Eigen::Index b = 0; b < c.cols(); ++b)
      if (in_b[static_cast<std::size_t>(a)] != in_b[static_cast<std::size_t>(b)]) EXPECT_EQ(c(a, b), 0.0);
  EXPECT_THROW(ccx::interpolate(f.base, f.grid, cfg, {1.0}), std::invalid_argument);
}

TEST(Gaussian, InterpolationStaysPositive) {
  Fixture f;
  const std::vector<ccx::Point> cfg = {{0.2, 0.0}, {1.7, 0.0}, {3.5, 0.0}};
  for (double t : {0.0, 0.3, 0.9}) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ccx::interpolate(f.base, f.grid, cfg, {t, 1 - t, t}));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
  }
}

TEST(Gaussian, DerivativeMatchesDifferenceQuotient) {
  Fixture f;
  const std::vector<ccx::Point> cfg = {{0.6, 0.0}, {2.4, 0.0}};
  const std::vector<double> t = {0.35, 0.6};
  const double eps = 1e-3;
  // C_t is affine in t_n, so the central difference is exact up to rounding.
  const Eigen::MatrixXd fd =
      (ccx::interpolate(f.base, f.grid, cfg, {0.35, 0.6 + eps}) - ccx::interpolate(f.base, f.grid, cfg, {0.35, 0.6 - eps})) /
      (2 * eps);
  EXPECT_LT((fd - ccx::dcov_dt_last(f.base, f.grid, cfg, t)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gaussian, WickClosedForms) {
  Fixture f;
  const auto& c = f.base;
  const auto dim = f.grid.size();
  EXPECT_NEAR(ccx::wick_moment(c, mono(dim, {{2, 4}})), 3 * c(2, 2) * c(2, 2), 1e-15);
  EXPECT_NEAR(ccx::wick_moment(c, mono(dim, {{1, 2}, {3, 2}})), c(1, 1) * c(3, 3) + 2 * c(1, 3) * c(1, 3), 1e-15);
  EXPECT_NEAR(ccx::wick_moment(c, mono(dim, {{0, 6}})), 15 * std::pow(c(0, 0), 3), 1e-15);
  EXPECT_EQ(ccx::wick_moment(c, mono(dim, {{0, 3}})), 0.0);
  EXPECT_EQ(ccx::wick_moment(c, mono(dim, {})), 1.0);
  EXPECT_THROW(ccx::wick_moment(c, mono(dim, {{0, 14}})), ccx::CapabilityError);
}

TEST(Gaussian, MatchingsAgreeWithIntegrationByParts) {
  Fixture f;
  const auto dim = f.grid.size();
  const auto m = mono(dim, {{0, 3}, {2, 2}, {5, 4}, {8, 3}});
  const double a = ccx::wick_moment(f.base, m), b = ccx::wick_moment_ibp(f.base, m);
  EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
}

TEST(Gaussian, DifferentiateMonomial) {
  const ccx::Polynomial p = {{2.0, ccx::Monomial{{3, 1}}}};
  const auto d = ccx::differentiate(p, 0);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].coef, 6.0);
  EXPECT_EQ(d[0].mono.powers, (std::vector<int>{2, 1}));
  EXPECT_TRUE(ccx::differentiate({{1.0, ccx::Monomial{{0, 1}}}}, 0).empty());
}

TEST(Gaussian, ChangeOfCovariance) {
  Fixture f;
  const auto dim = f.grid.size();
  ccx::Polynomial p = {{1.0, mono(dim, {{1, 2}, {6, 2}})}, {-0.5, mono(dim, {{3, 1}, {7, 1}})}};
  EXPECT_LT(ccx::change_of_covariance_residual(f.base, f.grid, {{1.5, 0.0}, {3.8, 0.0}}, {0.5, 0.25}, p), 1e-8);
}

TEST(Gaussian, Lemma1Constant) {
  const auto l = ccx::lemma1_constant();
  const auto g = [](double x) { return std::pow(1 + x, 4) - 2 * std::pow(x, 4); };
  EXPECT_NEAR(l.c, g(l.xi_star), 1e-10 * l.c);
  EXPECT_LT(g(l.xi_star + 1e-3), l.c);
  EXPECT_LT(g(l.xi_star - 1e-3), l.c);
}

TEST(Gaussian, EnvelopeOfSingleSite) {
  // One site, degree 2: E phi^2 / sqrt(2) = C.
  Eigen::MatrixXd c(1, 1);
  c << 0.25;
  EXPECT_NEAR(ccx::wick_envelope_constant(c, {{0}}, 2), std::sqrt(0.25 / std::sqrt(2.0)), 1e-15);
}

TEST(Gaussian, Lemma2ScanIsSeeded) {
  const auto g = ccx::line_grid(0.0, 6.0, 0.5);
  const auto c = ccx::grid_covariance(g);
  const auto a = ccx::lemma2_constant_scan(c, g, 2, 2, 20000, 5);
  const auto b = ccx::lemma2_constant_scan(c, g, 2, 2, 20000, 5);
  EXPECT_EQ(a.c3_hat, b.c3_hat);
  EXPECT_GE(a.c4_hat, 1.0);
  // r = n = 0 is the constant 1.
  EXPECT_EQ(a.cells.front().lhs, 1.0);
}

TEST(Gaussian, MatrixRoundTrip) {
  Fixture f;
  std::stringstream ss;
  ccx::write_matrix(ss, f.base, 0.5);
  double h = 0;
  const auto m = ccx::read_matrix(ss, &h);
  EXPECT_EQ(h, 0.5);
  EXPECT_EQ(m, f.base);
  std::stringstream bad("NOTAMAT1xxxxxxxxxxxxxxxx");
  EXPECT_THROW(ccx::read_matrix(bad), std::runtime_error);
}
