#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace ccx {

/// Site factor R_{p,s}(phi_a): the s-th derivative of phi_a^p e^{u_a(phi_a)}
/// divided by e^{u_a}, where u_a = -lambda_h phi^4 + source_h phi on region
/// sites and u_a = 0 elsewhere.
struct SiteFactor {
  int site = 0;
  int power = 0;
  int derivs = 0;
};

struct ExpectationTerm {
  double coef = 1.0;
  std::vector<SiteFactor> factors;
};

/// One integrand: sum_terms coef prod R(phi) times exp(sum_{a in region} u_a).
struct ExpectationTask {
  std::vector<char> region;
  std::vector<ExpectationTerm> terms;
};

/// Gaussian expectations of several separable integrands under one measure.
struct ExpectationProblem {
  Eigen::MatrixXd cov;
  double lambda_h = 0.0;
  std::vector<double> source_h;  // per site; empty means zero
  std::vector<ExpectationTask> tasks;
};

/// Tensor Gauss-Hermite in the eigenbasis of the covariance. Direction k with
/// relative scale s_k = sqrt(mu_k / mu_max) gets
/// clamp(ceil(order + order_slope * log10 s_k), min_order, order) nodes;
/// directions with mu_k <= drop_tol * mu_max are dropped.
struct QuadratureOptions {
  int order = 6;
  int min_order = 2;
  double order_slope = 2.0;
  double drop_tol = 1e-14;
  std::int64_t node_budget = 20000000;
};

/// OpenMP kernel. The node set is cut into fixed chunks reduced in order, so
/// the result does not depend on the thread count. At zero source the rule is
/// folded onto the nonnegative half of the leading direction and odd terms are
/// skipped; the symmetric rule would cancel them exactly.
std::vector<double> expect_quadrature(const ExpectationProblem& prob, const QuadratureOptions& opts = {});

/// Serial reference: visits every node and rebuilds phi from scratch.
std::vector<double> expect_quadrature_serial(const ExpectationProblem& prob, const QuadratureOptions& opts = {});

/// Number of tensor nodes the rule would visit.
std::int64_t quadrature_node_count(const Eigen::MatrixXd& cov, const QuadratureOptions& opts = {});

struct MonteCarloResult {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

/// Seeded Monte Carlo with per-chunk streams seeded from (seed, chunk).
MonteCarloResult expect_monte_carlo(const ExpectationProblem& prob, std::int64_t samples, std::uint64_t seed);

/// Coefficients (ascending powers) of R_{p,s} for u = -lambda_h phi^4 + source_h phi.
std::vector<double> site_factor_poly(int power, int derivs, double lambda_h, double source_h);

}  // namespace ccx
