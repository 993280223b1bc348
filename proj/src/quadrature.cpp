#include "ccx/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ccx {

namespace {

// Golub-Welsch: eigenvalues of the symmetric Jacobi matrix are the nodes,
// squared first eigenvector components times mu0 are the weights.
QuadratureRule golub_welsch(const std::vector<double>& off_diagonal, double mu0) {
  const auto n = static_cast<Eigen::Index>(off_diagonal.size() + 1);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) sub[i] = off_diagonal[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
    const double v = solver.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = mu0 * v * v;
  }
  return rule;
}

// Legendre P_n and its derivative by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

// Probabilists' Hermite He_n and He_{n-1}.
std::pair<double, double> hermite_he(int n, double x) {
  double h0 = 1.0;
  double h1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double h2 = x * h1 - (k - 1.0) * h0;
    h0 = h1;
    h1 = h2;
  }
  return {h1, h0};
}

}  // namespace

QuadratureRule gauss_legendre(int order, double a, double b) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  QuadratureRule rule;
  if (order == 1) {
    rule.nodes = {0.0};
    rule.weights = {2.0};
  } else {
    std::vector<double> beta(static_cast<std::size_t>(order - 1));
    for (int k = 1; k < order; ++k) beta[static_cast<std::size_t>(k - 1)] = k / std::sqrt(4.0 * k * k - 1.0);
    rule = golub_welsch(beta, 2.0);
    // Newton polish on P_n; weights from the derivative formula.
    for (std::size_t i = 0; i < rule.size(); ++i) {
      double x = rule.nodes[i];
      for (int it = 0; it < 3; ++it) {
        const auto [p, dp] = legendre(order, x);
        x -= p / dp;
      }
      const auto [p, dp] = legendre(order, x);
      (void)p;
      rule.nodes[i] = x;
      rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

QuadratureRule gauss_hermite_normal(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite_normal: order must be >= 1");
  if (order == 1) return {{0.0}, {1.0}};
  std::vector<double> beta(static_cast<std::size_t>(order - 1));
  for (int k = 1; k < order; ++k) beta[static_cast<std::size_t>(k - 1)] = std::sqrt(static_cast<double>(k));
  QuadratureRule rule = golub_welsch(beta, 1.0);
  // Newton polish; w_i = (n-1)! / (n He_{n-1}(x_i)^2) normalized for the
  // standard normal weight.
  double log_fact = std::lgamma(static_cast<double>(order));
  for (std::size_t i = 0; i < rule.size(); ++i) {
    double x = rule.nodes[i];
    for (int it = 0; it < 3; ++it) {
      const auto [he, he_prev] = hermite_he(order, x);
      const double dhe = order * he_prev;
      x -= he / dhe;
    }
    const auto [he, he_prev] = hermite_he(order, x);
    (void)he;
    rule.nodes[i] = x;
    rule.weights[i] = std::exp(log_fact - std::log(static_cast<double>(order)) - 2.0 * std::log(std::abs(he_prev)));
  }
  // Symmetrize so that odd integrands cancel pairwise.
  const std::size_t n = rule.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rule.nodes[a] < rule.nodes[b]; });
  QuadratureRule sorted;
  for (auto i : idx) {
    sorted.nodes.push_back(rule.nodes[i]);
    sorted.weights.push_back(rule.weights[i]);
  }
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (sorted.nodes[n - 1 - i] - sorted.nodes[i]);
    const double w = 0.5 * (sorted.weights[n - 1 - i] + sorted.weights[i]);
    sorted.nodes[i] = -x;
    sorted.nodes[n - 1 - i] = x;
    sorted.weights[i] = w;
    sorted.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) sorted.nodes[n / 2] = 0.0;
  return sorted;
}

}  // namespace ccx
