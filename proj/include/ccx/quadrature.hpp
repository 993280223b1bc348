#pragma once

#include <vector>

namespace ccx {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre rule of the given order mapped to [a, b].
QuadratureRule gauss_legendre(int order, double a = -1.0, double b = 1.0);

/// Gauss-Hermite rule for the standard normal weight exp(-x^2/2)/sqrt(2 pi).
/// Weights sum to one, so the rule computes E[f(Z)] for Z ~ N(0, 1).
QuadratureRule gauss_hermite_normal(int order);

}  // namespace ccx
