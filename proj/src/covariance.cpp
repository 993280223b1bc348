#include "ccx/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ccx/errors.hpp"
#include "ccx/quadrature.hpp"

namespace ccx {

void KernelParams::validate() const {
  if (dimension != 1 && dimension != 2) throw std::invalid_argument("KernelParams: dimension must be 1 or 2");
  if (quadrature_order < 8) throw std::invalid_argument("KernelParams: quadrature_order must be >= 8");
}

CovarianceKernel::CovarianceKernel(const KernelParams& p) : params_(p) {
  params_.validate();
  const auto rule = gauss_legendre(p.quadrature_order, KernelParams::alpha_lo, KernelParams::alpha_hi);
  nodes_ = rule.nodes;
  weights_ = rule.weights;
  prefactor_ = std::pow(4.0 * std::numbers::pi, -0.5 * p.dimension);
}

double CovarianceKernel::operator()(double r) const {
  if (!std::isfinite(r)) throw std::domain_error("covariance: non-finite separation");
  const double r2 = r * r;
  const double half_d = 0.5 * params_.dimension;
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double a = nodes_[i];
    sum += weights_[i] * std::pow(a, -half_d) * std::exp(-a - r2 / (4.0 * a));
  }
  return prefactor_ * sum;
}

double CovarianceKernel::operator()(Point x, Point y) const {
  if (!std::isfinite(x.x) || !std::isfinite(x.y) || !std::isfinite(y.x) || !std::isfinite(y.y))
    throw std::domain_error("covariance: non-finite coordinates");
  return (*this)(distance(x, y));
}

double covariance(Point x, Point y, const KernelParams& p) { return CovarianceKernel(p)(x, y); }

double full_covariance_r(double r, int d) {
  if (d != 1 && d != 2) throw std::invalid_argument("full_covariance: dimension must be 1 or 2");
  if (!std::isfinite(r) || r < 0.0) throw std::domain_error("full_covariance: invalid separation");
  if (d >= 2 && r == 0.0) throw SingularityError("full_covariance: coincident points in d >= 2");
  // alpha = e^u removes the endpoint singularity at alpha = 0; the log
  // behaviour near r = 0 in d = 2 becomes a long flat stretch in u.
  const double r2 = r * r;
  const double half_d = 0.5 * d;
  auto integrand = [&](double u) {
    const double a = std::exp(u);
    return std::exp((1.0 - half_d) * u - a - r2 / (4.0 * a));
  };
  const double lo = -80.0;
  const double hi = std::log(r + 80.0);
  static const QuadratureRule unit = gauss_legendre(20, 0.0, 1.0);
  const int panels = static_cast<int>(std::ceil((hi - lo) / 0.5));
  const double width = (hi - lo) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = lo + k * width;
    for (std::size_t i = 0; i < unit.size(); ++i) sum += width * unit.weights[i] * integrand(a + width * unit.nodes[i]);
  }
  return std::pow(4.0 * std::numbers::pi, -half_d) * sum;
}

double full_covariance(Point x, Point y, int d) {
  if (!std::isfinite(x.x) || !std::isfinite(x.y) || !std::isfinite(y.x) || !std::isfinite(y.y))
    throw std::domain_error("full_covariance: non-finite coordinates");
  return full_covariance_r(distance(x, y), d);
}

DecayCertificate decay_constant(const KernelParams& p, double r_max, int n_samples) {
  if (r_max < 10.0) throw std::invalid_argument("decay_constant: r_max must be >= 10");
  if (n_samples < 2) throw std::invalid_argument("decay_constant: need at least two samples");
  const CovarianceKernel kernel(p);
  DecayCertificate cert;
  cert.r_max = r_max;
  cert.min_value = std::numeric_limits<double>::infinity();
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double r = r_max * i / (n_samples - 1);
    const double c = kernel(r);
    values[static_cast<std::size_t>(i)] = c;
    cert.min_value = std::min(cert.min_value, c);
    const double scaled = c * std::exp(2.0 * r);
    if (scaled > cert.c1) {
      cert.c1 = scaled;
      cert.argmax_r = r;
    }
  }
  cert.max_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const double r = r_max * i / (n_samples - 1);
    // Compare in the scaled form so the tail does not underflow to zero.
    const double v = values[static_cast<std::size_t>(i)] * std::exp(2.0 * r) - cert.c1;
    cert.max_violation = std::max(cert.max_violation, v);
  }
  return cert;
}

double decay_refinement_drift(const KernelParams& p, double r_max, int n_samples) {
  const double c_coarse = decay_constant(p, r_max, n_samples).c1;
  const double c_fine = decay_constant(p, r_max, 2 * n_samples).c1;
  return std::abs(c_fine - c_coarse) / c_coarse;
}

Eigen::MatrixXd covariance_matrix(const std::vector<Point>& points, const KernelParams& p) {
  const CovarianceKernel kernel(p);
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      m(i, j) = m(j, i) = kernel(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
  return m;
}

double psd_check(const std::vector<Point>& points, const KernelParams& p) {
  if (points.size() > 200) throw CapabilityError("psd_check: at most 200 points");
  if (points.empty()) throw std::domain_error("psd_check: empty point list");
  const Eigen::MatrixXd m = covariance_matrix(points, p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace ccx
