#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ccx/geometry.hpp"

namespace ccx {

/// Proper-time kernel parameters. The alpha range is fixed at [1/2, 1].
struct KernelParams {
  int dimension = 1;
  int quadrature_order = 32;
  static constexpr double alpha_lo = 0.5;
  static constexpr double alpha_hi = 1.0;

  /// Throws std::invalid_argument unless d is 1 or 2 and the order is >= 8.
  void validate() const;
};

/// Regularized covariance as a function of separation, with a cached
/// Gauss-Legendre rule on [1/2, 1].
class CovarianceKernel {
 public:
  explicit CovarianceKernel(const KernelParams& p = {});

  [[nodiscard]] double operator()(double r) const;
  [[nodiscard]] double operator()(Point x, Point y) const;
  [[nodiscard]] const KernelParams& params() const noexcept { return params_; }

 private:
  KernelParams params_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  double prefactor_ = 0.0;
};

/// C(x, y) for the regularized kernel. Throws std::domain_error on
/// non-finite input.
double covariance(Point x, Point y, const KernelParams& p = {});

/// The full kernel integrated over alpha in (0, inf). Throws SingularityError
/// for coincident points when d >= 2.
double full_covariance(Point x, Point y, int d);
double full_covariance_r(double r, int d);

struct DecayCertificate {
  double c1 = 0.0;
  double rate = 2.0;
  double r_max = 0.0;
  double max_violation = 0.0;
  double min_value = 0.0;  // smallest sampled C(r), must be positive
  double argmax_r = 0.0;
};

/// Smallest c1 on a uniform grid of n_samples points in [0, r_max] with
/// C(r) <= c1 exp(-2 r). Throws std::invalid_argument if r_max < 10.
DecayCertificate decay_constant(const KernelParams& p, double r_max = 20.0, int n_samples = 4000);

/// Relative change of c1 when the grid is doubled.
double decay_refinement_drift(const KernelParams& p, double r_max = 20.0, int n_samples = 4000);

Eigen::MatrixXd covariance_matrix(const std::vector<Point>& points, const KernelParams& p = {});

/// Minimum eigenvalue of the covariance matrix on the points. Throws
/// CapabilityError above 200 points.
double psd_check(const std::vector<Point>& points, const KernelParams& p = {});

}  // namespace ccx
