#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "ccx/covariance.hpp"
#include "ccx/expectation.hpp"
#include "ccx/gaussian.hpp"

namespace ccx {

/// Coupling, lattice spacing and window [window_lo, window_hi] of the
/// one-dimensional lattice model.
struct ModelParams {
  double lambda = 0.0;
  double h = 1.0;
  double window_lo = 0.0;
  double window_hi = 6.0;
  KernelParams kernel;

  void validate() const;
};

/// Source values per lattice site.
using SourceField = std::vector<double>;

/// Lattice stand-in for the functional integral: the window sites, the base
/// covariance on them, and helpers for the ball/shell masks.
class LatticeModel {
 public:
  explicit LatticeModel(const ModelParams& p);

  [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] const Eigen::MatrixXd& cov() const noexcept { return cov_; }
  [[nodiscard]] int size() const noexcept { return static_cast<int>(grid_.size()); }
  [[nodiscard]] double h() const noexcept { return params_.h; }
  [[nodiscard]] double lambda() const noexcept { return params_.lambda; }
  [[nodiscard]] Point site(int i) const { return grid_.sites[static_cast<std::size_t>(i)]; }
  [[nodiscard]] std::vector<Point> points(const std::vector<int>& idx) const;
  /// Index of the site at coordinate x; throws std::out_of_range.
  [[nodiscard]] int site_at(double x) const;

  [[nodiscard]] Mask full() const { return Mask(grid_.size(), 1); }
  [[nodiscard]] Mask ball(const std::vector<int>& config) const;
  [[nodiscard]] Mask shell(const std::vector<int>& config, int k) const;
  [[nodiscard]] bool admissible(const std::vector<int>& config) const;

 private:
  ModelParams params_;
  Grid grid_;
  Eigen::MatrixXd cov_;
};

Mask mask_and(const Mask& a, const Mask& b);
Mask mask_minus(const Mask& a, const Mask& b);
int mask_count(const Mask& a);

/// A value with its error decomposition.
struct Estimate {
  double value = 0.0;
  double quad_error = 0.0;
  double mc_stderr = 0.0;
  std::string method;

  [[nodiscard]] double tolerance() const { return quad_error + 3.0 * mc_stderr; }
};

/// Quadrature error proxy: |Q(order) - Q(order - 2)|, which bounds the error
/// of the lower rule and so overstates the error of the rule used.
QuadratureOptions coarser(const QuadratureOptions& q);

/// Z-tilde (or, with insertions, its source derivatives) for one
/// configuration of site indices. The interaction and the source live on
/// `region`; every inserted site contributes one factor phi.
struct ZRequest {
  std::vector<int> config;
  Mask region;
  std::vector<int> insertions;
};

struct ZOptions {
  int t_order = 8;
  QuadratureOptions quad;
  /// Gauss-Hermite order is lowered by this much per configuration point
  /// beyond the second (never below quad.min_order).
  int order_step = 0;
  bool serial = false;
};

/// Evaluates batches of ZRequests. Requests sharing the measure prefix
/// x_1..x_{n-1} are integrated in one pass per t-node.
class ZEvaluator {
 public:
  ZEvaluator(const LatticeModel& model, ZOptions opts, SourceField source = {});

  [[nodiscard]] std::vector<double> evaluate(const std::vector<ZRequest>& requests) const;
  /// Values together with |Q(order) - Q(order-2)|.
  [[nodiscard]] std::vector<Estimate> evaluate_with_error(const std::vector<ZRequest>& requests) const;

  [[nodiscard]] const LatticeModel& model() const noexcept { return model_; }
  [[nodiscard]] const ZOptions& options() const noexcept { return opts_; }
  /// Number of Gaussian integrations done so far.
  [[nodiscard]] std::int64_t passes() const noexcept { return passes_; }

 private:
  [[nodiscard]] std::vector<double> evaluate_impl(const std::vector<ZRequest>& requests,
                                                  const QuadratureOptions& q) const;

  const LatticeModel& model_;
  ZOptions opts_;
  SourceField source_;
  mutable std::int64_t passes_ = 0;
};

enum class Method { Tensor, MonteCarlo };

struct MethodOptions {
  Method method = Method::Tensor;
  QuadratureOptions quad;
  std::int64_t samples = 200000;
  std::uint64_t seed = 1;
};

/// Z_Lambda[J] restricted to `region` (the whole window by default).
Estimate partition_function(const LatticeModel& model, const SourceField& source, const MethodOptions& opts = {},
                            const Mask& region = {});

struct SchwingerResult {
  double value = 0.0;           // from moment insertions
  double quad_error = 0.0;      // proxy for the insertion method
  double fd_value = 0.0;        // central differences in J, Richardson-extrapolated
  double fd_error = 0.0;        // |D(delta) - D(delta/2)| after extrapolation
};

/// Connected r-point function at J = 0 for sites w (r <= 4).
SchwingerResult schwinger_bruteforce(const LatticeModel& model, const std::vector<int>& w,
                                     const QuadratureOptions& quad = {}, double fd_step = 0.1);

/// Z-tilde over the whole window for a configuration of site indices.
Estimate ztilde(const LatticeModel& model, const std::vector<int>& config, const SourceField& source = {},
                const ZOptions& opts = {});

/// Z-tilde with the interaction restricted to Lambda intersected with B_x.
Estimate z_bold(const LatticeModel& model, const std::vector<int>& config, const Mask& region = {},
                const SourceField& source = {}, const ZOptions& opts = {});

struct Identity13Report {
  Estimate lhs;
  Estimate z_bold;
  Estimate z_complement;
  Estimate z_sum;
  int z_terms = 0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Checks Z~_{Lambda;x} = Z_{Lambda;x} Z_{Lambda\B_x} + h sum_{z not in B_x} Z~_{Lambda;x,z}.
/// Sites z outside the window contribute zero because no interaction or source
/// lives there; the sum runs over every window site outside B_x.
Identity13Report identity13_residual(const LatticeModel& model, const std::vector<int>& config,
                                     const SourceField& source = {}, const ZOptions& opts = {});

struct Expansion14Report {
  double target = 0.0;  // Z_{Lambda \ B_x}
  std::vector<double> partial_sums;
  std::vector<double> residuals;
  std::vector<int> terms_per_depth;
  bool terminated = false;  // no admissible extension beyond the last depth
  double tolerance = 0.0;
};

/// Rebuilds Z_{Lambda\B_x} from the successive application of the
/// factorization identity, starting from z_1 outside B_x.
Expansion14Report expansion14_check(const LatticeModel& model, const std::vector<int>& x, int z1, int depth,
                                    const ZOptions& opts = {});

/// Cumulant from raw moments indexed by subset bitmask (moments[0] = 1).
double cumulant_from_moments(const std::vector<double>& moments, int r);

}  // namespace ccx
