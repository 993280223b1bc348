#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "ccx/covariance.hpp"
#include "ccx/geometry.hpp"

namespace ccx {

/// Lattice carrier for the continuum objects: integrals become h^d sums and
/// functional derivatives become h^{-d} partial derivatives.
struct Grid {
  int dimension = 1;
  double h = 1.0;
  std::vector<Point> sites;

  [[nodiscard]] double cell_volume() const;
  [[nodiscard]] std::size_t size() const noexcept { return sites.size(); }
  /// Index of the site at p, or -1.
  [[nodiscard]] int index_of(Point p) const;
};

/// Sites lo, lo + h, ..., up to hi (inclusive within 1e-9).
Grid line_grid(double lo, double hi, double h);

using Mask = std::vector<char>;

/// Sites of B_{centers} (closed unit balls).
Mask ball_mask(const Grid& grid, const std::vector<Point>& centers);
/// Sites of the shell B'_{x_1..x_k}, k 1-based.
Mask shell_mask(const Grid& grid, const std::vector<Point>& config, int k);

/// Base covariance sampled on the grid sites.
Eigen::MatrixXd grid_covariance(const Grid& grid, const KernelParams& p = {});

/// C_{t;x} by the convex recursion, each chi realized as a site projector.
/// Throws std::invalid_argument if |t| != |config|.
Eigen::MatrixXd interpolate(const Eigen::MatrixXd& base, const Grid& grid, const std::vector<Point>& config,
                            const std::vector<double>& t);

/// Closed form of dC_{t;x}/dt_n.
Eigen::MatrixXd dcov_dt_last(const Eigen::MatrixXd& base, const Grid& grid, const std::vector<Point>& config,
                             const std::vector<double>& t);

/// A monomial prod_a phi_a^{powers[a]} over site indices.
struct Monomial {
  std::vector<int> powers;

  [[nodiscard]] int degree() const;
  /// Site index of every leg, with repetition.
  [[nodiscard]] std::vector<int> legs() const;
};

struct PolyTerm {
  double coef = 1.0;
  Monomial mono;
};
using Polynomial = std::vector<PolyTerm>;

/// d/dphi_a of a polynomial.
Polynomial differentiate(const Polynomial& f, int site);

/// Gaussian moment as a sum over perfect matchings of the legs. Throws
/// CapabilityError above degree 12; odd degree gives exactly 0.
double wick_moment(const Eigen::MatrixXd& c, const Monomial& m);
/// The same moment from <phi_a F> = sum_b C_ab <d_b F>, memoized.
double wick_moment_ibp(const Eigen::MatrixXd& c, const Monomial& m);
double wick_expectation(const Eigen::MatrixXd& c, const Polynomial& f);

/// |d/dt_n <F> - sum_k (prod t) <sum_{x in B^c} sum_{y in B'_k} C_xy d_x d_y F>|
/// with the left side by central differences of step eps.
double change_of_covariance_residual(const Eigen::MatrixXd& base, const Grid& grid,
                                     const std::vector<Point>& config, const std::vector<double>& t,
                                     const Polynomial& f, double eps = 1e-5);

/// Square-root factor of a PSD matrix; negative eigenvalues clipped to zero.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& c);

struct Lemma2Cell {
  int r = 0;
  int n = 0;
  double lhs = 0.0;
  double stderr_ = 0.0;
};

struct Lemma2Scan {
  double c3_hat = 0.0;
  double c4_hat = 0.0;
  double max_stderr = 0.0;
  std::vector<Lemma2Cell> cells;
};

/// Empirical constants with <prod_i (1+|phi_{w_i}|) prod_j (1+|phi_{x_j}|)^3>
/// <= c3^r c4^n sqrt(r!) over r <= max_r, n <= max_n on the grid. The left
/// side is estimated by seeded Monte Carlo, split into fixed chunks so the
/// result does not depend on the thread count.
Lemma2Scan lemma2_constant_scan(const Eigen::MatrixXd& c, const Grid& grid, int max_r, int max_n,
                                std::int64_t samples = 1000000, std::uint64_t seed = 1);

/// Smallest c_hat with |<prod phi_{x_j}^{s_j}>| <= c_hat^s prod sqrt(s_j!) over
/// all exponent vectors on the given site sets with total degree <= max_degree.
double wick_envelope_constant(const Eigen::MatrixXd& c, const std::vector<std::vector<int>>& site_sets,
                              int max_degree);

struct Lemma1Constant {
  double xi_star = 0.0;
  double c = 0.0;
};

/// sup_{xi >= 0} ((1+xi)^4 - 2 xi^4) and its maximizer.
Lemma1Constant lemma1_constant();

/// Binary layout: 8-byte magic "CCXMAT1\0", uint64 dim, double h, then
/// dim*dim row-major doubles, all little-endian.
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m, double h);
Eigen::MatrixXd read_matrix(std::istream& is, double* h = nullptr);

}  // namespace ccx
