#include "ccx/gaussian.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "ccx/errors.hpp"

namespace ccx {

double Grid::cell_volume() const { return std::pow(h, dimension); }

int Grid::index_of(Point p) const {
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (distance(sites[i], p) < 1e-9) return static_cast<int>(i);
  return -1;
}

Grid line_grid(double lo, double hi, double h) {
  if (!(h > 0.0) || hi < lo) throw std::invalid_argument("line_grid: need h > 0 and hi >= lo");
  Grid g;
  g.dimension = 1;
  g.h = h;
  const int n = static_cast<int>(std::floor((hi - lo) / h + 1e-9)) + 1;
  for (int i = 0; i < n; ++i) g.sites.push_back({lo + i * h, 0.0});
  return g;
}

Mask ball_mask(const Grid& grid, const std::vector<Point>& centers) {
  const BallRegion ball{centers};
  Mask m(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) m[i] = ball.contains(grid.sites[i]) ? 1 : 0;
  return m;
}

Mask shell_mask(const Grid& grid, const std::vector<Point>& config, int k) {
  const Shell s = shell(config, k);
  Mask m(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) m[i] = s.contains(grid.sites[i]) ? 1 : 0;
  return m;
}

Eigen::MatrixXd grid_covariance(const Grid& grid, const KernelParams& p) {
  return covariance_matrix(grid.sites, p);
}

Eigen::MatrixXd interpolate(const Eigen::MatrixXd& base, const Grid& grid, const std::vector<Point>& config,
                            const std::vector<double>& t) {
  if (t.size() != config.size()) throw std::invalid_argument("interpolate: |t| != |config|");
  if (base.rows() != static_cast<Eigen::Index>(grid.size()) || base.cols() != base.rows())
    throw std::invalid_argument("interpolate: matrix does not match grid");
  Eigen::MatrixXd cur = base;
  const auto n = static_cast<Eigen::Index>(grid.size());
  for (std::size_t j = 1; j <= config.size(); ++j) {
    const std::vector<Point> prefix(config.begin(), config.begin() + static_cast<std::ptrdiff_t>(j));
    const Mask in_b = ball_mask(grid, prefix);
    const double tj = t[j - 1];
    Eigen::MatrixXd next(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        const bool ba = in_b[static_cast<std::size_t>(a)] != 0;
        const bool bb = in_b[static_cast<std::size_t>(b)] != 0;
        double blocked = 0.0;
        if (ba && bb) blocked = cur(a, b);
        if (!ba && !bb) blocked = base(a, b);
        next(a, b) = tj * cur(a, b) + (1.0 - tj) * blocked;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

Eigen::MatrixXd dcov_dt_last(const Eigen::MatrixXd& base, const Grid& grid, const std::vector<Point>& config,
                             const std::vector<double>& t) {
  const int n = static_cast<int>(config.size());
  if (n < 1) throw std::invalid_argument("dcov_dt_last: need n >= 1");
  if (static_cast<int>(t.size()) != n) throw std::invalid_argument("dcov_dt_last: |t| != |config|");
  const auto dim = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  const Mask in_b = ball_mask(grid, config);
  for (int k = 1; k <= n; ++k) {
    double weight = 1.0;
    for (int l = k; l <= n - 1; ++l) weight *= t[static_cast<std::size_t>(l - 1)];
    const Mask sh = shell_mask(grid, config, k);
    for (Eigen::Index a = 0; a < dim; ++a) {
      if (!sh[static_cast<std::size_t>(a)]) continue;
      for (Eigen::Index b = 0; b < dim; ++b) {
        if (in_b[static_cast<std::size_t>(b)]) continue;
        out(a, b) += weight * base(a, b);
        out(b, a) += weight * base(b, a);
      }
    }
  }
  return out;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  Eigen::VectorXd s = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * s.asDiagonal();
}

Lemma2Scan lemma2_constant_scan(const Eigen::MatrixXd& c, const Grid& grid, int max_r, int max_n,
                                std::int64_t samples, std::uint64_t seed) {
  if (max_r > 6 || max_n > 4 || max_r < 0 || max_n < 0)
    throw CapabilityError("lemma2_constant_scan: need max_r <= 6 and max_n <= 4");
  // x: greedy admissible sites from the left edge of the window.
  std::vector<int> xs;
  for (std::size_t i = 0; i < grid.size() && static_cast<int>(xs.size()) < max_n; ++i) {
    bool ok = true;
    for (int j : xs) ok = ok && distance(grid.sites[i], grid.sites[static_cast<std::size_t>(j)]) > 1.0 + kGeomEps;
    if (ok) xs.push_back(static_cast<int>(i));
  }
  if (static_cast<int>(xs.size()) < max_n) throw CapabilityError("lemma2_constant_scan: window too small");
  // Two placements of w: all on one site (shared with x_1), or on
  // consecutive distinct sites.
  const int anchor = xs.empty() ? 0 : xs.front();
  std::vector<std::vector<int>> placements(2);
  for (int i = 0; i < max_r; ++i) {
    placements[0].push_back(anchor);
    placements[1].push_back(static_cast<int>(i % static_cast<int>(grid.size())));
  }
  const Eigen::MatrixXd l = psd_factor(c);
  const auto dim = static_cast<Eigen::Index>(grid.size());
  const int n_cells = 2 * (max_r + 1) * (max_n + 1);
  constexpr int kChunks = 64;
  std::vector<std::vector<double>> sums(kChunks, std::vector<double>(static_cast<std::size_t>(n_cells), 0.0));
  std::vector<std::vector<double>> sq(kChunks, std::vector<double>(static_cast<std::size_t>(n_cells), 0.0));

#pragma omp parallel for schedule(dynamic, 1)
  for (int chunk = 0; chunk < kChunks; ++chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    const std::int64_t lo = samples * chunk / kChunks;
    const std::int64_t hi = samples * (chunk + 1) / kChunks;
    Eigen::VectorXd z(dim);
    std::vector<double> px(static_cast<std::size_t>(max_n + 1));
    std::vector<double> pw(static_cast<std::size_t>(max_r + 1));
    auto& s1 = sums[static_cast<std::size_t>(chunk)];
    auto& s2 = sq[static_cast<std::size_t>(chunk)];
    for (std::int64_t it = lo; it < hi; ++it) {
      for (Eigen::Index k = 0; k < dim; ++k) z[k] = normal(rng);
      const Eigen::VectorXd phi = l * z;
      px[0] = 1.0;
      for (int j = 0; j < max_n; ++j) {
        const double a = 1.0 + std::abs(phi[xs[static_cast<std::size_t>(j)]]);
        px[static_cast<std::size_t>(j + 1)] = px[static_cast<std::size_t>(j)] * a * a * a;
      }
      int cell = 0;
      for (const auto& wsites : placements) {
        pw[0] = 1.0;
        for (int i = 0; i < max_r; ++i)
          pw[static_cast<std::size_t>(i + 1)] =
              pw[static_cast<std::size_t>(i)] * (1.0 + std::abs(phi[wsites[static_cast<std::size_t>(i)]]));
        for (int r = 0; r <= max_r; ++r) {
          for (int n = 0; n <= max_n; ++n, ++cell) {
            const double v = pw[static_cast<std::size_t>(r)] * px[static_cast<std::size_t>(n)];
            s1[static_cast<std::size_t>(cell)] += v;
            s2[static_cast<std::size_t>(cell)] += v * v;
          }
        }
      }
    }
  }
  std::vector<double> mean(static_cast<std::size_t>(n_cells), 0.0);
  std::vector<double> var(static_cast<std::size_t>(n_cells), 0.0);
  for (int chunk = 0; chunk < kChunks; ++chunk) {
    for (int k = 0; k < n_cells; ++k) {
      mean[static_cast<std::size_t>(k)] += sums[static_cast<std::size_t>(chunk)][static_cast<std::size_t>(k)];
      var[static_cast<std::size_t>(k)] += sq[static_cast<std::size_t>(chunk)][static_cast<std::size_t>(k)];
    }
  }
  const auto ns = static_cast<double>(samples);
  Lemma2Scan scan;
  scan.c4_hat = 1.0;
  for (int r = 0; r <= max_r; ++r) {
    for (int n = 0; n <= max_n; ++n) {
      Lemma2Cell best{r, n, 0.0, 0.0};
      for (int p = 0; p < 2; ++p) {
        const auto k = static_cast<std::size_t>((p * (max_r + 1) + r) * (max_n + 1) + n);
        const double m = mean[k] / ns;
        const double v = std::max(var[k] / ns - m * m, 0.0);
        if (m > best.lhs) best = {r, n, m, std::sqrt(v / ns)};
      }
      scan.cells.push_back(best);
      scan.max_stderr = std::max(scan.max_stderr, best.stderr_);
    }
  }
  for (const auto& cell : scan.cells)
    if (cell.r == 0 && cell.n > 0) scan.c4_hat = std::max(scan.c4_hat, std::pow(cell.lhs, 1.0 / cell.n));
  scan.c3_hat = 1.0;
  for (const auto& cell : scan.cells) {
    if (cell.r == 0) continue;
    const double scaled = cell.lhs / (std::pow(scan.c4_hat, cell.n) * std::sqrt(std::tgamma(cell.r + 1.0)));
    scan.c3_hat = std::max(scan.c3_hat, std::pow(scaled, 1.0 / cell.r));
  }
  return scan;
}

Lemma1Constant lemma1_constant() {
  const double cbrt2 = std::cbrt(2.0);
  const double xi = 1.0 / (cbrt2 - 1.0);
  return {xi, std::pow(xi, 4) * (std::pow(cbrt2, 4) - 2.0)};
}

namespace {
constexpr char kMagic[8] = {'C', 'C', 'X', 'M', 'A', 'T', '1', '\0'};
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m, double h) {
  if (m.rows() != m.cols()) throw std::invalid_argument("write_matrix: square matrix required");
  os.write(kMagic, 8);
  const auto dim = static_cast<std::uint64_t>(m.rows());
  os.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  os.write(reinterpret_cast<const char*>(&h), sizeof h);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

Eigen::MatrixXd read_matrix(std::istream& is, double* h) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("read_matrix: bad magic");
  std::uint64_t dim = 0;
  double step = 0.0;
  is.read(reinterpret_cast<char*>(&dim), sizeof dim);
  is.read(reinterpret_cast<char*>(&step), sizeof step);
  if (!is || dim > 100000) throw std::runtime_error("read_matrix: bad header");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) is.read(reinterpret_cast<char*>(&m(i, j)), sizeof(double));
  if (!is) throw std::runtime_error("read_matrix: truncated data");
  if (h != nullptr) *h = step;
  return m;
}

}  // namespace ccx
