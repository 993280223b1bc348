#include <cmath>
#include <map>
#include <stdexcept>

#include "ccx/errors.hpp"
#include "ccx/gaussian.hpp"

namespace ccx {

namespace {

constexpr int kMaxWickDegree = 12;

double matching_sum(const Eigen::MatrixXd& c, const std::vector<int>& legs, std::vector<char>& used) {
  std::size_t i = 0;
  while (i < legs.size() && used[i]) ++i;
  if (i == legs.size()) return 1.0;
  used[i] = 1;
  double total = 0.0;
  for (std::size_t j = i + 1; j < legs.size(); ++j) {
    if (used[j]) continue;
    used[j] = 1;
    total += c(legs[i], legs[j]) * matching_sum(c, legs, used);
    used[j] = 0;
  }
  used[i] = 0;
  return total;
}

// Powers restricted to the distinct sites of the monomial.
struct IbpSolver {
  const Eigen::MatrixXd& c;
  std::vector<int> sites;
  std::map<std::vector<int>, double> memo;

  double eval(std::vector<int> pw) {
    std::size_t a = 0;
    while (a < pw.size() && pw[a] == 0) ++a;
    if (a == pw.size()) return 1.0;
    if (auto it = memo.find(pw); it != memo.end()) return it->second;
    const std::vector<int> key = pw;
    --pw[a];
    double total = 0.0;
    for (std::size_t b = 0; b < pw.size(); ++b) {
      if (pw[b] == 0) continue;
      const int p = pw[b];
      --pw[b];
      total += c(sites[a], sites[b]) * p * eval(pw);
      ++pw[b];
    }
    memo.emplace(key, total);
    return total;
  }
};

}  // namespace

int Monomial::degree() const {
  int d = 0;
  for (int p : powers) d += p;
  return d;
}

std::vector<int> Monomial::legs() const {
  std::vector<int> out;
  for (std::size_t a = 0; a < powers.size(); ++a)
    for (int k = 0; k < powers[a]; ++k) out.push_back(static_cast<int>(a));
  return out;
}

Polynomial differentiate(const Polynomial& f, int site) {
  Polynomial out;
  for (const auto& term : f) {
    if (site >= static_cast<int>(term.mono.powers.size())) continue;
    const int p = term.mono.powers[static_cast<std::size_t>(site)];
    if (p == 0) continue;
    PolyTerm d = term;
    d.coef *= p;
    --d.mono.powers[static_cast<std::size_t>(site)];
    out.push_back(std::move(d));
  }
  return out;
}

double wick_moment(const Eigen::MatrixXd& c, const Monomial& m) {
  const int deg = m.degree();
  if (deg > kMaxWickDegree) throw CapabilityError("wick_moment: degree above 12");
  if (deg % 2 == 1) return 0.0;
  const auto legs = m.legs();
  std::vector<char> used(legs.size(), 0);
  return matching_sum(c, legs, used);
}

double wick_moment_ibp(const Eigen::MatrixXd& c, const Monomial& m) {
  const int deg = m.degree();
  if (deg > kMaxWickDegree) throw CapabilityError("wick_moment_ibp: degree above 12");
  if (deg % 2 == 1) return 0.0;
  IbpSolver solver{c, {}, {}};
  std::vector<int> pw;
  for (std::size_t a = 0; a < m.powers.size(); ++a) {
    if (m.powers[a] > 0) {
      solver.sites.push_back(static_cast<int>(a));
      pw.push_back(m.powers[a]);
    }
  }
  return solver.eval(pw);
}

double wick_expectation(const Eigen::MatrixXd& c, const Polynomial& f) {
  double total = 0.0;
  for (const auto& term : f) total += term.coef * wick_moment(c, term.mono);
  return total;
}

double change_of_covariance_residual(const Eigen::MatrixXd& base, const Grid& grid,
                                     const std::vector<Point>& config, const std::vector<double>& t,
                                     const Polynomial& f, double eps) {
  const int n = static_cast<int>(config.size());
  if (n < 1) throw std::invalid_argument("change_of_covariance_residual: need n >= 1");
  std::vector<double> tp = t;
  std::vector<double> tm = t;
  tp.back() += eps;
  tm.back() -= eps;
  const double lhs = (wick_expectation(interpolate(base, grid, config, tp), f) -
                      wick_expectation(interpolate(base, grid, config, tm), f)) /
                     (2.0 * eps);

  const Eigen::MatrixXd ct = interpolate(base, grid, config, t);
  const Mask in_b = ball_mask(grid, config);
  double rhs = 0.0;
  for (int k = 1; k <= n; ++k) {
    double weight = 1.0;
    for (int l = k; l <= n - 1; ++l) weight *= t[static_cast<std::size_t>(l - 1)];
    const Mask sh = shell_mask(grid, config, k);
    for (std::size_t x = 0; x < grid.size(); ++x) {
      if (in_b[x]) continue;
      const Polynomial fx = differentiate(f, static_cast<int>(x));
      if (fx.empty()) continue;
      for (std::size_t y = 0; y < grid.size(); ++y) {
        if (!sh[y]) continue;
        const Polynomial fxy = differentiate(fx, static_cast<int>(y));
        if (fxy.empty()) continue;
        rhs += weight * base(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) * wick_expectation(ct, fxy);
      }
    }
  }
  return std::abs(lhs - rhs);
}

double wick_envelope_constant(const Eigen::MatrixXd& c, const std::vector<std::vector<int>>& site_sets,
                              int max_degree) {
  if (max_degree > kMaxWickDegree) throw CapabilityError("wick_envelope_constant: degree above 12");
  double best = 0.0;
  for (const auto& sites : site_sets) {
    const std::size_t k = sites.size();
    if (k == 0) continue;
    std::vector<int> s(k, 0);
    while (true) {
      int total = 0;
      for (int v : s) total += v;
      if (total > 0 && total % 2 == 0 && total <= max_degree) {
        Monomial m;
        m.powers.assign(static_cast<std::size_t>(c.rows()), 0);
        double denom = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
          m.powers[static_cast<std::size_t>(sites[j])] += s[j];
          denom *= std::sqrt(std::tgamma(s[j] + 1.0));
        }
        const double val = std::abs(wick_moment_ibp(c, m)) / denom;
        best = std::max(best, std::pow(val, 1.0 / total));
      }
      std::size_t i = 0;
      while (i < k && ++s[i] > max_degree) s[i++] = 0;
      if (i == k) break;
    }
  }
  return best;
}

}  // namespace ccx
