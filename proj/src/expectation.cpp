#include "ccx/expectation.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>

#include "ccx/errors.hpp"
#include "ccx/gaussian.hpp"
#include "ccx/quadrature.hpp"

namespace ccx {

std::vector<double> site_factor_poly(int power, int derivs, double lambda_h, double source_h) {
  std::vector<double> r(static_cast<std::size_t>(power + 1), 0.0);
  r[static_cast<std::size_t>(power)] = 1.0;
  for (int s = 0; s < derivs; ++s) {
    // R <- R' + u' R with u' = -4 lambda_h phi^3 + source_h.
    std::vector<double> next(r.size() + 3, 0.0);
    for (std::size_t k = 1; k < r.size(); ++k) next[k - 1] += static_cast<double>(k) * r[k];
    for (std::size_t k = 0; k < r.size(); ++k) {
      next[k + 3] += -4.0 * lambda_h * r[k];
      next[k] += source_h * r[k];
    }
    while (next.size() > 1 && next.back() == 0.0) next.pop_back();
    r = std::move(next);
  }
  return r;
}

namespace {

// Problem lowered to flat arrays so the node loop does no allocation.
struct Compiled {
  int m = 0;
  double lambda_h = 0.0;
  std::vector<double> source_h;
  std::vector<std::vector<char>> regions;
  std::vector<int> task_region;
  std::vector<int> basis_site;
  std::vector<std::vector<double>> basis_poly;
  std::vector<int> task_term_begin;  // size tasks + 1
  std::vector<double> term_coef;
  std::vector<int> term_fac_begin;  // size terms + 1
  std::vector<int> fac_basis;

  [[nodiscard]] std::size_t n_tasks() const { return task_region.size(); }
};

bool zero_source(const ExpectationProblem& prob) {
  return std::all_of(prob.source_h.begin(), prob.source_h.end(), [](double v) { return v == 0.0; });
}

// With odd_free set, terms of odd total degree are dropped: at zero source
// they are odd in phi and cancel between the nodes xi and -xi.
Compiled compile(const ExpectationProblem& prob, bool odd_free = false) {
  Compiled c;
  c.m = static_cast<int>(prob.cov.rows());
  if (prob.cov.cols() != prob.cov.rows()) throw std::invalid_argument("expectation: covariance must be square");
  c.lambda_h = prob.lambda_h;
  c.source_h = prob.source_h;
  if (c.source_h.empty()) c.source_h.assign(static_cast<std::size_t>(c.m), 0.0);
  if (static_cast<int>(c.source_h.size()) != c.m) throw std::invalid_argument("expectation: source size mismatch");
  std::map<std::vector<char>, int> region_ids;
  std::map<std::tuple<int, int, int, int>, int> basis_ids;
  c.task_term_begin.push_back(0);
  c.term_fac_begin.push_back(0);
  for (const auto& task : prob.tasks) {
    std::vector<char> reg = task.region;
    if (reg.empty()) reg.assign(static_cast<std::size_t>(c.m), 0);
    if (static_cast<int>(reg.size()) != c.m) throw std::invalid_argument("expectation: region size mismatch");
    auto [it, inserted] = region_ids.emplace(reg, static_cast<int>(c.regions.size()));
    if (inserted) c.regions.push_back(reg);
    c.task_region.push_back(it->second);
    for (const auto& term : task.terms) {
      if (odd_free) {
        int parity = 0;
        for (const auto& f : term.factors) parity += f.power + f.derivs;
        if (parity % 2 != 0) continue;
      }
      c.term_coef.push_back(term.coef);
      for (const auto& f : term.factors) {
        if (f.site < 0 || f.site >= c.m) throw std::invalid_argument("expectation: factor site out of range");
        if (f.power == 0 && f.derivs == 0) continue;
        const int in_reg = reg[static_cast<std::size_t>(f.site)] ? 1 : 0;
        const auto key = std::make_tuple(f.site, f.power, f.derivs, in_reg);
        auto [bit, binserted] = basis_ids.emplace(key, static_cast<int>(c.basis_site.size()));
        if (binserted) {
          c.basis_site.push_back(f.site);
          c.basis_poly.push_back(in_reg ? site_factor_poly(f.power, f.derivs, c.lambda_h,
                                                           c.source_h[static_cast<std::size_t>(f.site)])
                                        : site_factor_poly(f.power, f.derivs, 0.0, 0.0));
        }
        c.fac_basis.push_back(bit->second);
      }
      c.term_fac_begin.push_back(static_cast<int>(c.fac_basis.size()));
    }
    c.task_term_begin.push_back(static_cast<int>(c.term_coef.size()));
  }
  return c;
}

// Scratch buffers for one evaluation thread.
struct Workspace {
  std::vector<double> u, e, basis;
  explicit Workspace(const Compiled& c)
      : u(static_cast<std::size_t>(c.m)), e(c.regions.size()), basis(c.basis_site.size()) {}
};

void accumulate(const Compiled& c, const double* phi, double weight, Workspace& ws, double* acc) {
  for (int a = 0; a < c.m; ++a) {
    const double p = phi[a];
    const double p2 = p * p;
    ws.u[static_cast<std::size_t>(a)] = -c.lambda_h * p2 * p2 + c.source_h[static_cast<std::size_t>(a)] * p;
  }
  for (std::size_t r = 0; r < c.regions.size(); ++r) {
    double s = 0.0;
    const auto& reg = c.regions[r];
    for (int a = 0; a < c.m; ++a)
      if (reg[static_cast<std::size_t>(a)]) s += ws.u[static_cast<std::size_t>(a)];
    ws.e[r] = std::exp(s);
  }
  for (std::size_t b = 0; b < c.basis_site.size(); ++b) {
    const auto& poly = c.basis_poly[b];
    const double x = phi[c.basis_site[b]];
    double v = 0.0;
    for (std::size_t k = poly.size(); k-- > 0;) v = v * x + poly[k];
    ws.basis[b] = v;
  }
  for (std::size_t t = 0; t < c.n_tasks(); ++t) {
    double s = 0.0;
    for (int term = c.task_term_begin[t]; term < c.task_term_begin[t + 1]; ++term) {
      double v = c.term_coef[static_cast<std::size_t>(term)];
      for (int f = c.term_fac_begin[static_cast<std::size_t>(term)];
           f < c.term_fac_begin[static_cast<std::size_t>(term) + 1]; ++f)
        v *= ws.basis[static_cast<std::size_t>(c.fac_basis[static_cast<std::size_t>(f)])];
      s += v;
    }
    acc[t] += weight * ws.e[static_cast<std::size_t>(c.task_region[t])] * s;
  }
}

// Eigen-directions kept by the rule, with their node offsets phi = L xi.
struct Directions {
  int m = 0;
  std::vector<Eigen::VectorXd> column;
  std::vector<QuadratureRule> rule;

  [[nodiscard]] std::int64_t node_count() const {
    std::int64_t n = 1;
    for (const auto& r : rule) n *= static_cast<std::int64_t>(r.size());
    return n;
  }
};

Directions directions(const Eigen::MatrixXd& cov, const QuadratureOptions& opts) {
  Directions d;
  d.m = static_cast<int>(cov.rows());
  if (d.m == 0) return d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::VectorXd mu = solver.eigenvalues();
  const double mu_max = mu.maxCoeff();
  if (!(mu_max > 0.0)) return d;
  if (mu.minCoeff() < -1e-10 * std::max(1.0, mu_max) * d.m)
    throw std::domain_error("expectation: covariance is not positive semi-definite");
  std::vector<int> order;
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = mu.size(); k-- > 0;) {
    if (mu[k] <= opts.drop_tol * mu_max) continue;
    const double s = std::sqrt(mu[k] / mu_max);
    const int o = std::clamp(static_cast<int>(std::ceil(opts.order + opts.order_slope * std::log10(s) - 1e-12)),
                             opts.min_order, opts.order);
    idx.push_back(k);
    order.push_back(o);
  }
  for (std::size_t i = 0; i < idx.size(); ++i) {
    d.column.push_back(solver.eigenvectors().col(idx[i]) * std::sqrt(mu[idx[i]]));
    d.rule.push_back(gauss_hermite_normal(order[i]));
  }
  return d;
}

}  // namespace

std::int64_t quadrature_node_count(const Eigen::MatrixXd& cov, const QuadratureOptions& opts) {
  return directions(cov, opts).node_count();
}

std::vector<double> expect_quadrature(const ExpectationProblem& prob, const QuadratureOptions& opts) {
  const bool fold = zero_source(prob);
  const Compiled c = compile(prob, fold);
  Directions dir = directions(prob.cov, opts);
  const std::int64_t total = dir.node_count();
  if (total > opts.node_budget) throw CapabilityError("expect_quadrature: node budget exceeded");
  if (fold && !dir.rule.empty()) {
    // The integrand is even, so the node set folds onto xi_1 >= 0.
    QuadratureRule& r0 = dir.rule.front();
    QuadratureRule half;
    const std::size_t n0 = r0.size();
    for (std::size_t i = n0 / 2; i < n0; ++i) {
      const bool centre = (n0 % 2 == 1 && i == n0 / 2);
      half.nodes.push_back(r0.nodes[i]);
      half.weights.push_back(centre ? r0.weights[i] : 2.0 * r0.weights[i]);
    }
    r0 = std::move(half);
  }
  const int levels = static_cast<int>(dir.rule.size());
  const std::size_t n_tasks = c.n_tasks();

  // Offsets per level and node: contrib[k][i] = L_k * xi_i.
  std::vector<std::vector<Eigen::VectorXd>> contrib(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k)
    for (double x : dir.rule[static_cast<std::size_t>(k)].nodes)
      contrib[static_cast<std::size_t>(k)].push_back(dir.column[static_cast<std::size_t>(k)] * x);

  // Outer levels become fixed chunks; the inner levels run an odometer with
  // cached partial sums.
  int outer = 0;
  std::int64_t n_chunks = 1;
  while (outer < levels && n_chunks < 64) n_chunks *= static_cast<std::int64_t>(dir.rule[static_cast<std::size_t>(outer++)].size());

  std::vector<double> partial(static_cast<std::size_t>(n_chunks) * n_tasks, 0.0);
#pragma omp parallel
  {
    Workspace ws(c);
    std::vector<Eigen::VectorXd> phi(static_cast<std::size_t>(levels + 1), Eigen::VectorXd::Zero(c.m));
    std::vector<double> wt(static_cast<std::size_t>(levels + 1), 1.0);
    std::vector<int> ix(static_cast<std::size_t>(levels), 0);
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t chunk = 0; chunk < n_chunks; ++chunk) {
      double* acc = partial.data() + static_cast<std::size_t>(chunk) * n_tasks;
      std::int64_t rest = chunk;
      for (int k = outer - 1; k >= 0; --k) {
        const auto sz = static_cast<std::int64_t>(dir.rule[static_cast<std::size_t>(k)].size());
        ix[static_cast<std::size_t>(k)] = static_cast<int>(rest % sz);
        rest /= sz;
      }
      for (int k = outer; k < levels; ++k) ix[static_cast<std::size_t>(k)] = 0;
      auto refresh = [&](int from) {
        for (int k = from; k < levels; ++k) {
          const auto uk = static_cast<std::size_t>(k);
          phi[uk + 1] = phi[uk] + contrib[uk][static_cast<std::size_t>(ix[uk])];
          wt[uk + 1] = wt[uk] * dir.rule[uk].weights[static_cast<std::size_t>(ix[uk])];
        }
      };
      refresh(0);
      while (true) {
        accumulate(c, phi[static_cast<std::size_t>(levels)].data(), wt[static_cast<std::size_t>(levels)], ws, acc);
        int k = levels - 1;
        while (k >= outer) {
          if (++ix[static_cast<std::size_t>(k)] < static_cast<int>(dir.rule[static_cast<std::size_t>(k)].size())) break;
          ix[static_cast<std::size_t>(k)] = 0;
          --k;
        }
        if (k < outer) break;
        refresh(k);
      }
    }
  }
  std::vector<double> out(n_tasks, 0.0);
  for (std::int64_t chunk = 0; chunk < n_chunks; ++chunk)
    for (std::size_t t = 0; t < n_tasks; ++t) out[t] += partial[static_cast<std::size_t>(chunk) * n_tasks + t];
  return out;
}

std::vector<double> expect_quadrature_serial(const ExpectationProblem& prob, const QuadratureOptions& opts) {
  const Compiled c = compile(prob);
  const Directions dir = directions(prob.cov, opts);
  const std::int64_t total = dir.node_count();
  if (total > opts.node_budget) throw CapabilityError("expect_quadrature_serial: node budget exceeded");
  const int levels = static_cast<int>(dir.rule.size());
  Workspace ws(c);
  std::vector<double> out(c.n_tasks(), 0.0);
  Eigen::VectorXd phi(c.m);
  for (std::int64_t node = 0; node < total; ++node) {
    std::int64_t rest = node;
    phi.setZero();
    double w = 1.0;
    for (int k = levels - 1; k >= 0; --k) {
      const auto& rule = dir.rule[static_cast<std::size_t>(k)];
      const auto sz = static_cast<std::int64_t>(rule.size());
      const auto i = static_cast<std::size_t>(rest % sz);
      rest /= sz;
      phi += dir.column[static_cast<std::size_t>(k)] * rule.nodes[i];
      w *= rule.weights[i];
    }
    accumulate(c, phi.data(), w, ws, out.data());
  }
  return out;
}

MonteCarloResult expect_monte_carlo(const ExpectationProblem& prob, std::int64_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("expect_monte_carlo: need at least two samples");
  const Compiled c = compile(prob);
  const Eigen::MatrixXd l = psd_factor(prob.cov);
  const std::size_t n_tasks = c.n_tasks();
  constexpr int kChunks = 64;
  std::vector<double> s1(kChunks * n_tasks, 0.0);
  std::vector<double> s2(kChunks * n_tasks, 0.0);
#pragma omp parallel
  {
    Workspace ws(c);
    std::vector<double> one(n_tasks);
    Eigen::VectorXd z(c.m);
#pragma omp for schedule(dynamic, 1)
    for (int chunk = 0; chunk < kChunks; ++chunk) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(chunk)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal;
      const std::int64_t lo = samples * chunk / kChunks;
      const std::int64_t hi = samples * (chunk + 1) / kChunks;
      for (std::int64_t it = lo; it < hi; ++it) {
        for (int k = 0; k < c.m; ++k) z[k] = normal(rng);
        const Eigen::VectorXd phi = l * z;
        std::fill(one.begin(), one.end(), 0.0);
        accumulate(c, phi.data(), 1.0, ws, one.data());
        for (std::size_t t = 0; t < n_tasks; ++t) {
          s1[static_cast<std::size_t>(chunk) * n_tasks + t] += one[t];
          s2[static_cast<std::size_t>(chunk) * n_tasks + t] += one[t] * one[t];
        }
      }
    }
  }
  MonteCarloResult res;
  res.mean.assign(n_tasks, 0.0);
  res.stderr_.assign(n_tasks, 0.0);
  std::vector<double> sq(n_tasks, 0.0);
  for (int chunk = 0; chunk < kChunks; ++chunk)
    for (std::size_t t = 0; t < n_tasks; ++t) {
      res.mean[t] += s1[static_cast<std::size_t>(chunk) * n_tasks + t];
      sq[t] += s2[static_cast<std::size_t>(chunk) * n_tasks + t];
    }
  const auto n = static_cast<double>(samples);
  for (std::size_t t = 0; t < n_tasks; ++t) {
    res.mean[t] /= n;
    const double var = std::max(sq[t] / n - res.mean[t] * res.mean[t], 0.0);
    res.stderr_[t] = std::sqrt(var / (n - 1.0));
  }
  return res;
}

}  // namespace ccx
