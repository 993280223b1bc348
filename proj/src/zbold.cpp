#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ccx/errors.hpp"
#include "ccx/model.hpp"
#include "ccx/quadrature.hpp"
#include "ccx/trees.hpp"

namespace ccx {

QuadratureOptions coarser(const QuadratureOptions& q) {
  QuadratureOptions c = q;
  c.order = std::max(q.order - 2, 1);
  c.min_order = std::min(q.min_order, c.order);
  return c;
}

ZEvaluator::ZEvaluator(const LatticeModel& model, ZOptions opts, SourceField source)
    : model_(model), opts_(opts), source_(std::move(source)) {
  if (source_.empty()) source_.assign(static_cast<std::size_t>(model_.size()), 0.0);
  if (static_cast<int>(source_.size()) != model_.size()) throw std::invalid_argument("ZEvaluator: source size mismatch");
  if (opts_.t_order < 1) throw std::invalid_argument("ZEvaluator: t_order must be >= 1");
}

namespace {

constexpr int kMaxConfig = 5;

// Per-site (power, derivative count) pattern of one expanded term.
using Signature = std::vector<SiteFactor>;

struct SigLess {
  bool operator()(const Signature& a, const Signature& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](const SiteFactor& x, const SiteFactor& y) {
      return std::tie(x.site, x.power, x.derivs) < std::tie(y.site, y.power, y.derivs);
    });
  }
};

struct PreparedRequest {
  std::size_t index = 0;
  bool zero = false;
  std::vector<char> local_region;
  // signature -> coefficient per tree
  std::map<Signature, std::vector<double>, SigLess> terms;
};

}  // namespace

std::vector<double> ZEvaluator::evaluate(const std::vector<ZRequest>& requests) const {
  return evaluate_impl(requests, opts_.quad);
}

std::vector<Estimate> ZEvaluator::evaluate_with_error(const std::vector<ZRequest>& requests) const {
  const auto fine = evaluate_impl(requests, opts_.quad);
  ZEvaluator coarse_eval(model_, opts_, source_);
  coarse_eval.opts_.t_order = std::max(opts_.t_order - 2, 1);
  const auto coarse = coarse_eval.evaluate_impl(requests, coarser(opts_.quad));
  passes_ += coarse_eval.passes_;
  std::vector<Estimate> out(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    out[i].value = fine[i];
    out[i].quad_error = std::abs(fine[i] - coarse[i]);
    out[i].method = "tensor";
  }
  return out;
}

std::vector<double> ZEvaluator::evaluate_impl(const std::vector<ZRequest>& requests,
                                              const QuadratureOptions& quad) const {
  const int n_sites = model_.size();
  const double h = model_.h();
  const Eigen::MatrixXd& base = model_.cov();
  std::vector<double> out(requests.size(), 0.0);

  std::map<std::vector<int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& rq = requests[i];
    if (rq.config.empty()) throw std::invalid_argument("ZEvaluator: empty configuration");
    if (static_cast<int>(rq.config.size()) > kMaxConfig) throw CapabilityError("ZEvaluator: configuration too long");
    if (static_cast<int>(rq.region.size()) != n_sites) throw std::invalid_argument("ZEvaluator: region size mismatch");
    for (int s : rq.config)
      if (s < 0 || s >= n_sites) throw std::out_of_range("ZEvaluator: configuration site out of range");
    groups[std::vector<int>(rq.config.begin(), rq.config.end() - 1)].push_back(i);
  }

  for (const auto& [prefix, members] : groups) {
    const int n = static_cast<int>(prefix.size()) + 1;
    std::vector<int> local(static_cast<std::size_t>(n_sites), -1);
    std::vector<int> sites;
    for (std::size_t i : members)
      for (int a = 0; a < n_sites; ++a)
        if (requests[i].region[static_cast<std::size_t>(a)] && local[static_cast<std::size_t>(a)] < 0) {
          local[static_cast<std::size_t>(a)] = 0;
        }
    for (int a = 0; a < n_sites; ++a)
      if (local[static_cast<std::size_t>(a)] == 0) {
        local[static_cast<std::size_t>(a)] = static_cast<int>(sites.size());
        sites.push_back(a);
      }
    const auto m = static_cast<Eigen::Index>(sites.size());

    std::vector<std::vector<int>> tree_exps;
    std::vector<OrderedTree> trees;
    if (n == 1) {
      tree_exps.emplace_back();
      trees.push_back(OrderedTree{1, {}});
    } else {
      TreeStream stream(n);
      OrderedTree t;
      while (stream.next(t)) {
        trees.push_back(t);
        tree_exps.push_back(t_exponents(t));
      }
    }

    std::vector<PreparedRequest> prepared;
    for (std::size_t i : members) {
      const auto& rq = requests[i];
      PreparedRequest pr;
      pr.index = i;
      pr.local_region.assign(static_cast<std::size_t>(m), 0);
      for (int a = 0; a < n_sites; ++a)
        if (rq.region[static_cast<std::size_t>(a)]) pr.local_region[static_cast<std::size_t>(local[static_cast<std::size_t>(a)])] = 1;
      std::vector<int> power(static_cast<std::size_t>(n_sites), 0);
      for (int w : rq.insertions) {
        if (w < 0 || w >= n_sites) throw std::out_of_range("ZEvaluator: insertion site out of range");
        if (!rq.region[static_cast<std::size_t>(w)]) pr.zero = true;
        ++power[static_cast<std::size_t>(w)];
      }
      if (pr.zero) {
        prepared.push_back(std::move(pr));
        continue;
      }
      std::vector<Mask> shells;
      for (int k = 1; k <= n - 1; ++k) shells.push_back(mask_and(model_.shell(rq.config, k), rq.region));
      for (std::size_t ti = 0; ti < trees.size(); ++ti) {
        // Choices of y_j in B'_{x_1..x_eta(j)} for each Delta factor.
        std::vector<std::vector<std::pair<int, double>>> choices;
        bool dead = false;
        for (int j = 2; j <= n && !dead; ++j) {
          const int xj = rq.config[static_cast<std::size_t>(j - 1)];
          if (!rq.region[static_cast<std::size_t>(xj)]) {
            dead = true;
            break;
          }
          std::vector<std::pair<int, double>> ys;
          const Mask& sh = shells[static_cast<std::size_t>(trees[ti].eta(j) - 1)];
          for (int y = 0; y < n_sites; ++y)
            if (sh[static_cast<std::size_t>(y)]) ys.emplace_back(y, base(xj, y) / h);
          if (ys.empty()) dead = true;
          choices.push_back(std::move(ys));
        }
        if (dead) continue;
        std::vector<std::size_t> pick(choices.size(), 0);
        while (true) {
          std::vector<int> derivs(static_cast<std::size_t>(n_sites), 0);
          double coef = 1.0;
          for (std::size_t c = 0; c < choices.size(); ++c) {
            const auto [y, cy] = choices[c][pick[c]];
            ++derivs[static_cast<std::size_t>(rq.config[c + 1])];
            ++derivs[static_cast<std::size_t>(y)];
            coef *= cy;
          }
          Signature sig;
          for (int a = 0; a < n_sites; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            if (power[ua] || derivs[ua]) sig.push_back({local[ua], power[ua], derivs[ua]});
          }
          auto& slot = pr.terms[sig];
          if (slot.empty()) slot.assign(trees.size(), 0.0);
          slot[ti] += coef;
          std::size_t c = 0;
          while (c < pick.size() && ++pick[c] == choices[c].size()) pick[c++] = 0;
          if (c == pick.size()) break;
        }
      }
      prepared.push_back(std::move(pr));
    }

    // Tensor Gauss-Legendre over t in [0,1]^{n-1}.
    const QuadratureRule tr = gauss_legendre(opts_.t_order, 0.0, 1.0);
    const int tdim = n - 1;
    std::int64_t t_nodes = 1;
    for (int k = 0; k < tdim; ++k) t_nodes *= static_cast<std::int64_t>(tr.size());
    const std::vector<Point> prefix_pts = model_.points(prefix);
    std::vector<double> src(static_cast<std::size_t>(m));
    for (Eigen::Index a = 0; a < m; ++a) src[static_cast<std::size_t>(a)] = h * source_[static_cast<std::size_t>(sites[static_cast<std::size_t>(a)])];

    for (std::int64_t node = 0; node < t_nodes; ++node) {
      std::vector<double> t(static_cast<std::size_t>(tdim));
      double gw = 1.0;
      std::int64_t rest = node;
      for (int k = 0; k < tdim; ++k) {
        const auto i = static_cast<std::size_t>(rest % static_cast<std::int64_t>(tr.size()));
        rest /= static_cast<std::int64_t>(tr.size());
        t[static_cast<std::size_t>(k)] = tr.nodes[i];
        gw *= tr.weights[i];
      }
      std::vector<double> tw(trees.size(), 1.0);
      for (std::size_t ti = 0; ti < trees.size(); ++ti)
        for (std::size_t l = 0; l < tree_exps[ti].size(); ++l) tw[ti] *= std::pow(t[l], tree_exps[ti][l]);

      const Eigen::MatrixXd full = tdim == 0 ? base : interpolate(base, model_.grid(), prefix_pts, t);
      ExpectationProblem prob;
      prob.cov.resize(m, m);
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) prob.cov(a, b) = full(sites[static_cast<std::size_t>(a)], sites[static_cast<std::size_t>(b)]);
      prob.lambda_h = model_.lambda() * h;
      prob.source_h = src;
      std::vector<std::size_t> owner;
      for (const auto& pr : prepared) {
        if (pr.zero || pr.terms.empty()) continue;
        ExpectationTask task;
        task.region = pr.local_region;
        for (const auto& [sig, coefs] : pr.terms) {
          double c = 0.0;
          for (std::size_t ti = 0; ti < coefs.size(); ++ti) c += tw[ti] * coefs[ti];
          if (c == 0.0) continue;
          task.terms.push_back({gw * c, sig});
        }
        prob.tasks.push_back(std::move(task));
        owner.push_back(pr.index);
      }
      if (prob.tasks.empty()) continue;
      QuadratureOptions q = quad;
      q.order = std::max(quad.order - opts_.order_step * std::max(n - 2, 0), std::max(quad.min_order, 1));
      q.min_order = std::min(q.min_order, q.order);
      const auto vals = opts_.serial ? expect_quadrature_serial(prob, q) : expect_quadrature(prob, q);
      ++passes_;
      for (std::size_t k = 0; k < owner.size(); ++k) out[owner[k]] += vals[k];
    }
  }
  return out;
}

}  // namespace ccx
