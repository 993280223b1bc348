#include "ccx/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ccx/errors.hpp"

namespace ccx {

void ModelParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("ModelParams: lambda must be >= 0");
  if (!(h > 0.0)) throw std::invalid_argument("ModelParams: h must be > 0");
  if (!std::isfinite(window_lo) || !std::isfinite(window_hi) || window_hi < window_lo)
    throw std::invalid_argument("ModelParams: window must be a bounded interval");
  if (kernel.dimension != 1) throw CapabilityError("ModelParams: the interacting model is one-dimensional");
  kernel.validate();
}

LatticeModel::LatticeModel(const ModelParams& p) : params_(p) {
  params_.validate();
  grid_ = line_grid(p.window_lo, p.window_hi, p.h);
  cov_ = grid_covariance(grid_, p.kernel);
}

std::vector<Point> LatticeModel::points(const std::vector<int>& idx) const {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(site(i));
  return out;
}

int LatticeModel::site_at(double x) const {
  const int i = grid_.index_of({x, 0.0});
  if (i < 0) throw std::out_of_range("LatticeModel: no site at the requested coordinate");
  return i;
}

Mask LatticeModel::ball(const std::vector<int>& config) const { return ball_mask(grid_, points(config)); }

Mask LatticeModel::shell(const std::vector<int>& config, int k) const {
  return shell_mask(grid_, points(config), k);
}

bool LatticeModel::admissible(const std::vector<int>& config) const { return is_admissible(points(config)); }

Mask mask_and(const Mask& a, const Mask& b) {
  Mask out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
  return out;
}

Mask mask_minus(const Mask& a, const Mask& b) {
  Mask out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && !b[i]) ? 1 : 0;
  return out;
}

int mask_count(const Mask& a) { return static_cast<int>(std::count(a.begin(), a.end(), 1)); }

Estimate partition_function(const LatticeModel& model, const SourceField& source, const MethodOptions& opts,
                            const Mask& region) {
  const Mask reg = region.empty() ? model.full() : region;
  if (opts.method == Method::Tensor) {
    ZOptions zo;
    zo.quad = opts.quad;
    const ZEvaluator ev(model, zo, source);
    auto est = ev.evaluate_with_error({ZRequest{{0}, reg, {}}});
    est[0].method = "tensor";
    return est[0];
  }
  ExpectationProblem prob;
  prob.cov = model.cov();
  prob.lambda_h = model.lambda() * model.h();
  prob.source_h.assign(static_cast<std::size_t>(model.size()), 0.0);
  if (!source.empty()) {
    if (static_cast<int>(source.size()) != model.size()) throw std::invalid_argument("partition_function: source size");
    for (int a = 0; a < model.size(); ++a) prob.source_h[static_cast<std::size_t>(a)] = model.h() * source[static_cast<std::size_t>(a)];
  }
  prob.tasks.push_back({reg, {ExpectationTerm{1.0, {}}}});
  const auto mc = expect_monte_carlo(prob, opts.samples, opts.seed);
  Estimate e;
  e.value = mc.mean[0];
  e.mc_stderr = mc.stderr_[0];
  e.method = "monte-carlo";
  return e;
}

double cumulant_from_moments(const std::vector<double>& moments, int r) {
  if (r < 1 || r > 6) throw CapabilityError("cumulant_from_moments: 1 <= r <= 6");
  if (moments.size() < (std::size_t{1} << r)) throw std::invalid_argument("cumulant_from_moments: moment table too small");
  // Restricted growth strings enumerate set partitions of {0..r-1}.
  std::vector<int> a(static_cast<std::size_t>(r), 0);
  double total = 0.0;
  while (true) {
    const int blocks = *std::max_element(a.begin(), a.end()) + 1;
    std::vector<unsigned> masks(static_cast<std::size_t>(blocks), 0u);
    for (int i = 0; i < r; ++i) masks[static_cast<std::size_t>(a[static_cast<std::size_t>(i)])] |= 1u << i;
    double prod = std::tgamma(static_cast<double>(blocks)) * ((blocks - 1) % 2 == 0 ? 1.0 : -1.0);
    for (unsigned mk : masks) prod *= moments[mk] / moments[0];
    total += prod;
    int i = r - 1;
    while (i > 0) {
      const int mx = *std::max_element(a.begin(), a.begin() + i);
      if (a[static_cast<std::size_t>(i)] <= mx) {
        ++a[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < r; ++j) a[static_cast<std::size_t>(j)] = 0;
        break;
      }
      --i;
    }
    if (i == 0) break;
  }
  return total;
}

namespace {

std::vector<double> insertion_moments(const LatticeModel& model, const std::vector<int>& w, const SourceField& src,
                                      const QuadratureOptions& quad) {
  const int r = static_cast<int>(w.size());
  ExpectationProblem prob;
  prob.cov = model.cov();
  prob.lambda_h = model.lambda() * model.h();
  prob.source_h.assign(static_cast<std::size_t>(model.size()), 0.0);
  for (int a = 0; a < model.size() && !src.empty(); ++a) prob.source_h[static_cast<std::size_t>(a)] = model.h() * src[static_cast<std::size_t>(a)];
  for (unsigned mk = 0; mk < (1u << r); ++mk) {
    std::vector<int> power(static_cast<std::size_t>(model.size()), 0);
    for (int i = 0; i < r; ++i)
      if (mk & (1u << i)) ++power[static_cast<std::size_t>(w[static_cast<std::size_t>(i)])];
    ExpectationTerm term;
    for (int a = 0; a < model.size(); ++a)
      if (power[static_cast<std::size_t>(a)]) term.factors.push_back({a, power[static_cast<std::size_t>(a)], 0});
    prob.tasks.push_back({model.full(), {term}});
  }
  return expect_quadrature(prob, quad);
}

double log_z(const LatticeModel& model, const SourceField& src, const QuadratureOptions& quad) {
  ExpectationProblem prob;
  prob.cov = model.cov();
  prob.lambda_h = model.lambda() * model.h();
  prob.source_h.assign(static_cast<std::size_t>(model.size()), 0.0);
  for (int a = 0; a < model.size(); ++a) prob.source_h[static_cast<std::size_t>(a)] = model.h() * src[static_cast<std::size_t>(a)];
  prob.tasks.push_back({model.full(), {ExpectationTerm{1.0, {}}}});
  return std::log(expect_quadrature(prob, quad)[0]);
}

// Mixed central difference d^r lnZ / dJ_{w_1}..dJ_{w_r} with step delta.
double mixed_difference(const LatticeModel& model, const std::vector<int>& w, double delta,
                        const QuadratureOptions& quad) {
  const int r = static_cast<int>(w.size());
  double total = 0.0;
  for (unsigned mk = 0; mk < (1u << r); ++mk) {
    SourceField src(static_cast<std::size_t>(model.size()), 0.0);
    int sign = 1;
    for (int i = 0; i < r; ++i) {
      const bool plus = (mk & (1u << i)) != 0;
      src[static_cast<std::size_t>(w[static_cast<std::size_t>(i)])] += plus ? delta : -delta;
      if (!plus) sign = -sign;
    }
    total += sign * log_z(model, src, quad);
  }
  return total / std::pow(2.0 * delta, r) / std::pow(model.h(), r);
}

}  // namespace

SchwingerResult schwinger_bruteforce(const LatticeModel& model, const std::vector<int>& w,
                                     const QuadratureOptions& quad, double fd_step) {
  const int r = static_cast<int>(w.size());
  if (r < 1 || r > 4) throw CapabilityError("schwinger_bruteforce: 1 <= r <= 4");
  for (int s : w)
    if (s < 0 || s >= model.size()) throw std::out_of_range("schwinger_bruteforce: site out of range");
  SchwingerResult res;
  const auto fine = insertion_moments(model, w, {}, quad);
  const auto coarse = insertion_moments(model, w, {}, coarser(quad));
  res.value = cumulant_from_moments(fine, r);
  res.quad_error = std::abs(res.value - cumulant_from_moments(coarse, r));
  const double d1 = mixed_difference(model, w, fd_step, quad);
  const double d2 = mixed_difference(model, w, 0.5 * fd_step, quad);
  const double d3 = mixed_difference(model, w, 0.25 * fd_step, quad);
  const double rich_a = (4.0 * d2 - d1) / 3.0;
  const double rich_b = (4.0 * d3 - d2) / 3.0;
  res.fd_value = rich_b;
  res.fd_error = std::abs(rich_b - rich_a);
  return res;
}

Estimate ztilde(const LatticeModel& model, const std::vector<int>& config, const SourceField& source,
                const ZOptions& opts) {
  const ZEvaluator ev(model, opts, source);
  return ev.evaluate_with_error({ZRequest{config, model.full(), {}}})[0];
}

Estimate z_bold(const LatticeModel& model, const std::vector<int>& config, const Mask& region,
                const SourceField& source, const ZOptions& opts) {
  const Mask reg = mask_and(region.empty() ? model.full() : region, model.ball(config));
  const ZEvaluator ev(model, opts, source);
  return ev.evaluate_with_error({ZRequest{config, reg, {}}})[0];
}

Identity13Report identity13_residual(const LatticeModel& model, const std::vector<int>& config,
                                     const SourceField& source, const ZOptions& opts) {
  if (config.empty()) throw std::invalid_argument("identity13_residual: empty configuration");
  if (!model.admissible(config)) throw std::invalid_argument("identity13_residual: configuration not admissible");
  const ZEvaluator ev(model, opts, source);
  const Mask b = model.ball(config);
  std::vector<ZRequest> reqs;
  reqs.push_back({config, model.full(), {}});
  reqs.push_back({config, mask_and(model.full(), b), {}});
  reqs.push_back({{0}, mask_minus(model.full(), b), {}});
  std::vector<int> zs;
  for (int z = 0; z < model.size(); ++z) {
    if (b[static_cast<std::size_t>(z)]) continue;
    zs.push_back(z);
    std::vector<int> ext = config;
    ext.push_back(z);
    reqs.push_back({ext, model.full(), {}});
  }
  const auto est = ev.evaluate_with_error(reqs);
  Identity13Report rep;
  rep.lhs = est[0];
  rep.z_bold = est[1];
  rep.z_complement = est[2];
  rep.z_terms = static_cast<int>(zs.size());
  rep.z_sum.method = "tensor";
  for (std::size_t k = 0; k < zs.size(); ++k) {
    rep.z_sum.value += model.h() * est[3 + k].value;
    rep.z_sum.quad_error += model.h() * est[3 + k].quad_error;
  }
  const double rhs = rep.z_bold.value * rep.z_complement.value + rep.z_sum.value;
  rep.residual = std::abs(rep.lhs.value - rhs);
  const double roundoff = 1e-13 * (std::abs(rep.lhs.value) + std::abs(rhs) + 1.0);
  rep.tolerance = rep.lhs.tolerance() + rep.z_bold.tolerance() * std::abs(rep.z_complement.value) +
                  rep.z_complement.tolerance() * std::abs(rep.z_bold.value) + rep.z_sum.tolerance() + roundoff;
  rep.pass = rep.residual <= rep.tolerance;
  return rep;
}

Expansion14Report expansion14_check(const LatticeModel& model, const std::vector<int>& x, int z1, int depth,
                                    const ZOptions& opts) {
  if (depth < 1 || depth > 3) throw CapabilityError("expansion14_check: depth must lie in [1, 3]");
  const Mask bx = x.empty() ? Mask(static_cast<std::size_t>(model.size()), 0) : model.ball(x);
  if (bx[static_cast<std::size_t>(z1)]) throw std::invalid_argument("expansion14_check: z1 must lie outside B_x");
  const Mask lam = mask_minus(model.full(), bx);
  const ZEvaluator ev(model, opts);

  // Chains z_1..z_m with z_{j+1} outside B_{x, z_1..z_j}; sites outside the
  // reduced window carry no interaction, so only window sites contribute.
  std::vector<std::vector<std::vector<int>>> chains(static_cast<std::size_t>(depth));
  chains[0].push_back({z1});
  for (int m = 1; m < depth; ++m) {
    for (const auto& c : chains[static_cast<std::size_t>(m - 1)]) {
      std::vector<int> all = x;
      all.insert(all.end(), c.begin(), c.end());
      const Mask b = model.ball(all);
      for (int z = 0; z < model.size(); ++z) {
        if (b[static_cast<std::size_t>(z)] || !lam[static_cast<std::size_t>(z)]) continue;
        auto next = c;
        next.push_back(z);
        chains[static_cast<std::size_t>(m)].push_back(next);
      }
    }
  }
  std::vector<ZRequest> reqs;
  reqs.push_back({{0}, lam, {}});
  for (const auto& level : chains)
    for (const auto& c : level) {
      std::vector<int> all = x;
      all.insert(all.end(), c.begin(), c.end());
      reqs.push_back({c, mask_and(lam, model.ball(c)), {}});
      reqs.push_back({{0}, mask_minus(model.full(), model.ball(all)), {}});
    }
  const auto est = ev.evaluate_with_error(reqs);
  Expansion14Report rep;
  rep.target = est[0].value;
  double sum = 0.0;
  double tol = est[0].tolerance();
  std::size_t k = 1;
  for (int m = 0; m < depth; ++m) {
    const double scale = std::pow(model.h(), m);
    for (std::size_t c = 0; c < chains[static_cast<std::size_t>(m)].size(); ++c, k += 2) {
      sum += scale * est[k].value * est[k + 1].value;
      tol += scale * (est[k].tolerance() * std::abs(est[k + 1].value) + est[k + 1].tolerance() * std::abs(est[k].value));
    }
    rep.partial_sums.push_back(sum);
    rep.residuals.push_back(std::abs(rep.target - sum));
    rep.terms_per_depth.push_back(static_cast<int>(chains[static_cast<std::size_t>(m)].size()));
  }
  // Termination: no admissible extension of the deepest chains.
  bool any = false;
  for (const auto& c : chains.back()) {
    std::vector<int> all = x;
    all.insert(all.end(), c.begin(), c.end());
    const Mask b = model.ball(all);
    for (int z = 0; z < model.size(); ++z) any = any || (!b[static_cast<std::size_t>(z)] && lam[static_cast<std::size_t>(z)]);
  }
  rep.terminated = !any;
  rep.tolerance = tol + 1e-13 * (std::abs(rep.target) + 1.0);
  return rep;
}

}  // namespace ccx
