#include "ccx/ksolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "ccx/errors.hpp"
#include "ccx/geometry.hpp"

namespace ccx {

using nlohmann::json;

ZOptions KSConfig::default_z_options() {
  ZOptions z;
  z.t_order = 4;
  z.quad.order = 6;
  z.quad.min_order = 2;
  z.quad.order_slope = 3.0;
  z.order_step = 2;
  return z;
}

void KSConfig::validate() const {
  if (n_max < 2) throw std::invalid_argument("KSConfig: n_max must be >= 2");
  if (m_max < 2) throw std::invalid_argument("KSConfig: m_max must be >= 2");
  if (!(tol > 0.0)) throw std::invalid_argument("KSConfig: tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("KSConfig: max_iter must be >= 1");
}

ConfigTable ConfigTable::build(const LatticeModel& model, int n_max) {
  ConfigTable t;
  std::vector<SiteTuple> level;
  for (int a = 0; a < model.size(); ++a) level.push_back({a});
  for (int len = 1; len <= n_max + 1 && !level.empty(); ++len) {
    if (len == n_max + 1) {
      t.overflow = static_cast<std::int64_t>(level.size());
      break;
    }
    std::vector<SiteTuple> next;
    for (const auto& c : level) {
      const int id = t.size();
      t.index[c] = id;
      t.configs.push_back(c);
      t.parent.push_back(len == 1 ? -1 : t.index.at(SiteTuple(c.begin(), c.end() - 1)));
      for (int a = 0; a < model.size(); ++a) {
        SiteTuple e = c;
        e.push_back(a);
        if (model.admissible(e)) next.push_back(std::move(e));
      }
    }
    level = std::move(next);
  }
  return t;
}

int ConfigTable::find(const SiteTuple& c) const {
  const auto it = index.find(c);
  return it == index.end() ? -1 : it->second;
}

namespace {

struct PendingEntry {
  int row;
  int col;
  double scale;
  std::size_t request;
};

// Requests are shared between operators whenever (config, region, insertions) coincide.
class RequestPool {
 public:
  std::size_t add(const SiteTuple& config, const Mask& region, SiteTuple ins) {
    std::sort(ins.begin(), ins.end());
    auto key = std::make_tuple(config, region, ins);
    const auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    const std::size_t id = requests_.size();
    requests_.push_back(ZRequest{config, region, ins});
    ids_.emplace(std::move(key), id);
    return id;
  }
  [[nodiscard]] const std::vector<ZRequest>& requests() const { return requests_; }

 private:
  std::vector<ZRequest> requests_;
  std::map<std::tuple<SiteTuple, Mask, SiteTuple>, std::size_t> ids_;
};

bool inserted_inside(const SiteTuple& ins, const Mask& region) {
  return std::all_of(ins.begin(), ins.end(), [&](int w) { return region[static_cast<std::size_t>(w)] != 0; });
}

}  // namespace

KSSystem build_ks_system(const LatticeModel& model, const KSConfig& cfg, const std::vector<SiteTuple>& kernel_sets,
                         const std::vector<SiteTuple>& anchor_sets) {
  cfg.validate();
  KSSystem sys;
  sys.table = ConfigTable::build(model, cfg.n_max);
  sys.h = model.h();
  const ConfigTable& tab = sys.table;
  const int n_sites = model.size();

  RequestPool pool;
  std::map<SiteTuple, std::vector<PendingEntry>> kernel_pending;
  std::map<SiteTuple, std::vector<PendingEntry>> anchor_pending;

  std::vector<SiteTuple> ksets = kernel_sets;
  ksets.emplace_back();
  for (auto& k : ksets) std::sort(k.begin(), k.end());
  std::sort(ksets.begin(), ksets.end());
  ksets.erase(std::unique(ksets.begin(), ksets.end()), ksets.end());

  for (const auto& ins : ksets) {
    auto& pending = kernel_pending[ins];
    sys.kernel[ins].assign(static_cast<std::size_t>(tab.size()), {});
    for (int row = 0; row < tab.size(); ++row) {
      const SiteTuple& y = tab.configs[static_cast<std::size_t>(row)];
      const SiteTuple x(y.begin(), y.end() - 1);
      const Mask outside = x.empty() ? model.full() : mask_minus(model.full(), model.ball(x));
      // Depth-first over the chains z_1..z_m with (x, z) admissible.
      std::vector<SiteTuple> stack{{y.back()}};
      while (!stack.empty()) {
        SiteTuple z = std::move(stack.back());
        stack.pop_back();
        const int m = static_cast<int>(z.size());
        SiteTuple col = x;
        col.insert(col.end(), z.begin(), z.end());
        const int col_id = tab.find(col);
        if (col_id < 0 || m > cfg.m_max) {
          ++sys.dropped_terms;
          continue;
        }
        const Mask region = mask_and(outside, model.ball(z));
        if (inserted_inside(ins, region))
          pending.push_back({row, col_id, std::pow(sys.h, m - 1), pool.add(z, region, ins)});
        for (int a = 0; a < n_sites; ++a) {
          SiteTuple ext = col;
          ext.push_back(a);
          if (!model.admissible(ext)) continue;
          SiteTuple zz = z;
          zz.push_back(a);
          stack.push_back(std::move(zz));
        }
      }
    }
  }

  for (const auto& ins : anchor_sets) {
    if (ins.empty()) throw std::invalid_argument("build_ks_system: anchor set needs an anchor");
    SiteTuple key = ins;
    std::sort(key.begin() + 1, key.end());
    auto& pending = anchor_pending[key];
    sys.anchor[key].assign(static_cast<std::size_t>(tab.size()), 0.0);
    for (int i = 0; i < tab.size(); ++i) {
      const SiteTuple& x = tab.configs[static_cast<std::size_t>(i)];
      if (x.front() != key.front()) continue;
      const Mask region = model.ball(x);
      if (!inserted_inside(key, region)) continue;
      pending.push_back({i, i, std::pow(sys.h, static_cast<int>(x.size()) - 1), pool.add(x, region, key)});
    }
  }

  const ZEvaluator ev(model, cfg.z);
  const std::vector<double> vals = ev.evaluate(pool.requests());
  sys.passes = ev.passes();
  for (const auto& [ins, pending] : kernel_pending) {
    auto& mat = sys.kernel[ins];
    for (const auto& e : pending) mat[static_cast<std::size_t>(e.row)].emplace_back(e.col, e.scale * vals[e.request]);
    for (auto& row : mat) std::sort(row.begin(), row.end());
  }
  for (const auto& [ins, pending] : anchor_pending) {
    auto& vec = sys.anchor[ins];
    for (const auto& e : pending) vec[static_cast<std::size_t>(e.col)] = e.scale * vals[e.request];
  }
  return sys;
}

const std::vector<double>& SequenceFunction::at(const SiteTuple& t) const {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] == t) return values[i];
  throw std::out_of_range("SequenceFunction: tuple not stored");
}

std::vector<double> unit_function(const ConfigTable& table) {
  std::vector<double> e(static_cast<std::size_t>(table.size()), 0.0);
  for (int i = 0; i < table.size(); ++i)
    if (table.length(i) == 1) e[static_cast<std::size_t>(i)] = 1.0;
  return e;
}

namespace {

const SparseMatrix& kernel_of(const KSSystem& sys, const SiteTuple& ins) {
  SiteTuple key = ins;
  std::sort(key.begin(), key.end());
  const auto it = sys.kernel.find(key);
  if (it == sys.kernel.end()) throw std::out_of_range("KSSystem: kernel for these insertions was not built");
  return it->second;
}

const std::vector<double>& anchor_of(const KSSystem& sys, const SiteTuple& ins) {
  SiteTuple key = ins;
  std::sort(key.begin() + 1, key.end());
  const auto it = sys.anchor.find(key);
  if (it == sys.anchor.end()) throw std::out_of_range("KSSystem: anchor vector for these insertions was not built");
  return it->second;
}

// Coefficients of row y of A_0 as (column, value).
std::vector<std::pair<int, double>> a0_row(const KSSystem& sys, int y) {
  std::map<int, double> coef;
  const int p = sys.table.parent[static_cast<std::size_t>(y)];
  if (p >= 0) coef[p] += 1.0;
  coef[y] += 1.0;
  for (const auto& [c, v] : kernel_of(sys, {})[static_cast<std::size_t>(y)]) coef[c] -= v;
  return {coef.begin(), coef.end()};
}

// Splits w into (w_I, w_I') for the bitmask I.
std::pair<SiteTuple, SiteTuple> split(const SiteTuple& w, unsigned mask) {
  SiteTuple in;
  SiteTuple out;
  for (std::size_t i = 0; i < w.size(); ++i) (mask >> i & 1u ? in : out).push_back(w[i]);
  return {in, out};
}

int popcount(unsigned m) { return __builtin_popcount(m); }

double factorial(int r) { return std::tgamma(r + 1.0); }

}  // namespace

std::vector<double> apply_A0(const KSSystem& sys, const std::vector<double>& f) {
  const auto& k0 = kernel_of(sys, {});
  std::vector<double> out(f.size(), 0.0);
  for (int y = 0; y < sys.table.size(); ++y) {
    const auto uy = static_cast<std::size_t>(y);
    const int p = sys.table.parent[uy];
    double v = (p >= 0 ? f[static_cast<std::size_t>(p)] : 0.0) + f[uy];
    for (const auto& [c, k] : k0[uy]) v -= k * f[static_cast<std::size_t>(c)];
    out[uy] = v;
  }
  return out;
}

SequenceFunction apply_As(const KSSystem& sys, int s, const SequenceFunction& f, const std::vector<SiteTuple>& targets) {
  if (s < 1) throw std::invalid_argument("apply_As: s must be >= 1");
  SequenceFunction out;
  out.arity = f.arity + s;
  for (const auto& w : targets) {
    if (static_cast<int>(w.size()) != out.arity) throw std::invalid_argument("apply_As: target arity mismatch");
    std::vector<double> v(static_cast<std::size_t>(sys.table.size()), 0.0);
    for (unsigned mask = 0; mask < (1u << w.size()); ++mask) {
      if (popcount(mask) != s) continue;
      const auto [ins, rest] = split(w, mask);
      const auto& k = kernel_of(sys, ins);
      const auto& g = f.at(rest);
      for (std::size_t y = 0; y < v.size(); ++y)
        for (const auto& [c, kv] : k[y]) v[y] -= kv * g[static_cast<std::size_t>(c)];
    }
    out.w.push_back(w);
    out.values.push_back(std::move(v));
  }
  return out;
}

double apply_Ts(const KSSystem& sys, int s, const SequenceFunction& f, const SiteTuple& w, int max_len) {
  double total = 0.0;
  for (unsigned mask = 1; mask < (1u << w.size()); mask += 2) {
    if (popcount(mask) != s) continue;
    const auto [ins, rest] = split(w, mask);
    const auto& a = anchor_of(sys, ins);
    const auto& g = f.at(rest);
    for (std::size_t x = 0; x < a.size(); ++x)
      if (sys.table.length(static_cast<int>(x)) <= max_len) total += a[x] * g[x];
  }
  return total;
}

double NormWeights::omega(const SiteTuple& w, int config) const {
  const auto key = std::make_pair(w, config);
  const auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const int n = table_.length(config);
  const double ell = w.empty() ? 0.0 : tree_length_w_x(model_.points(w), model_.points(table_.configs[static_cast<std::size_t>(config)]));
  const double v = std::pow(2.0, 1 - n) * std::exp(ell) / factorial(static_cast<int>(w.size()));
  cache_.emplace(key, v);
  return v;
}

double NormWeights::omega_prime(const SiteTuple& w) const {
  const double ell = w.size() < 2 ? 0.0 : steiner_length(model_.points(w)).steiner_upper;
  return std::exp(0.5 * ell) / factorial(static_cast<int>(w.size()));
}

double norm_r(const NormWeights& nw, const SequenceFunction& f) {
  double best = 0.0;
  for (std::size_t t = 0; t < f.w.size(); ++t)
    for (std::size_t i = 0; i < f.values[t].size(); ++i)
      best = std::max(best, nw.omega(f.w[t], static_cast<int>(i)) * std::abs(f.values[t][i]));
  return best;
}

std::vector<double> solve_picard(const KSSystem& sys, const std::vector<double>& b, std::vector<double> start,
                                 const std::vector<double>& weights, const KSConfig& cfg, PicardLog& log) {
  const double floor = 100.0 * cfg.tol;
  std::vector<double> g = std::move(start);
  log.residuals.clear();
  log.max_ratio = 0.0;
  log.converged = false;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    std::vector<double> next = apply_A0(sys, g);
    double res = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] += b[i];
      res = std::max(res, weights[i] * std::abs(next[i] - g[i]));
    }
    if (!log.residuals.empty() && log.residuals.back() > floor) {
      const double ratio = res / log.residuals.back();
      log.max_ratio = std::max(log.max_ratio, ratio);
      if (ratio >= 1.0)
        throw ConvergenceError("Picard iteration (" + log.label + ") stopped contracting: residual ratio " +
                               std::to_string(ratio) + " at iteration " + std::to_string(it));
    }
    log.residuals.push_back(res);
    log.iterations = it;
    g = std::move(next);
    if (res <= cfg.tol) {
      log.converged = true;
      break;
    }
  }
  if (!log.converged) throw ConvergenceError("Picard iteration (" + log.label + ") hit max_iter");
  return g;
}

namespace {

std::vector<SiteTuple> singles_of(const std::vector<SiteTuple>& pairs) {
  std::vector<SiteTuple> s;
  for (const auto& p : pairs) {
    if (p.size() != 2) throw std::invalid_argument("KSSolver: pairs must have two sites");
    for (int a : p) s.push_back({a});
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

std::vector<SiteTuple> kernel_sets_for(const std::vector<SiteTuple>& pairs, const std::vector<SiteTuple>& singles) {
  std::vector<SiteTuple> k = singles;
  for (const auto& p : pairs) k.push_back(p);
  return k;
}

std::vector<SiteTuple> anchor_sets_for(const std::vector<SiteTuple>& pairs, const std::vector<SiteTuple>& singles) {
  std::vector<SiteTuple> a = singles;
  for (const auto& p : pairs) a.push_back(p);
  return a;
}

std::vector<double> weights_for(const NormWeights& nw, const SiteTuple& w, int size) {
  std::vector<double> out(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) out[static_cast<std::size_t>(i)] = nw.omega(w, i);
  return out;
}

}  // namespace

KSSolver::KSSolver(const LatticeModel& model, KSConfig cfg, std::vector<SiteTuple> pairs)
    : model_(model), cfg_(std::move(cfg)), pairs_(std::move(pairs)), singles_(singles_of(pairs_)) {
  sys_ = build_ks_system(model_, cfg_, kernel_sets_for(pairs_, singles_), anchor_sets_for(pairs_, singles_));
}

KSSolver::KSSolver(const LatticeModel& model, KSConfig cfg, std::vector<SiteTuple> pairs, KSSystem sys)
    : model_(model), cfg_(std::move(cfg)), pairs_(std::move(pairs)), singles_(singles_of(pairs_)), sys_(std::move(sys)) {}

const SequenceFunction& KSSolver::f(int r) const {
  if (r < 0 || r > 2) throw std::out_of_range("KSSolver: r must be 0, 1 or 2");
  if (!solved_) throw std::logic_error("KSSolver: solve() has not run");
  return f_[r];
}

void KSSolver::solve() {
  const NormWeights nw(model_, sys_.table);
  const int n = sys_.table.size();
  logs_.clear();
  auto start_for = [&](int r, const SiteTuple& w, double fill) {
    for (std::size_t i = 0; i < f_[r].w.size(); ++i)
      if (f_[r].w[i] == w && static_cast<int>(f_[r].values[i].size()) == n) return f_[r].values[i];
    return std::vector<double>(static_cast<std::size_t>(n), fill);
  };

  SequenceFunction f0;
  f0.arity = 0;
  {
    PicardLog log;
    log.label = "r=0";
    auto g = solve_picard(sys_, unit_function(sys_.table), start_for(0, {}, 1.0), weights_for(nw, {}, n), cfg_, log);
    f0.w.push_back({});
    f0.values.push_back(std::move(g));
    logs_.push_back(std::move(log));
  }

  SequenceFunction f1;
  f1.arity = 1;
  for (const auto& w : singles_) {
    const auto b = apply_As(sys_, 1, f0, {w});
    PicardLog log;
    log.label = "r=1 w=" + std::to_string(w[0]);
    auto g = solve_picard(sys_, b.values[0], start_for(1, w, 0.0), weights_for(nw, w, n), cfg_, log);
    f1.w.push_back(w);
    f1.values.push_back(std::move(g));
    logs_.push_back(std::move(log));
  }

  SequenceFunction f2;
  f2.arity = 2;
  for (const auto& w : pairs_) {
    const auto b1 = apply_As(sys_, 1, f1, {w});
    const auto b2 = apply_As(sys_, 2, f0, {w});
    std::vector<double> b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = b1.values[0][static_cast<std::size_t>(i)] + b2.values[0][static_cast<std::size_t>(i)];
    PicardLog log;
    log.label = "r=2 w=" + std::to_string(w[0]) + "," + std::to_string(w[1]);
    auto g = solve_picard(sys_, b, start_for(2, w, 0.0), weights_for(nw, w, n), cfg_, log);
    f2.w.push_back(w);
    f2.values.push_back(std::move(g));
    logs_.push_back(std::move(log));
  }
  f_[0] = std::move(f0);
  f_[1] = std::move(f1);
  f_[2] = std::move(f2);
  solved_ = true;
}

double KSSolver::schwinger1(int w) const { return apply_Ts(sys_, 1, f(0), {w}); }

double KSSolver::schwinger2(const SiteTuple& w) const {
  if (std::find(pairs_.begin(), pairs_.end(), w) == pairs_.end())
    throw std::out_of_range("KSSolver: pair was not requested at construction");
  return apply_Ts(sys_, 1, f(1), w) + apply_Ts(sys_, 2, f(0), w);
}

namespace {

OperatorNorm a0_norm(const KSSystem& sys, const NormWeights& nw, const std::vector<SiteTuple>& ws, const std::string& name) {
  OperatorNorm out;
  out.name = name;
  for (const auto& w : ws)
    for (int y = 0; y < sys.table.size(); ++y) {
      double sum = 0.0;
      for (const auto& [c, v] : a0_row(sys, y)) sum += std::abs(v) / nw.omega(w, c);
      sum *= nw.omega(w, y);
      if (sum > out.exact) {
        out.exact = sum;
        out.witness_w = w;
        out.witness_row = sys.table.configs[static_cast<std::size_t>(y)];
      }
    }
  return out;
}

OperatorNorm as_norm(const KSSystem& sys, const NormWeights& nw, int s, const std::vector<SiteTuple>& targets,
                     const std::string& name) {
  OperatorNorm out;
  out.name = name;
  for (const auto& w : targets)
    for (int y = 0; y < sys.table.size(); ++y) {
      double sum = 0.0;
      for (unsigned mask = 0; mask < (1u << w.size()); ++mask) {
        if (popcount(mask) != s) continue;
        const auto [ins, rest] = split(w, mask);
        for (const auto& [c, v] : kernel_of(sys, ins)[static_cast<std::size_t>(y)]) sum += std::abs(v) / nw.omega(rest, c);
      }
      sum *= nw.omega(w, y);
      if (sum > out.exact) {
        out.exact = sum;
        out.witness_w = w;
        out.witness_row = sys.table.configs[static_cast<std::size_t>(y)];
      }
    }
  return out;
}

OperatorNorm ts_norm(const KSSystem& sys, const NormWeights& nw, int s, const std::vector<SiteTuple>& targets,
                     const std::string& name) {
  OperatorNorm out;
  out.name = name;
  for (const auto& w : targets) {
    double sum = 0.0;
    for (unsigned mask = 1; mask < (1u << w.size()); mask += 2) {
      if (popcount(mask) != s) continue;
      const auto [ins, rest] = split(w, mask);
      const auto& a = anchor_of(sys, ins);
      for (std::size_t x = 0; x < a.size(); ++x)
        if (a[x] != 0.0) sum += std::abs(a[x]) / nw.omega(rest, static_cast<int>(x));
    }
    sum *= nw.omega_prime(w);
    if (sum > out.exact) {
      out.exact = sum;
      out.witness_w = w;
    }
  }
  return out;
}

double weighted_sup(const std::vector<double>& f, const std::vector<double>& w) {
  double best = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) best = std::max(best, w[i] * std::abs(f[i]));
  return best;
}

}  // namespace

NormReport KSSolver::norms(int battery, std::uint64_t seed) const {
  const NormWeights nw(model_, sys_.table);
  const int n = sys_.table.size();
  NormReport rep;
  for (int r = 0; r <= 2; ++r) rep.f_norms.push_back(norm_r(nw, f(r)));

  rep.a0 = a0_norm(sys_, nw, {{}}, "A0 on F_0");
  // Battery on F_0: one sign witness per row plus random inputs.
  const auto w0 = weights_for(nw, {}, n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto ratio = [&](const std::vector<double>& g) {
    const double den = weighted_sup(g, w0);
    return den > 0.0 ? weighted_sup(apply_A0(sys_, g), w0) / den : 0.0;
  };
  for (int y = 0; y < n; ++y) {
    std::vector<double> g(static_cast<std::size_t>(n), 0.0);
    for (const auto& [c, v] : a0_row(sys_, y)) g[static_cast<std::size_t>(c)] = (v >= 0.0 ? 1.0 : -1.0) / w0[static_cast<std::size_t>(c)];
    rep.a0.battery = std::max(rep.a0.battery, ratio(g));
    ++rep.a0.battery_size;
  }
  for (int k = 0; k < battery; ++k) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = unif(rng) / w0[static_cast<std::size_t>(i)];
    rep.a0.battery = std::max(rep.a0.battery, ratio(g));
    ++rep.a0.battery_size;
  }

  rep.a0_r.push_back(a0_norm(sys_, nw, singles_, "A0 on F_1"));
  rep.a0_r.push_back(a0_norm(sys_, nw, pairs_, "A0 on F_2"));
  rep.as.push_back(as_norm(sys_, nw, 1, singles_, "A1: F_0 -> F_1"));
  rep.as.push_back(as_norm(sys_, nw, 1, pairs_, "A1: F_1 -> F_2"));
  rep.as.push_back(as_norm(sys_, nw, 2, pairs_, "A2: F_0 -> F_2"));
  rep.ts.push_back(ts_norm(sys_, nw, 1, singles_, "T1: F_0 -> F'_1"));
  rep.ts.push_back(ts_norm(sys_, nw, 1, pairs_, "T1: F_1 -> F'_2"));
  rep.ts.push_back(ts_norm(sys_, nw, 2, pairs_, "T2: F_0 -> F'_2"));

  const int s_of[] = {1, 1, 2};
  for (std::size_t i = 0; i < rep.as.size(); ++i)
    rep.c_hat = std::max(rep.c_hat, std::pow(rep.as[i].exact, 1.0 / s_of[i]));
  rep.pattern_holds = true;
  for (int r = 0; r <= 2; ++r) {
    rep.pattern_bound.push_back(4.0 * std::pow(5.0 * rep.c_hat, r));
    if (rep.f_norms[static_cast<std::size_t>(r)] > rep.pattern_bound.back() * (1.0 + 1e-12)) rep.pattern_holds = false;
  }
  return rep;
}

namespace {

constexpr int kCheckpointVersion = 1;

json sparse_to_json(const SparseMatrix& m) {
  json rows = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& [c, v] : row) r.push_back({c, v});
    rows.push_back(std::move(r));
  }
  return rows;
}

SparseMatrix sparse_from_json(const json& j) {
  SparseMatrix m;
  for (const auto& r : j) {
    std::vector<std::pair<int, double>> row;
    for (const auto& e : r) row.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
    m.push_back(std::move(row));
  }
  return m;
}

json setup_json(const LatticeModel& model, const KSConfig& cfg) {
  const auto& p = model.params();
  return {{"lambda", p.lambda},
          {"h", p.h},
          {"window", {p.window_lo, p.window_hi}},
          {"n_max", cfg.n_max},
          {"m_max", cfg.m_max},
          {"tol", cfg.tol},
          {"max_iter", cfg.max_iter},
          {"t_order", cfg.z.t_order},
          {"quad_order", cfg.z.quad.order},
          {"quad_min_order", cfg.z.quad.min_order},
          {"quad_slope", cfg.z.quad.order_slope},
          {"order_step", cfg.z.order_step}};
}

}  // namespace

void KSSolver::save(const std::string& path) const {
  json j;
  j["format"] = "ccx-ks-checkpoint";
  j["version"] = kCheckpointVersion;
  j["setup"] = setup_json(model_, cfg_);
  j["pairs"] = pairs_;
  j["configs"] = sys_.table.configs;
  j["dropped_terms"] = sys_.dropped_terms;
  json kernels = json::array();
  for (const auto& [ins, m] : sys_.kernel) kernels.push_back({{"insertions", ins}, {"rows", sparse_to_json(m)}});
  j["kernel"] = std::move(kernels);
  json anchors = json::array();
  for (const auto& [ins, v] : sys_.anchor) anchors.push_back({{"insertions", ins}, {"values", v}});
  j["anchor"] = std::move(anchors);
  json tables = json::array();
  if (solved_)
    for (const auto& fr : f_) tables.push_back({{"arity", fr.arity}, {"w", fr.w}, {"values", fr.values}});
  j["f"] = std::move(tables);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("KSSolver::save: cannot open " + path);
  os << j.dump(1) << '\n';
}

KSSolver KSSolver::resume(const LatticeModel& model, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("KSSolver::resume: cannot open " + path);
  const json j = json::parse(is);
  if (j.value("format", "") != "ccx-ks-checkpoint" || j.value("version", 0) != kCheckpointVersion)
    throw std::runtime_error("KSSolver::resume: not a version-1 checkpoint");
  const json& s = j.at("setup");
  KSConfig cfg;
  cfg.n_max = s.at("n_max");
  cfg.m_max = s.at("m_max");
  cfg.tol = s.at("tol");
  cfg.max_iter = s.at("max_iter");
  cfg.z.t_order = s.at("t_order");
  cfg.z.quad.order = s.at("quad_order");
  cfg.z.quad.min_order = s.at("quad_min_order");
  cfg.z.quad.order_slope = s.at("quad_slope");
  cfg.z.order_step = s.at("order_step");
  if (setup_json(model, cfg) != s) throw std::runtime_error("KSSolver::resume: checkpoint was made for a different model");

  KSSystem sys;
  sys.table = ConfigTable::build(model, cfg.n_max);
  sys.h = model.h();
  if (j.at("configs").get<std::vector<SiteTuple>>() != sys.table.configs)
    throw std::runtime_error("KSSolver::resume: configuration table mismatch");
  sys.dropped_terms = j.at("dropped_terms");
  for (const auto& k : j.at("kernel")) sys.kernel[k.at("insertions").get<SiteTuple>()] = sparse_from_json(k.at("rows"));
  for (const auto& a : j.at("anchor")) sys.anchor[a.at("insertions").get<SiteTuple>()] = a.at("values").get<std::vector<double>>();

  KSSolver solver(model, cfg, j.at("pairs").get<std::vector<SiteTuple>>(), std::move(sys));
  for (const auto& t : j.at("f")) {
    const int r = t.at("arity");
    if (r < 0 || r > 2) throw std::runtime_error("KSSolver::resume: bad table arity");
    solver.f_[r].arity = r;
    solver.f_[r].w = t.at("w").get<std::vector<SiteTuple>>();
    solver.f_[r].values = t.at("values").get<std::vector<std::vector<double>>>();
  }
  return solver;
}

std::vector<ExpansionResult> schwinger_expansion(const KSSolver& fine) {
  const KSConfig& cfg = fine.config();
  KSConfig cc = cfg;
  cc.z.quad = coarser(cfg.z.quad);
  cc.z.t_order = std::max(cfg.z.t_order - 2, 1);
  KSSolver coarse(fine.model(), cc, fine.pairs());
  coarse.solve();

  const KSSystem& sys = fine.system();
  const bool truncated = sys.dropped_terms > 0 || sys.table.overflow > 0;
  std::vector<ExpansionResult> out;
  for (const auto& w : fine.pairs()) {
    ExpansionResult r;
    r.w = w;
    r.value = fine.schwinger2(w);
    r.quad_error = std::abs(r.value - coarse.schwinger2(w));
    r.dropped_terms = sys.dropped_terms;
    if (truncated) {
      // Magnitude of the last included configuration length.
      const int last = cfg.n_max - 1;
      const double head = apply_Ts(sys, 1, fine.f(1), w, last) + apply_Ts(sys, 2, fine.f(0), w, last);
      r.trunc_error = std::abs(r.value - head);
    }
    out.push_back(r);
  }
  return out;
}

std::vector<ExpansionResult> schwinger_expansion(const LatticeModel& model, const KSConfig& cfg,
                                                 const std::vector<SiteTuple>& pairs) {
  KSSolver fine(model, cfg, pairs);
  fine.solve();
  return schwinger_expansion(fine);
}

}  // namespace ccx
