#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>

#include "ccx/errors.hpp"
#include "ccx/geometry.hpp"

namespace ccx {

namespace {

constexpr int kMaxSteinerTerminals = 12;

double norm(Point p) { return std::hypot(p.x, p.y); }

// Terminals occupy the first n_term slots, Steiner points follow. Two
// terminals in the same group are joined at zero cost.
struct Net {
  std::vector<Point> pos;
  std::vector<int> group;
  int n_term = 0;
  std::vector<std::pair<int, int>> edges;

  [[nodiscard]] double cost(int a, int b) const {
    if (a < n_term && b < n_term && group[static_cast<std::size_t>(a)] == group[static_cast<std::size_t>(b)]) return 0.0;
    return distance(pos[static_cast<std::size_t>(a)], pos[static_cast<std::size_t>(b)]);
  }
  [[nodiscard]] double length() const {
    double total = 0.0;
    for (auto [a, b] : edges) total += cost(a, b);
    return total;
  }
  [[nodiscard]] std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(pos.size());
    for (auto [a, b] : edges) {
      adj[static_cast<std::size_t>(a)].push_back(b);
      adj[static_cast<std::size_t>(b)].push_back(a);
    }
    return adj;
  }
};

// One Weiszfeld step with the Vardi-Zhang correction, which keeps the
// iteration well defined when the point sits on a neighbour.
Point vardi_zhang_step(Point y, const std::vector<Point>& anchors) {
  double eta = 0.0;
  double wsum = 0.0;
  Point t{0.0, 0.0};
  Point r{0.0, 0.0};
  for (Point a : anchors) {
    const double d = distance(a, y);
    if (d < 1e-15) {
      eta += 1.0;
      continue;
    }
    wsum += 1.0 / d;
    t = t + (1.0 / d) * a;
    r = r + (1.0 / d) * (a - y);
  }
  if (wsum == 0.0) return y;
  t = (1.0 / wsum) * t;
  const double rn = norm(r);
  if (eta == 0.0) return t;
  if (rn <= eta) return y;
  const double g = eta / rn;
  return (1.0 - g) * t + g * y;
}

void optimize_steiner(Net& net, double tol, int max_sweeps = 20000) {
  const int total = static_cast<int>(net.pos.size());
  if (total == net.n_term) return;
  const auto adj = net.adjacency();
  double scale = 0.0;
  for (int i = 0; i < net.n_term; ++i) scale = std::max(scale, norm(net.pos[static_cast<std::size_t>(i)]));
  scale = std::max(scale, 1.0);
  std::vector<Point> anchors;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (int s = net.n_term; s < total; ++s) {
      anchors.clear();
      for (int nb : adj[static_cast<std::size_t>(s)]) anchors.push_back(net.pos[static_cast<std::size_t>(nb)]);
      const Point next = vardi_zhang_step(net.pos[static_cast<std::size_t>(s)], anchors);
      moved = std::max(moved, distance(next, net.pos[static_cast<std::size_t>(s)]));
      net.pos[static_cast<std::size_t>(s)] = next;
    }
    if (moved < tol * scale) break;
  }
}

std::vector<std::pair<int, int>> prufer_decode(const std::vector<int>& code, int n) {
  std::vector<int> degree(static_cast<std::size_t>(n), 1);
  for (int c : code) ++degree[static_cast<std::size_t>(c)];
  std::vector<std::pair<int, int>> edges;
  for (int c : code) {
    for (int leaf = 0; leaf < n; ++leaf) {
      if (degree[static_cast<std::size_t>(leaf)] == 1) {
        edges.emplace_back(leaf, c);
        --degree[static_cast<std::size_t>(leaf)];
        --degree[static_cast<std::size_t>(c)];
        break;
      }
    }
  }
  int u = -1;
  for (int v = 0; v < n; ++v) {
    if (degree[static_cast<std::size_t>(v)] == 1) {
      if (u < 0) {
        u = v;
      } else {
        edges.emplace_back(u, v);
        break;
      }
    }
  }
  return edges;
}

Net mst_net(const std::vector<Point>& pts, const std::vector<int>& group) {
  Net net;
  net.pos = pts;
  net.group = group;
  net.n_term = static_cast<int>(pts.size());
  const int n = net.n_term;
  std::vector<std::tuple<double, int, int>> cand;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) cand.emplace_back(net.cost(i, j), i, j);
  std::sort(cand.begin(), cand.end());
  std::vector<int> root(static_cast<std::size_t>(n));
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int a) {
    while (root[static_cast<std::size_t>(a)] != a) a = root[static_cast<std::size_t>(a)];
    return a;
  };
  for (const auto& [w, i, j] : cand) {
    const int a = find(i);
    const int b = find(j);
    if (a != b) {
      root[static_cast<std::size_t>(b)] = a;
      net.edges.emplace_back(i, j);
    }
  }
  return net;
}

// Exhaustive search over Steiner topologies with degree-three Steiner points.
Net exact_small(const std::vector<Point>& pts, double tol) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> group(static_cast<std::size_t>(n));
  std::iota(group.begin(), group.end(), 0);
  Net best = mst_net(pts, group);
  double best_len = best.length();
  Point centroid{0.0, 0.0};
  for (Point p : pts) centroid = centroid + p;
  centroid = (1.0 / n) * centroid;
  for (int k = 1; k <= n - 2; ++k) {
    const int total = n + k;
    const int len = total - 2;
    std::vector<int> code(static_cast<std::size_t>(len), 0);
    // Odometer over all Pruefer codes; keep those giving each Steiner point
    // degree exactly three.
    while (true) {
      std::vector<int> count(static_cast<std::size_t>(total), 0);
      for (int c : code) ++count[static_cast<std::size_t>(c)];
      bool ok = true;
      for (int s = n; s < total; ++s) ok = ok && count[static_cast<std::size_t>(s)] == 2;
      if (ok) {
        Net net;
        net.pos = pts;
        net.group = group;
        net.n_term = n;
        for (int s = 0; s < k; ++s) net.pos.push_back(centroid + Point{1e-3 * (s + 1), -1e-3 * s});
        net.edges = prufer_decode(code, total);
        optimize_steiner(net, tol);
        const double l = net.length();
        if (l < best_len) {
          best_len = l;
          best = net;
        }
      }
      int i = 0;
      while (i < len && ++code[static_cast<std::size_t>(i)] == total) code[static_cast<std::size_t>(i++)] = 0;
      if (i == len) break;
    }
  }
  return best;
}

Net insertion_heuristic(const std::vector<Point>& pts, const std::vector<int>& group, double tol,
                        std::mt19937_64* rng) {
  Net net = mst_net(pts, group);
  const int max_rounds = 4 * static_cast<int>(pts.size());
  for (int round = 0; round < max_rounds; ++round) {
    const auto adj = net.adjacency();
    struct Candidate {
      int v, a, b;
      double gain;
      Point at;
    };
    std::vector<Candidate> cands;
    for (int v = 0; v < net.n_term; ++v) {
      const auto& nb = adj[static_cast<std::size_t>(v)];
      for (std::size_t i = 0; i < nb.size(); ++i) {
        for (std::size_t j = i + 1; j < nb.size(); ++j) {
          const int a = nb[i];
          const int b = nb[j];
          if (net.cost(v, a) == 0.0 || net.cost(v, b) == 0.0) continue;
          const auto f = fermat_point(net.pos[static_cast<std::size_t>(v)], net.pos[static_cast<std::size_t>(a)],
                                      net.pos[static_cast<std::size_t>(b)]);
          const double gain = net.cost(v, a) + net.cost(v, b) - f.length;
          if (gain > 1e-12) cands.push_back({v, a, b, gain, f.point});
        }
      }
    }
    if (cands.empty()) break;
    std::size_t pick = 0;
    if (rng != nullptr) {
      pick = std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(*rng);
    } else {
      for (std::size_t i = 1; i < cands.size(); ++i)
        if (cands[i].gain > cands[pick].gain) pick = i;
    }
    const auto c = cands[pick];
    const int s = static_cast<int>(net.pos.size());
    net.pos.push_back(c.at);
    std::erase_if(net.edges, [&](std::pair<int, int> e) {
      auto same = [](std::pair<int, int> e2, int p, int q) {
        return (e2.first == p && e2.second == q) || (e2.first == q && e2.second == p);
      };
      return same(e, c.v, c.a) || same(e, c.v, c.b);
    });
    net.edges.emplace_back(s, c.v);
    net.edges.emplace_back(s, c.a);
    net.edges.emplace_back(s, c.b);
    optimize_steiner(net, tol, 2000);
  }
  return net;
}

std::vector<Point> steiner_positions(const Net& net) {
  return {net.pos.begin() + net.n_term, net.pos.end()};
}

}  // namespace

FermatResult fermat_point(Point a, Point b, Point c, double tol) {
  const Point v[3] = {a, b, c};
  for (int i = 0; i < 3; ++i) {
    const Point p = v[i];
    const Point u = v[(i + 1) % 3] - p;
    const Point w = v[(i + 2) % 3] - p;
    const double nu = norm(u);
    const double nw = norm(w);
    if (nu < 1e-15 || nw < 1e-15 || (u.x * w.x + u.y * w.y) / (nu * nw) <= -0.5) {
      return {p, nu + nw};
    }
  }
  Point y = (1.0 / 3.0) * (a + b + c);
  const double scale = std::max({norm(a), norm(b), norm(c), 1.0});
  for (int it = 0; it < 100000; ++it) {
    const Point next = vardi_zhang_step(y, {a, b, c});
    const double moved = distance(next, y);
    y = next;
    if (moved < tol * scale) break;
  }
  return {y, distance(y, a) + distance(y, b) + distance(y, c)};
}

TreeLengthResult steiner_length(const std::vector<Point>& points, const SteinerOptions& opts) {
  const int n = static_cast<int>(points.size());
  if (n < 1) throw std::domain_error("steiner_length: need at least one point");
  if (n > kMaxSteinerTerminals) throw CapabilityError("steiner_length: at most 12 points supported");
  TreeLengthResult res;
  res.mst_length = mst_length(points);
  res.steiner_lower = 0.5 * res.mst_length;
  res.steiner_upper = res.mst_length;
  if (n <= 2) return res;
  if (n <= 4) {
    const Net net = exact_small(points, opts.tol);
    if (net.length() < res.steiner_upper) {
      res.steiner_upper = net.length();
      res.steiner_points = steiner_positions(net);
    }
    return res;
  }
  std::vector<int> group(static_cast<std::size_t>(n));
  std::iota(group.begin(), group.end(), 0);
  std::mt19937_64 rng(opts.seed);
  for (int start = 0; start <= opts.restarts; ++start) {
    const Net net = insertion_heuristic(points, group, opts.tol, start == 0 ? nullptr : &rng);
    if (net.length() < res.steiner_upper) {
      res.steiner_upper = net.length();
      res.steiner_points = steiner_positions(net);
    }
  }
  return res;
}

TreeLengthResult set_tree_length(const std::vector<std::vector<Point>>& sets, const SteinerOptions& opts) {
  std::vector<Point> pts;
  std::vector<int> group;
  for (std::size_t g = 0; g < sets.size(); ++g) {
    if (sets[g].empty()) throw std::domain_error("set_tree_length: empty set");
    for (Point p : sets[g]) {
      pts.push_back(p);
      group.push_back(static_cast<int>(g));
    }
  }
  TreeLengthResult res;
  if (sets.size() <= 1) return res;
  const Net mst = mst_net(pts, group);
  res.mst_length = mst.length();
  res.steiner_lower = 0.5 * res.mst_length;
  res.steiner_upper = res.mst_length;

  // One representative per set, solved exactly. Together with the set MST
  // this covers every topology when there are at most three sets.
  const std::size_t k = sets.size();
  std::size_t combos = 1;
  for (const auto& s : sets) combos *= s.size();
  if (k <= 4 && combos <= 4096) {
    std::vector<std::size_t> pick(k, 0);
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t rest = c;
      std::vector<Point> reps(k);
      for (std::size_t g = 0; g < k; ++g) {
        pick[g] = rest % sets[g].size();
        rest /= sets[g].size();
        reps[g] = sets[g][pick[g]];
      }
      const Net net = exact_small(reps, opts.tol);
      if (net.length() < res.steiner_upper) {
        res.steiner_upper = net.length();
        res.steiner_points = steiner_positions(net);
      }
    }
  }
  if ((k > 3 || combos > 4096) && pts.size() <= static_cast<std::size_t>(kMaxSteinerTerminals)) {
    std::mt19937_64 rng(opts.seed);
    for (int start = 0; start <= opts.restarts; ++start) {
      const Net net = insertion_heuristic(pts, group, opts.tol, start == 0 ? nullptr : &rng);
      if (net.length() < res.steiner_upper) {
        res.steiner_upper = net.length();
        res.steiner_points = steiner_positions(net);
      }
    }
  }
  return res;
}

double tree_length_w_x(const std::vector<Point>& w, const std::vector<Point>& x) {
  if (w.empty()) return 0.0;
  if (x.empty()) return steiner_length(w).steiner_upper;
  std::vector<std::vector<Point>> sets;
  for (Point p : w) sets.push_back({p});
  sets.push_back(x);
  return set_tree_length(sets).steiner_upper;
}

}  // namespace ccx
