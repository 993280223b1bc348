#include "ccx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace ccx {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool is_admissible(const std::vector<Point>& points) {
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (distance(points[i], points[j]) <= 1.0 + kGeomEps) return false;
  return true;
}

bool BallRegion::contains(Point p) const {
  return std::any_of(centers.begin(), centers.end(),
                     [&](Point c) { return distance(p, c) <= radius + kGeomEps; });
}

bool Shell::contains(Point p) const {
  if (centers.empty()) return false;
  if (distance(p, centers.back()) > 1.0 + kGeomEps) return false;
  for (std::size_t i = 0; i + 1 < centers.size(); ++i)
    if (distance(p, centers[i]) <= 1.0 + kGeomEps) return false;
  return true;
}

Shell shell(const std::vector<Point>& config, int j) {
  if (j < 1 || j > static_cast<int>(config.size())) throw std::out_of_range("shell: index out of range");
  return Shell{std::vector<Point>(config.begin(), config.begin() + j)};
}

namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(b)] = a;
    return true;
  }
};

}  // namespace

double mst_length(const std::vector<Point>& points) {
  const int n = static_cast<int>(points.size());
  if (n <= 1) return 0.0;
  std::vector<std::tuple<double, int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      edges.emplace_back(distance(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]), i, j);
  std::sort(edges.begin(), edges.end());
  DisjointSet ds(n);
  double total = 0.0;
  for (const auto& [w, i, j] : edges)
    if (ds.unite(i, j)) total += w;
  return total;
}

}  // namespace ccx
