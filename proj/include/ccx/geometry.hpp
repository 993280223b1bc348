#pragma once

#include <cstdint>
#include <vector>

namespace ccx {

/// A point in R^1 or R^2. One-dimensional points keep y = 0.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point a, Point b) = default;
};

double distance(Point a, Point b);

/// Slack used by every separation and ball-membership test so that lattice
/// points at distance exactly one are treated consistently.
inline constexpr double kGeomEps = 1e-9;

/// True iff all pairwise distances strictly exceed one.
bool is_admissible(const std::vector<Point>& points);

/// Union of closed unit balls around the centers.
struct BallRegion {
  std::vector<Point> centers;
  static constexpr double radius = 1.0;

  [[nodiscard]] bool contains(Point p) const;
};

/// Membership predicate for the shell B_{x_1..x_j} \ B_{x_1..x_{j-1}}.
struct Shell {
  std::vector<Point> centers;  // x_1..x_j
  [[nodiscard]] bool contains(Point p) const;
};

/// Shell j (1-based) of the configuration. Throws std::out_of_range.
Shell shell(const std::vector<Point>& config, int j);

/// Length of a Euclidean minimum spanning tree. Ties are broken by
/// lexicographic edge index.
double mst_length(const std::vector<Point>& points);

struct TreeLengthResult {
  double mst_length = 0.0;
  double steiner_upper = 0.0;
  double steiner_lower = 0.0;
  std::vector<Point> steiner_points;
};

struct SteinerOptions {
  double tol = 1e-10;
  std::uint64_t seed = 1;
  int restarts = 4;
};

/// Brackets the Steiner tree length. Topologies are enumerated exactly for at
/// most four terminals; larger inputs use greedy insertion with local descent.
/// Throws CapabilityError above twelve points.
TreeLengthResult steiner_length(const std::vector<Point>& points, const SteinerOptions& opts = {});

/// Tree lengths over point sets, with distance between sets the infimum over
/// cross pairs. Throws std::domain_error for an empty set.
TreeLengthResult set_tree_length(const std::vector<std::vector<Point>>& sets,
                                 const SteinerOptions& opts = {});

/// Upper value of the Steiner length ell_{w_1..w_r; x_1..x_n}: singletons w
/// plus one set x. Zero when w is empty.
double tree_length_w_x(const std::vector<Point>& w, const std::vector<Point>& x);

/// Fermat point of three points and the length of the star through it.
struct FermatResult {
  Point point;
  double length = 0.0;
};
FermatResult fermat_point(Point a, Point b, Point c, double tol = 1e-13);

}  // namespace ccx
