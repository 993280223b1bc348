#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ccx/errors.hpp"
#include "ccx/geometry.hpp"

using ccx::Point;

TEST(Geometry, Admissibility) {
  EXPECT_TRUE(ccx::is_admissible({{0, 0}, {1.5, 0}}));
  EXPECT_FALSE(ccx::is_admissible({{0, 0}, {1.0, 0}}));
  EXPECT_TRUE(ccx::is_admissible({}));
}

TEST(Geometry, ShellsPartitionTheBall) {
  const std::vector<Point> cfg = {{0, 0}, {1.6, 0.2}, {0.4, 1.8}};
  const ccx::BallRegion ball{cfg};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 3.0);
  for (int k = 0; k < 2000; ++k) {
    const Point p{u(rng), u(rng)};
    int hits = 0;
    for (int j = 1; j <= 3; ++j) hits += ccx::shell(cfg, j).contains(p) ? 1 : 0;
    EXPECT_EQ(hits, ball.contains(p) ? 1 : 0);
  }
  EXPECT_THROW(ccx::shell(cfg, 4), std::out_of_range);
}

TEST(Geometry, MstOfSquare) {
  EXPECT_NEAR(ccx::mst_length({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 3.0, 1e-15);
  EXPECT_EQ(ccx::mst_length({{2, 3}}), 0.0);
}

TEST(Geometry, FermatPoint) {
  // Unit equilateral triangle: the Fermat point is the centroid.
  const auto f = ccx::fermat_point({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2});
  EXPECT_NEAR(f.point.x, 0.5, 1e-10);
  EXPECT_NEAR(f.point.y, std::sqrt(3.0) / 6, 1e-10);
  EXPECT_NEAR(f.length, std::sqrt(3.0), 1e-12);
  // An angle of at least 120 degrees pins the point to that vertex.
  const auto g = ccx::fermat_point({0, 0}, {1, 0}, {-1, 0.1});
  EXPECT_NEAR(g.point.x, 0.0, 1e-12);
}

TEST(Geometry, SteinerOfUnitSquare) {
  const auto r = ccx::steiner_length({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  EXPECT_NEAR(r.steiner_upper, 1.0 + std::sqrt(3.0), 1e-8);
  EXPECT_EQ(r.steiner_points.size(), 2u);
  EXPECT_LE(r.steiner_lower, r.steiner_upper);
}

TEST(Geometry, SteinerInvariantUnderIsometry) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<Point> p;
  for (int i = 0; i < 6; ++i) p.push_back({u(rng), u(rng)});
  const double th = 0.7;
  std::vector<Point> q;
  for (auto v : p) q.push_back({std::cos(th) * v.x - std::sin(th) * v.y + 5.0, std::sin(th) * v.x + std::cos(th) * v.y - 2.0});
  EXPECT_NEAR(ccx::mst_length(p), ccx::mst_length(q), 1e-12);
  const auto a = ccx::steiner_length(p), b = ccx::steiner_length(q);
  EXPECT_LE(a.steiner_upper, a.mst_length + 1e-12);
  EXPECT_NEAR(a.steiner_upper, b.steiner_upper, 1e-6);
}

TEST(Geometry, CollinearPointsNeedNoSteinerPoints) {
  const auto r = ccx::steiner_length({{0, 0}, {1, 0}, {3, 0}});
  EXPECT_NEAR(r.steiner_upper, 3.0, 1e-9);
}

TEST(Geometry, SetTreeLength) {
  EXPECT_NEAR(ccx::set_tree_length({{{0, 0}}, {{2, 0}}}).mst_length, 2.0, 1e-15);
  // A shared point makes that edge free.
  EXPECT_NEAR(ccx::set_tree_length({{{0, 0}, {1, 0}}, {{1, 0}, {5, 5}}}).mst_length, 0.0, 1e-15);
  EXPECT_THROW(ccx::set_tree_length({{{0, 0}}, {}}), std::domain_error);
  EXPECT_EQ(ccx::tree_length_w_x({}, {{0, 0}}), 0.0);
}

TEST(Geometry, CapabilityLimit) {
  std::vector<Point> p;
  for (int i = 0; i < 13; ++i) p.push_back({1.0 * i, 0.0});
  EXPECT_THROW(ccx::steiner_length(p), ccx::CapabilityError);
}
