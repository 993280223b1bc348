#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ccx/errors.hpp"
#include "ccx/ksolver.hpp"

namespace {

ccx::LatticeModel make(double lambda) {
  ccx::ModelParams p;
  p.lambda = lambda;
  p.h = 0.5;
  p.window_lo = 0.0;
  p.window_hi = 2.5;
  return ccx::LatticeModel(p);
}

const ccx::QuadratureOptions kOracle{7, 2, 3.0};

}  // namespace

TEST(KSolver, ConfigTable) {
  const auto m = make(0.0);
  const auto t = ccx::ConfigTable::build(m, 3);
  // Six sites; admissible pairs need a gap above one (three steps).
  EXPECT_EQ(t.find({0}), 0);
  EXPECT_GE(t.find({0, 3}), 0);
  EXPECT_EQ(t.find({0, 2}), -1);
  EXPECT_EQ(t.overflow, 0);
  for (int i = 0; i < t.size(); ++i)
    if (t.length(i) > 1) EXPECT_EQ(t.length(t.parent[static_cast<std::size_t>(i)]), t.length(i) - 1);
}

TEST(KSolver, FreeTheoryIsExact) {
  const auto m = make(0.0);
  ccx::KSSolver s(m, {}, {{0, 3}, {1, 5}});
  s.solve();
  for (double v : s.f(0).values[0]) EXPECT_NEAR(v, 1.0, 1e-13);
  EXPECT_NEAR(s.schwinger2({0, 3}), m.cov()(0, 3), 1e-12);
  EXPECT_NEAR(s.schwinger2({1, 5}), m.cov()(1, 5), 1e-12);
  EXPECT_NEAR(s.schwinger1(0), 0.0, 1e-15);
}

TEST(KSolver, RatiosMatchDirectPartitionFunctions) {
  // f_0 on x is Z over the window minus B_x divided by Z over the window.
  const auto m = make(0.02);
  ccx::KSSolver s(m, {}, {{0, 3}});
  s.solve();
  const double z = ccx::partition_function(m, {}, {ccx::Method::Tensor, kOracle}).value;
  const auto& t = s.system().table;
  for (int i = 0; i < t.size(); ++i) {
    const auto reg = ccx::mask_minus(m.full(), m.ball(t.configs[static_cast<std::size_t>(i)]));
    const double zr = ccx::mask_count(reg) ? ccx::partition_function(m, {}, {ccx::Method::Tensor, kOracle}, reg).value : 1.0;
    EXPECT_NEAR(s.f(0).values[0][static_cast<std::size_t>(i)], zr / z, 1e-9);
  }
}

TEST(KSolver, TwoPointMatchesBruteForce) {
  const auto m = make(0.02);
  ccx::KSSolver s(m, {}, {{0, 3}, {3, 0}, {0, 5}});
  s.solve();
  for (const ccx::SiteTuple& w : s.pairs())
    EXPECT_NEAR(s.schwinger2(w), ccx::schwinger_bruteforce(m, w, kOracle).value, 2e-9);
  EXPECT_NEAR(s.schwinger2({0, 3}), s.schwinger2({3, 0}), 1e-9);
  for (const auto& log : s.logs()) {
    EXPECT_TRUE(log.converged);
    EXPECT_LE(log.max_ratio, 0.8);
  }
}

TEST(KSolver, NormsAndWeights) {
  const auto m = make(0.02);
  ccx::KSSolver s(m, {}, {{0, 3}});
  s.solve();
  const auto& t = s.system().table;
  const ccx::NormWeights nw(m, t);
  // r = 0: only the 2^{1-n} factor.
  EXPECT_DOUBLE_EQ(nw.omega({}, t.find({0})), 1.0);
  EXPECT_DOUBLE_EQ(nw.omega({}, t.find({0, 3})), 0.5);
  const auto nr = s.norms(50, 3);
  EXPECT_LE(nr.a0.battery, nr.a0.exact + 1e-15);
  EXPECT_LE(nr.a0.exact, 0.75);
  EXPECT_TRUE(nr.pattern_holds);
}

TEST(KSolver, PicardRejectsExpansion) {
  // A system whose A_0 row sums exceed one cannot be iterated.
  const auto m = make(0.0);
  ccx::KSSolver s(m, {}, {{0, 3}});
  auto sys = s.system();
  for (auto& row : sys.kernel.at({}))
    for (auto& e : row) e.second *= 50.0;
  ccx::PicardLog log;
  const auto b = ccx::unit_function(sys.table);
  std::vector<double> w(b.size(), 1.0);
  ccx::KSConfig cfg;
  cfg.max_iter = 50;
  EXPECT_THROW(ccx::solve_picard(sys, b, b, w, cfg, log), ccx::ConvergenceError);
}

TEST(KSolver, CheckpointRoundTrip) {
  const auto m = make(0.02);
  ccx::KSSolver s(m, {}, {{0, 3}});
  s.solve();
  const auto path = (std::filesystem::temp_directory_path() / "ccx_unit_checkpoint.json").string();
  s.save(path);
  auto back = ccx::KSSolver::resume(m, path);
  EXPECT_EQ(back.system().kernel, s.system().kernel);
  back.solve();
  EXPECT_NEAR(back.schwinger2({0, 3}), s.schwinger2({0, 3}), 1e-15);
  // A different coupling is a different setup.
  const auto other = make(0.03);
  EXPECT_THROW(ccx::KSSolver::resume(other, path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST(KSolver, ConfigValidation) {
  ccx::KSConfig c;
  c.n_max = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
