#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ccx/model.hpp"

namespace ccx {

/// Ordered tuple of lattice site indices.
using SiteTuple = std::vector<int>;

/// Truncation and solver policy. Configurations are admissible sequences of
/// window sites of length at most n_max; the z-chains in the operators have at
/// most m_max points.
struct KSConfig {
  int n_max = 3;
  int m_max = 3;
  double tol = 1e-13;
  int max_iter = 200;
  ZOptions z = default_z_options();

  void validate() const;
  static ZOptions default_z_options();
};

/// Every admissible sequence of window sites of length 1..n_max.
struct ConfigTable {
  std::vector<SiteTuple> configs;
  std::vector<int> parent;  // index of the config without its last point, -1 for length one
  std::map<SiteTuple, int> index;
  /// Admissible sequences of length n_max + 1 left out of the table.
  std::int64_t overflow = 0;

  static ConfigTable build(const LatticeModel& model, int n_max);
  [[nodiscard]] int size() const noexcept { return static_cast<int>(configs.size()); }
  [[nodiscard]] int find(const SiteTuple& c) const;
  [[nodiscard]] int length(int i) const { return static_cast<int>(configs[static_cast<std::size_t>(i)].size()); }
};

/// Row-wise sparse matrix over the configuration table.
using SparseMatrix = std::vector<std::vector<std::pair<int, double>>>;

/// The Z-bold data of the finite-volume equations.
///
/// kernel[ins] row (x, z_1), column (x, z_1..z_m) holds
/// h^{m-1} Z_{|ins|, Lambda\B_x; ins; z_1..z_m}; ins is a sorted multiset of
/// inserted sites, empty for A_0. anchor[ins] entry x (with x_1 = ins[0]) holds
/// h^{n-1} Z_{|ins|, Lambda; ins; x_1..x_n}; ins[0] is the anchor and the rest
/// is sorted.
struct KSSystem {
  ConfigTable table;
  double h = 1.0;
  std::map<SiteTuple, SparseMatrix> kernel;
  std::map<SiteTuple, std::vector<double>> anchor;
  /// Terms left out because the column would exceed n_max or m exceeds m_max.
  std::int64_t dropped_terms = 0;
  std::int64_t passes = 0;
};

/// Evaluates every Z-bold value the requested operators need, in one batch.
KSSystem build_ks_system(const LatticeModel& model, const KSConfig& cfg, const std::vector<SiteTuple>& kernel_sets,
                         const std::vector<SiteTuple>& anchor_sets);

/// f_{w;x} on the configuration table for a list of w-tuples of one arity.
struct SequenceFunction {
  int arity = 0;
  std::vector<SiteTuple> w;
  std::vector<std::vector<double>> values;  // [tuple][config]

  [[nodiscard]] const std::vector<double>& at(const SiteTuple& t) const;
};

/// The unit function e_x = 1 for configurations of length one.
std::vector<double> unit_function(const ConfigTable& table);

/// (A_0 f)_{x,z_1} = 1_{x nonempty} f_x - (Z_{z_1} - 1) f_{x,z_1} - sum_{m>=2} ...
std::vector<double> apply_A0(const KSSystem& sys, const std::vector<double>& f);

/// (A_s f) on the target tuples: minus the sum over |I| = s of kernel[w_I] f_{w_I'}.
SequenceFunction apply_As(const KSSystem& sys, int s, const SequenceFunction& f, const std::vector<SiteTuple>& targets);

/// sum over I containing 1, |I| = s, of sum_x anchor[w_I]_x f_{w_I';x}, over
/// configurations of length at most max_len.
double apply_Ts(const KSSystem& sys, int s, const SequenceFunction& f, const SiteTuple& w,
                int max_len = std::numeric_limits<int>::max());

/// Norm weights 2^{1-n} e^{ell_{w;x}} / r!, with ell = 0 for r = 0.
class NormWeights {
 public:
  NormWeights(const LatticeModel& model, const ConfigTable& table) : model_(model), table_(table) {}
  [[nodiscard]] double omega(const SiteTuple& w, int config) const;
  /// e^{ell_w / 2} / r!, the weight of the reconstructed functions.
  [[nodiscard]] double omega_prime(const SiteTuple& w) const;

 private:
  const LatticeModel& model_;
  const ConfigTable& table_;
  mutable std::map<std::pair<SiteTuple, int>, double> cache_;
};

double norm_r(const NormWeights& nw, const SequenceFunction& f);

struct PicardLog {
  std::string label;
  std::vector<double> residuals;
  double max_ratio = 0.0;  // over steps whose previous residual is above the noise floor
  int iterations = 0;
  bool converged = false;
};

/// Solves (1 - A_0) g = b by g <- b + A_0 g for one w-tuple, measuring the
/// residual in the weighted sup norm. Throws ConvergenceError when a residual
/// fails to shrink.
std::vector<double> solve_picard(const KSSystem& sys, const std::vector<double>& b, std::vector<double> start,
                                 const std::vector<double>& weights, const KSConfig& cfg, PicardLog& log);

struct OperatorNorm {
  std::string name;
  double exact = 0.0;       // weighted row sum on the finite table
  double battery = 0.0;     // max ratio over random and witness inputs
  int battery_size = 0;
  SiteTuple witness_w;
  SiteTuple witness_row;
};

struct NormReport {
  std::vector<double> f_norms;  // ||f*_r||_r for r = 0, 1, 2
  OperatorNorm a0;              // on F_0
  std::vector<OperatorNorm> a0_r;  // on F_1 and F_2
  std::vector<OperatorNorm> as;    // A_s from F_{r-s} to F_r
  std::vector<OperatorNorm> ts;    // T_s from F_{r-s} to F'_r
  double c_hat = 0.0;              // max over s of ||A_s||^{1/s}
  std::vector<double> pattern_bound;  // 4 (5 c_hat)^r
  bool pattern_holds = false;
};

/// Kirkwood-Salzburg solution for r = 0, 1, 2 on a finite window.
class KSSolver {
 public:
  /// `pairs` are the (w_1, w_2) site pairs whose two-point functions are wanted.
  KSSolver(const LatticeModel& model, KSConfig cfg, std::vector<SiteTuple> pairs);

  /// Restores kernels and tables from a checkpoint written by save().
  /// Throws std::runtime_error when the checkpoint belongs to another setup.
  static KSSolver resume(const LatticeModel& model, const std::string& path);

  void solve();
  void save(const std::string& path) const;

  [[nodiscard]] const LatticeModel& model() const noexcept { return model_; }
  [[nodiscard]] const KSSystem& system() const noexcept { return sys_; }
  [[nodiscard]] const KSConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const std::vector<SiteTuple>& pairs() const noexcept { return pairs_; }
  [[nodiscard]] const SequenceFunction& f(int r) const;
  [[nodiscard]] const std::vector<PicardLog>& logs() const noexcept { return logs_; }

  /// T_1 f*_0 at w.
  [[nodiscard]] double schwinger1(int w) const;
  /// T_1 f*_1 + T_2 f*_0 at (w_1, w_2); the pair must be one of pairs().
  [[nodiscard]] double schwinger2(const SiteTuple& w) const;

  /// Exact weighted row sums plus a random battery of `battery` inputs.
  [[nodiscard]] NormReport norms(int battery, std::uint64_t seed) const;

 private:
  KSSolver(const LatticeModel& model, KSConfig cfg, std::vector<SiteTuple> pairs, KSSystem sys);

  const LatticeModel& model_;
  KSConfig cfg_;
  std::vector<SiteTuple> pairs_;
  std::vector<SiteTuple> singles_;
  KSSystem sys_;
  SequenceFunction f_[3];
  std::vector<PicardLog> logs_;
  bool solved_ = false;
};

/// S^c_2 from the expansion with its error decomposition.
struct ExpansionResult {
  SiteTuple w;
  double value = 0.0;
  double quad_error = 0.0;   // |S(fine) - S(coarse)|
  double trunc_error = 0.0;  // zero when nothing was dropped
  std::int64_t dropped_terms = 0;
};

/// Solves at the configured quadrature and at the coarser one and reports
/// the difference as the quadrature error.
std::vector<ExpansionResult> schwinger_expansion(const LatticeModel& model, const KSConfig& cfg,
                                                 const std::vector<SiteTuple>& pairs);
/// The same for an already solved system; only the coarse solve is run.
std::vector<ExpansionResult> schwinger_expansion(const KSSolver& fine);

}  // namespace ccx
