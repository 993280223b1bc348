#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "ccx/report.hpp"

namespace ccx {

/// Resolved parameters of one run. Unset optionals take the per-suite
/// defaults, which are written into the report.
struct RunConfig {
  std::string subcommand;
  std::optional<double> lambda;
  std::optional<double> h;
  std::optional<double> window;  // window is [0, window]
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
  std::string format = "json";
  int nmax = 3;
  int mmax = 3;
  double tol = 1e-13;
  std::optional<int> n;  // lemma3: a single tree size
  int instances = 500;   // tree-lengths
  std::int64_t samples = 1000000;
  std::string checkpoint;  // ks-solve: write the solved state here
  std::string resume;      // ks-solve: start from this checkpoint

  [[nodiscard]] nlohmann::json to_json() const;
};

Report suite_covariance_table(const RunConfig& rc);
Report suite_tree_lengths(const RunConfig& rc);
Report suite_lemma3(const RunConfig& rc);
Report suite_gaussian_checks(const RunConfig& rc);
Report suite_identity13(const RunConfig& rc);
Report suite_ks_solve(const RunConfig& rc);
Report suite_schwinger_compare(const RunConfig& rc);
/// Every suite above with its defaults. Seconds per suite go to `timings`
/// when given; they are kept out of the report.
Report suite_full(const RunConfig& rc, std::map<std::string, double>* timings = nullptr);

/// Dispatches on rc.subcommand. Throws std::invalid_argument for an unknown one.
Report run_suite(const RunConfig& rc);

/// CSV of the report's "table" data (columns, rows). Throws
/// std::invalid_argument when the report has no table.
std::string report_csv(const Report& r);

}  // namespace ccx
