// Runs the full suite twice with the same seed and prints one verdict per
// acceptance criterion. Exit status is nonzero when any criterion fails.
#include <omp.h>

#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ccx/suites.hpp"

namespace {

using nlohmann::json;

struct Criterion {
  int id;
  std::string title;
  std::vector<std::string> checks;       // exact check names
  std::vector<std::string> prefixes;     // every check under these prefixes
  std::function<bool(std::string&)> extra;
};

const json* find_check(const json& checks, const std::string& name) {
  for (const auto& c : checks)
    if (c["name"] == name) return &c;
  return nullptr;
}

}  // namespace

int main() {
  omp_set_num_threads(1);
  ccx::RunConfig rc;
  rc.subcommand = "full-suite";
  rc.seed = 7;
  rc.threads = 1;

  std::map<std::string, double> t1, t2;
  const ccx::Report first = ccx::suite_full(rc, &t1);
  const ccx::Report second = ccx::suite_full(rc, &t2);
  const json report = first.to_json();
  const json& checks = report["checks"];
  const json& data = report["data"];

  const std::vector<Criterion> criteria = {
      {1, "tree weight sums equal Catalan numbers for n = 2..10 in under 60 s",
       {"lemma3/n=2", "lemma3/n=3", "lemma3/n=4", "lemma3/n=5", "lemma3/n=6", "lemma3/n=7", "lemma3/n=8",
        "lemma3/n=9", "lemma3/n=10"},
       {},
       [&](std::string& note) {
         note = "time " + std::to_string(t1["lemma3"]) + " s";
         return t1["lemma3"] < 60.0;
       }},
      {2, "covariance decay certificate on [0, 20] with drift below 1%",
       {"covariance-table/nonnegative", "covariance-table/decay_bound", "covariance-table/refinement_drift"}, {}, {}},
      {3, "interpolated covariance PSD and block factorization over 200 draws",
       {"gaussian-checks/interpolation_psd", "gaussian-checks/block_factorization"},
       {},
       [&](std::string& note) {
         note = "draws " + data["gaussian-checks"]["config"]["draws"].dump();
         return data["gaussian-checks"]["config"]["draws"] == 200;
       }},
      {4, "t-derivative closed form and change-of-covariance identity",
       {"gaussian-checks/dcov_finite_difference", "gaussian-checks/change_of_covariance"}, {}, {}},
      {5, "factorization identity for n in {1, 2}, lambda in {0, 0.005, 0.02}, 7-site window in under 10 min",
       {"identity13/lambda=0.0 n=1", "identity13/lambda=0.0 n=2", "identity13/lambda=0.005 n=1",
        "identity13/lambda=0.005 n=2", "identity13/lambda=0.02 n=1", "identity13/lambda=0.02 n=2"},
       {"identity13/"},
       [&](std::string& note) {
         note = "time " + std::to_string(t1["identity13"]) + " s";
         return t1["identity13"] < 600.0;
       }},
      {6, "expansion matches brute force at lambda = 0.02 and recovers C at lambda = 0",
       {"schwinger-compare/oracle d=1.5", "schwinger-compare/oracle d=2.0", "schwinger-compare/oracle d=3.0",
        "schwinger-compare/free_theory"},
       {},
       {}},
      {7, "Picard ratio at most 0.8 and A_0 battery estimate at most 3/4",
       {"ks-solve/contraction_ratio", "ks-solve/a0_battery"}, {}, {}},
      {8, "decay slope of log|S_2| over separations 1.5 to 4", {"schwinger-compare/decay_slope"}, {}, {}},
      {9, "tree-length inequalities on 500 instances and the equilateral triangle",
       {"tree-lengths/chain_brackets", "tree-lengths/set_brackets", "tree-lengths/equilateral_triangle"},
       {},
       [&](std::string& note) {
         note = "instances " + data["tree-lengths"]["config"]["instances"].dump();
         return data["tree-lengths"]["config"]["instances"] == 500;
       }},
      {10, "Wick matchings agree with integration by parts; moment envelope finite",
       {"gaussian-checks/wick_matching_vs_ibp", "gaussian-checks/moment_envelope_finite",
        "gaussian-checks/moment_constants_finite"},
       {},
       {}},
      {11, "sup constant equals its closed form and a grid search",
       {"gaussian-checks/sup_constant_closed_form", "gaussian-checks/sup_constant_grid_search"}, {}, {}},
  };

  bool all = true;
  for (const auto& cr : criteria) {
    bool ok = true;
    std::string detail;
    for (const auto& name : cr.checks) {
      const json* c = find_check(checks, name);
      if (c == nullptr) {
        ok = false;
        detail += " [" + name + " missing]";
        continue;
      }
      ok = ok && (*c)["pass"].get<bool>();
      char buf[160];
      std::snprintf(buf, sizeof buf, " [%s %.3g tol %.3g]", name.substr(name.find('/') + 1).c_str(),
                    (*c)["value"].get<double>(), (*c)["tolerance"].is_number() ? (*c)["tolerance"].get<double>() : 0.0);
      detail += buf;
    }
    for (const auto& pre : cr.prefixes)
      for (const auto& c : checks)
        if (c["name"].get<std::string>().rfind(pre, 0) == 0 && !c["pass"].get<bool>()) {
          ok = false;
          detail += " [" + c["name"].get<std::string>() + " FAILED]";
        }
    if (cr.extra) {
      std::string note;
      ok = cr.extra(note) && ok;
      detail += " [" + note + "]";
    }
    all = all && ok;
    std::printf("criterion %2d %s: %s%s\n", cr.id, ok ? "PASS" : "FAIL", cr.title.c_str(), detail.c_str());
  }
  const bool same = first.dump() == second.dump();
  all = all && same;
  std::printf("criterion 12 %s: full-suite report byte-identical across two runs (seed 7, 1 thread, %zu bytes)\n",
              same ? "PASS" : "FAIL", first.dump().size());
  std::printf("full-suite checks: %s\n", first.all_pass() ? "all pass" : "some FAILED");
  return all ? 0 : 1;
}
