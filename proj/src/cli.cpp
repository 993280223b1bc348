#include "ccx/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ccx/errors.hpp"
#include "ccx/suites.hpp"

namespace ccx {

namespace {

const std::vector<std::string> kSubcommands = {"covariance-table", "tree-lengths",   "lemma3",
                                               "gaussian-checks",  "identity13",     "ks-solve",
                                               "schwinger-compare", "full-suite"};

std::string render(const Report& rep, const std::string& format) {
  if (format == "json") return rep.dump();
  if (format == "csv") return report_csv(rep);
  std::string out;
  const auto j = rep.to_json();
  if (j["data"].contains("lines"))
    for (const auto& l : j["data"]["lines"]) out += l.get<std::string>() + "\n";
  out += rep.text();
  int failed = 0;
  for (const auto& c : rep.checks()) failed += c["pass"].get<bool>() ? 0 : 1;
  out += failed == 0 ? "ALL PASS\n" : std::to_string(failed) + " of " + std::to_string(rep.checks().size()) + " checks FAILED\n";
  return out;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Numerical checks for the continuous cluster expansion of regularized phi^4", "ccx"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_config("--config", "", "TOML or INI file with flag values");
  RunConfig rc;
  double lambda = 0, h = 0, window = 0;
  int n = 0;
  std::string format;

  app.add_option("subcommand", rc.subcommand, "Suite to run")->required()->check(CLI::IsMember(kSubcommands));
  auto* o_lambda = app.add_option("--lambda", lambda, "Coupling")->envname("CCX_LAMBDA")->check(CLI::NonNegativeNumber);
  auto* o_h = app.add_option("--h", h, "Lattice spacing")->envname("CCX_H")->check(CLI::PositiveNumber);
  auto* o_window = app.add_option("--window", window, "Window length L; the window is [0, L]")
                       ->envname("CCX_WINDOW")
                       ->check(CLI::PositiveNumber);
  app.add_option("--seed", rc.seed, "Seed for every random stream")->envname("CCX_SEED");
  app.add_option("--threads", rc.threads, "OpenMP threads")->envname("CCX_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--out", rc.out, "Report path (stdout when absent)")->envname("CCX_OUT");
  app.add_option("--format", format, "json, csv or text (default: text on stdout, json with --out)")
      ->envname("CCX_FORMAT")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  app.add_option("--nmax", rc.nmax, "Longest configuration")->envname("CCX_NMAX")->check(CLI::Range(2, 4));
  app.add_option("--mmax", rc.mmax, "Longest z-chain")->envname("CCX_MMAX")->check(CLI::Range(2, 4));
  app.add_option("--tol", rc.tol, "Picard residual tolerance")->envname("CCX_TOL")->check(CLI::PositiveNumber);
  auto* o_n = app.add_option("--n", n, "lemma3: a single tree size")->envname("CCX_N")->check(CLI::Range(2, 10));
  app.add_option("--instances", rc.instances, "tree-lengths: random instances")
      ->envname("CCX_INSTANCES")
      ->check(CLI::PositiveNumber);
  app.add_option("--samples", rc.samples, "Monte Carlo samples")->envname("CCX_SAMPLES")->check(CLI::PositiveNumber);
  app.add_option("--checkpoint", rc.checkpoint, "ks-solve: write solver state here")->envname("CCX_CHECKPOINT");
  app.add_option("--resume", rc.resume, "ks-solve: resume from this checkpoint")->envname("CCX_RESUME");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (o_lambda->count() > 0) rc.lambda = lambda;
  if (o_h->count() > 0) rc.h = h;
  if (o_window->count() > 0) rc.window = window;
  if (o_n->count() > 0) rc.n = n;
  rc.format = format.empty() ? (rc.out.empty() ? "text" : "json") : format;

  try {
    const Report rep = run_suite(rc);
    const std::string body = render(rep, rc.format);
    if (rc.out.empty()) {
      std::cout << body;
    } else {
      std::ofstream os(rc.out, std::ios::binary);
      if (!(os << body)) {
        std::cerr << "ccx: cannot write " << rc.out << "\n";
        return 2;
      }
    }
    return rep.all_pass() ? 0 : 1;
  } catch (const ConvergenceError& e) {
    std::cerr << "ccx: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ccx: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ccx: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ccx
