#include "ringsq/errors.hpp"
#include "ringsq/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

enum Exit { OK = 0, FAILURE = 1, BAD_CONFIG = 2, NOT_CONVERGED = 3 };

int report(const ringsq::ScenarioOutcome& o, bool check) {
  bool failed = false;
  for (const auto& r : o.reports) {
    if (r.tolerance <= 0) continue;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.oracle << ' ' << r.quantity << " main=" << ringsq::fmt(r.main)
              << " ref=" << ringsq::fmt(r.reference) << " dev=" << ringsq::fmt(r.deviation)
              << " tol=" << ringsq::fmt(r.tolerance) << '\n';
    failed |= !r.pass;
  }
  for (const auto& n : o.notes) std::cerr << "note: " << n << '\n';
  if (!o.converged) {
    std::cerr << "error: cw rates did not settle\n";
    return NOT_CONVERGED;
  }
  return check && failed ? FAILURE : OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pair generation and squeezing in a coupled microring"};
  std::string config;
  std::optional<std::string> scenario, out;
  std::optional<int> threads;
  bool check = false;
  app.add_option("--config", config, "JSON run configuration")->required();
  app.add_option("--scenario", scenario, "overrides the config scenario")
      ->check(CLI::IsMember(ringsq::scenario_names()));
  app.add_option("--out", out, "output directory (overrides output.dir)");
  app.add_option("--threads", threads, "sweep workers (default: RINGSQ_THREADS or 1)")->check(CLI::NonNegativeNumber);
  app.add_flag("--check", check, "run the oracle suite at the configured point and fail on any miss");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? OK : BAD_CONFIG;
  }

  try {
    ringsq::RunConfig cfg = ringsq::load_config(config, scenario.value_or(""));
    if (out) cfg.out_dir = *out;
    int n = threads ? (*threads == 0 ? 1 : *threads) : ringsq::threads_from_env(std::getenv("RINGSQ_THREADS"));
    ringsq::ScenarioOutcome o = check ? ringsq::run_checks(cfg) : ringsq::run_scenario(cfg, n);
    return report(o, check);
  } catch (const ringsq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return BAD_CONFIG;
  } catch (const ringsq::UnphysicalDevice& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return BAD_CONFIG;
  } catch (const ringsq::InfeasibleTarget& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return BAD_CONFIG;
  } catch (const ringsq::NotConverged& e) {
    std::cerr << "not converged: " << e.what() << '\n';
    return NOT_CONVERGED;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return FAILURE;
  }
}
