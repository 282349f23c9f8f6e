#pragma once

#include "ringsq/oracles.hpp"
#include "ringsq/simulation.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ringsq {

// One run request. The JSON schema is documented in README.md; every section
// rejects keys it does not know.
struct RunConfig {
  SimConfig sim;
  std::string scenario = "single";
  std::vector<double> sweep;  // finesse values or drive strengths, scenario dependent
  std::string out_dir = "out";
  int spectrum_points = 201;
  bool write_moments = true;
};

// a non-empty scenario replaces the one in the file before validation
RunConfig parse_config(const std::string& json_text, const std::string& scenario = "");
RunConfig load_config(const std::string& path, const std::string& scenario = "");
// fully resolved configuration as canonical one-line JSON
std::string config_echo(const RunConfig& c);

const std::vector<std::string>& scenario_names();

// RINGSQ_THREADS-style value; 0 or empty means one worker
int threads_from_env(const char* value);

// 17 significant digits, shortest form that round-trips
std::string fmt(double x);

using Scalars = std::vector<std::pair<std::string, std::string>>;
void write_scalars(std::ostream& os, const Scalars& s);
// densities: discrete moments divided by the bin width dk (1/um)
void write_moments(std::ostream& os, const MomentMatrices& m, const ResonanceWindow& ws,
                   const ResonanceWindow& wi);
void write_spectrum(std::ostream& os, const SqueezingSpectrum& s);
void write_reports(std::ostream& os, const std::vector<OracleReport>& r);

struct ScenarioOutcome {
  bool converged = true;
  std::vector<std::string> files;  // relative to the output directory
  std::vector<OracleReport> reports;
  std::vector<std::string> notes;
};

// writes every table into cfg.out_dir; sweep points run on up to `threads` workers
ScenarioOutcome run_scenario(const RunConfig& cfg, int threads);

// oracle suite for the configured operating point only (no tables besides oracles.csv)
ScenarioOutcome run_checks(const RunConfig& cfg);

}  // namespace ringsq
