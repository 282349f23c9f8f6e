#include "ringsq/runner.hpp"

#include "ringsq/errors.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace ringsq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* VERSION = "1.0.0";
constexpr const char* CSV_SCHEMA = "1";

// one JSON object; every key must be consumed before done()
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  void number(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array() || v->empty()) throw ConfigError(where(key) + ": expected a non-empty list of numbers");
      out.clear();
      for (const json& x : *v) {
        if (!x.is_number()) throw ConfigError(where(key) + ": expected a non-empty list of numbers");
        out.push_back(x.get<double>());
      }
    }
  }
  Section sub(const std::string& key) {
    take(key);
    return Section(j_.at(key), where(key));
  }
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
  }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::vector<double> default_sweep(const RunConfig& c) {
  if (c.scenario == "finesse_sweep") {
    std::vector<double> f;
    for (int k = 0; k <= 6; ++k) f.push_back(std::pow(10.0, 1 + k / 3.0));
    return f;
  }
  if (c.scenario == "power_sweep") {
    if (c.sim.drive.kind == PumpDrive::CW) return {0.25, 0.5, 1, 2, 4};  // mW
    return {25, 50, 100, 200, 400};                                  // pJ
  }
  return {};
}

std::string sweep_axis(const RunConfig& c) {
  if (c.scenario == "finesse_sweep") return "finesse";
  if (c.scenario == "power_sweep") return c.sim.drive.kind == PumpDrive::CW ? "power_mw" : "energy_pj";
  return "";
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"single", "finesse_sweep", "power_sweep", "cw_spectrum"};
  return names;
}

RunConfig parse_config(const std::string& text, const std::string& scenario) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section top(j, "");
  top.string("scenario", c.scenario);
  if (!scenario.empty()) c.scenario = scenario;

  DeviceParams& d = c.sim.device;
  if (top.has("device")) {
    Section s = top.sub("device");
    s.number("R_e_um", d.R_e);
    s.number("L_c_fraction", d.L_c_fraction);
    s.number("lambda_um", d.lambda_um);
    s.number("n_e", d.n_e);
    s.number("v_um_per_ps", d.v);
    s.number("u_over_v", d.u_over_v);
    s.number("dbeta_per_um", d.dbeta);
    s.number("gamma_nl_per_W_m", d.gamma_nl);
    s.number("finesse", d.finesse);
    s.number("eta_esc", d.eta_esc);
    s.integer("n_ring", d.n_ring);
    s.integer("branch", d.branch);
    s.number("n_r", c.sim.n_r);
    s.integer("nk", c.sim.nk);
    s.done();
  }

  PumpDrive& p = c.sim.drive;
  if (top.has("drive")) {
    Section s = top.sub("drive");
    std::string kind = "gaussian";
    s.string("kind", kind);
    if (kind == "gaussian") {
      p.kind = PumpDrive::Gaussian;
      s.number("energy_pj", p.energy);
      s.number("tau_ps", p.tau);
      s.number("lead", p.lead);
    } else if (kind == "cw") {
      p.kind = PumpDrive::CW;
      double mw = p.power / MW;
      s.number("power_mw", mw);
      p.power = mw * MW;
    } else {
      throw ConfigError(s.where("kind") + ": expected \"gaussian\" or \"cw\"");
    }
    s.number("k0_offset_per_um", p.k0_offset);
    s.done();
  }

  if (top.has("physics")) {
    Section s = top.sub("physics");
    s.boolean("spm_xpm", c.sim.spm_xpm);
    s.done();
  }

  if (top.has("numerics")) {
    Section s = top.sub("numerics");
    s.number("dt_ps", c.sim.dt);
    s.integer("dt_refine", c.sim.dt_refine);
    s.number("pump_tol", c.sim.pump_tol);
    s.number("end_fraction", c.sim.end_fraction);
    s.boolean("grow_grid", c.sim.grow_grid);
    s.integer("cw_round_trips", c.sim.cw_round_trips);
    s.number("cw_drift_tol", c.sim.cw_drift_tol);
    s.number("symplectic_warn", c.sim.symplectic_warn);
    s.done();
  }

  bool scenario_known = false;
  for (const auto& n : scenario_names()) scenario_known |= n == c.scenario;
  require(scenario_known, "scenario: unknown scenario \"" + c.scenario + "\"");
  if (c.scenario == "cw_spectrum") require(p.kind == PumpDrive::CW, "scenario cw_spectrum needs drive.kind = \"cw\"");
  if (c.scenario == "finesse_sweep") require(p.kind == PumpDrive::Gaussian, "scenario finesse_sweep needs a gaussian drive");

  c.sweep = default_sweep(c);
  if (top.has("sweep")) {
    Section s = top.sub("sweep");
    const std::string axis = sweep_axis(c);
    require(!axis.empty(), "sweep: scenario \"" + c.scenario + "\" has no sweep axis");
    s.numbers(axis, c.sweep);
    s.done();
    for (double x : c.sweep) require(x > 0, "sweep." + axis + ": values must be positive");
  }

  if (top.has("output")) {
    Section s = top.sub("output");
    s.string("dir", c.out_dir);
    s.boolean("moments", c.write_moments);
    s.integer("spectrum_points", c.spectrum_points);
    s.done();
  }
  top.done();

  require(d.R_e > 0, "device.R_e_um must be positive");
  require(d.L_c_fraction > 0 && d.L_c_fraction < 1, "device.L_c_fraction must lie in (0, 1)");
  require(d.lambda_um > 0, "device.lambda_um must be positive");
  require(d.n_e > 0, "device.n_e must be positive");
  require(d.v > 0, "device.v_um_per_ps must be positive");
  require(d.u_over_v > 0, "device.u_over_v must be positive");
  require(d.gamma_nl >= 0, "device.gamma_nl_per_W_m must not be negative");
  require(d.finesse > 0, "device.finesse must be positive");
  require(d.eta_esc > 0 && d.eta_esc <= 1, "device.eta_esc must lie in (0, 1]");
  require(d.n_ring >= 1, "device.n_ring must be at least 1");
  require(d.branch >= 0, "device.branch must not be negative");
  require(p.kind == PumpDrive::CW || (p.energy > 0 && p.tau > 0 && p.lead > 0),
          "drive.energy_pj, drive.tau_ps and drive.lead must be positive");
  require(p.kind == PumpDrive::Gaussian || p.power > 0, "drive.power_mw must be positive");
  require(c.sim.dt >= 0, "numerics.dt_ps must not be negative");
  require(c.sim.dt_refine >= -1, "numerics.dt_refine must be at least -1");
  require(c.sim.pump_tol > 0 && c.sim.end_fraction > 0 && c.sim.cw_drift_tol > 0 && c.sim.symplectic_warn > 0,
          "numerics tolerances must be positive");
  require(c.sim.cw_round_trips >= 1, "numerics.cw_round_trips must be at least 1");
  require(c.spectrum_points >= 1, "output.spectrum_points must be at least 1");
  require(!c.out_dir.empty(), "output.dir must not be empty");
  return c;
}

RunConfig load_config(const std::string& path, const std::string& scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), scenario);
}

std::string config_echo(const RunConfig& c) {
  const DeviceParams& d = c.sim.device;
  const PumpDrive& p = c.sim.drive;
  json j;
  j["scenario"] = c.scenario;
  j["device"] = {{"R_e_um", d.R_e},         {"L_c_fraction", d.L_c_fraction},
                 {"lambda_um", d.lambda_um}, {"n_e", d.n_e},
                 {"v_um_per_ps", d.v},       {"u_over_v", d.u_over_v},
                 {"dbeta_per_um", d.dbeta},  {"gamma_nl_per_W_m", d.gamma_nl},
                 {"finesse", d.finesse},     {"eta_esc", d.eta_esc},
                 {"n_ring", d.n_ring},       {"branch", d.branch},
                 {"n_r", c.sim.n_r},         {"nk", c.sim.nk}};
  if (p.kind == PumpDrive::Gaussian)
    j["drive"] = {{"kind", "gaussian"}, {"energy_pj", p.energy}, {"tau_ps", p.tau},
                  {"lead", p.lead}, {"k0_offset_per_um", p.k0_offset}};
  else
    j["drive"] = {{"kind", "cw"}, {"power_mw", p.power / MW}, {"k0_offset_per_um", p.k0_offset}};
  j["physics"] = {{"spm_xpm", c.sim.spm_xpm}};
  j["numerics"] = {{"dt_ps", c.sim.dt},
                   {"dt_refine", c.sim.dt_refine},
                   {"pump_tol", c.sim.pump_tol},
                   {"end_fraction", c.sim.end_fraction},
                   {"grow_grid", c.sim.grow_grid},
                   {"cw_round_trips", c.sim.cw_round_trips},
                   {"cw_drift_tol", c.sim.cw_drift_tol},
                   {"symplectic_warn", c.sim.symplectic_warn}};
  if (!sweep_axis(c).empty()) j["sweep"] = {{sweep_axis(c), c.sweep}};
  j["output"] = {{"dir", c.out_dir}, {"moments", c.write_moments}, {"spectrum_points", c.spectrum_points}};
  return j.dump();
}

int threads_from_env(const char* value) {
  if (!value || !*value) return 1;
  char* end = nullptr;
  long n = std::strtol(value, &end, 10);
  if (*end != '\0' || n < 0) throw ConfigError(std::string("thread count must be a non-negative integer, got \"") + value + "\"");
  return n == 0 ? 1 : static_cast<int>(n);
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_scalars(std::ostream& os, const Scalars& s) {
  for (const auto& [k, v] : s) os << k << '=' << v << '\n';
}

void write_moments(std::ostream& os, const MomentMatrices& m, const ResonanceWindow& ws,
                   const ResonanceWindow& wi) {
  os << "J,J',k_i,k_j,Re,Im\n";
  const double inv = 1 / ws.dk;
  auto block = [&](const char* a, const char* b, const Mat& M, const ResonanceWindow& w1,
                   const ResonanceWindow& w2) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) {
        cplx v = M(i, j) * inv;
        os << a << ',' << b << ',' << fmt(w1.offsets[i]) << ',' << fmt(w2.offsets[j]) << ','
           << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
      }
  };
  block("S", "S", m.NSS, ws, ws);
  block("I", "I", m.NII, wi, wi);
  block("S", "I", m.MSI, ws, wi);
  block("I", "S", m.MIS, wi, ws);
}

void write_spectrum(std::ostream& os, const SqueezingSpectrum& s) {
  os << "omega_radps,Vmin,Vmax,Vmin_dB,Vmax_dB,phi_star\n";
  for (size_t i = 0; i < s.omega.size(); ++i)
    os << fmt(s.omega[i]) << ',' << fmt(s.vmin[i]) << ',' << fmt(s.vmax[i]) << ','
       << fmt(SqueezingSpectrum::to_db(s.vmin[i])) << ',' << fmt(SqueezingSpectrum::to_db(s.vmax[i])) << ','
       << fmt(s.phi_star[i]) << '\n';
}

void write_reports(std::ostream& os, const std::vector<OracleReport>& r) {
  os << "oracle,quantity,main,reference,deviation,tolerance,kind,pass,note\n";
  for (const OracleReport& x : r)
    os << x.oracle << ',' << x.quantity << ',' << fmt(x.main) << ',' << fmt(x.reference) << ','
       << fmt(x.deviation) << ',' << fmt(x.tolerance) << ',' << (x.absolute ? "absolute" : "relative") << ','
       << (x.tolerance <= 0 ? "info" : x.pass ? "pass" : "fail") << ',' << x.note << '\n';
}

namespace {

// write to a temporary name, then rename, so a table is either complete or absent
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    body(out);
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  void write(std::ostream& os) const {
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
  }
};

// the coupled-mode oracle is only meant to agree with the main path for a
// high-finesse ring on the principal coupler branch
bool cmio_regime(const SimConfig& c) { return c.device.finesse >= 100 && c.device.branch == 0; }

std::string cmio_note(const SimConfig& c) {
  if (c.device.branch != 0) return "strongly coupled branch: divergence expected";
  if (c.device.finesse < 100) return "low finesse: divergence expected";
  return "";
}

Correlations safe_correlations(const MomentMatrices& m) {
  try {
    return correlations(m);
  } catch (const UndefinedCorrelation&) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan};
  }
}

struct PointResult {
  std::string label;
  Scalars scalars;
  std::vector<OracleReport> reports;
  std::vector<std::string> notes;
  std::vector<std::string> files;
  bool converged = true;
  double n_tot = 0, n_out = 0, g2 = 0, g11 = 0;
  double first_order = std::numeric_limits<double>::quiet_NaN();
  double cmio_out = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0;
};

void tag(std::vector<OracleReport>& r, const std::string& label) {
  if (label.empty()) return;
  for (auto& x : r) x.oracle += "@" + label;
}

PointResult run_pulsed_point(const SimConfig& c, const fs::path& dir, const std::string& rel,
                             bool write_moments_csv, bool first_order) {
  auto t0 = std::chrono::steady_clock::now();
  PointResult pr;
  Simulation sim(c);
  PulsedResult r = sim.run_pulsed();
  Correlations g = safe_correlations(r.moments);
  pr.n_tot = r.photons.tot_S;
  pr.n_out = r.photons.out_S;
  pr.g2 = g.g2_S;
  pr.g11 = g.g11;
  pr.notes = r.diag.notes;

  const SimConfig& sc = sim.config();
  CmioDevice cd = cmio_device(sim.spec());
  auto flux = window_flux(sim.pump_field().win, sim.pump_field().alpha_in, sim.spec().res[P].v,
                          sc.drive.lead * sc.drive.tau);
  // the single-mode ring has emptied 12 amplitude lifetimes after the pulse;
  // memory grows with the square of the bin count, so keep it near 2000
  double t_cm = std::min(r.diag.t_end, (sc.drive.lead + 6) * sc.drive.tau + 12 / cd.gamma[S]);
  double bin = std::max(std::min(sc.drive.tau / 10, 7.0), t_cm / 2000);
  CmioPulsed cm = cmio_pulsed(cd, flux, t_cm, bin, sc.spm_xpm);
  pr.cmio_out = cm.n_out;
  bool in_regime = cmio_regime(sc);
  std::string note = cmio_note(sc);
  if (r.diag.recurrence < t_cm) {
    in_regime = false;
    note = "grid recurrence shorter than the ring response: pulse not resolved";
  }
  pr.reports.push_back(compare("cmio", "n_out", r.photons.out_S, cm.n_out, in_regime ? 0.05 : 0));
  pr.reports.push_back(compare("cmio", "g2_S", g.g2_S, cm.g2_S, in_regime ? 0.05 : 0, true));
  // g11 ~ 1/n at low gain: an absolute band only makes sense for small values
  const bool g11_abs = !(g.g11 >= 10);
  pr.reports.push_back(compare("cmio", "g11", g.g11, cm.g11, in_regime ? 0.05 : 0, g11_abs));
  for (auto& x : pr.reports) x.note = note;

  if (first_order) {
    auto eng = sim.make_engine(sim.linear_pump());
    FirstOrderPairs fo = first_order_pairs(*eng, 0, r.diag.t_end, 0, sc.drive.tau);
    pr.first_order = fo.n_tot;
    // the estimate ignores cross-phase modulation, so only the linear pump is comparable
    bool ok = r.photons.tot_S < 1e-3 && !sc.spm_xpm;
    OracleReport rep = compare("first_order", "n_tot", r.photons.tot_S, fo.n_tot, ok ? 0.02 : 0);
    rep.note = ok ? fo.warning : "outside the low-gain linear-pump regime";
    pr.reports.push_back(rep);
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  pr.scalars = {
      {"schema", CSV_SCHEMA},
      {"kind", "pulsed"},
      {"finesse", fmt(sc.device.finesse)},
      {"eta_esc", fmt(sc.device.eta_esc)},
      {"energy_pj", fmt(sc.drive.energy)},
      {"tau_ps", fmt(sc.drive.tau)},
      {"spm_xpm", sc.spm_xpm ? "1" : "0"},
      {"n_tot_S", fmt(r.photons.tot_S)},
      {"n_tot_I", fmt(r.photons.tot_I)},
      {"n_out_S", fmt(r.photons.out_S)},
      {"n_out_I", fmt(r.photons.out_I)},
      {"n_lost_S", fmt(r.photons.lost_total_S())},
      {"g2_S", fmt(g.g2_S)},
      {"g2_I", fmt(g.g2_I)},
      {"g11", fmt(g.g11)},
      {"first_order_n_tot", fmt(first_order ? pr.first_order : nan)},
      {"cmio_n_out", fmt(cm.n_out)},
      {"cmio_g2_S", fmt(cm.g2_S)},
      {"cmio_g11", fmt(cm.g11)},
      {"dk_per_um", fmt(sim.signal_window().dk)},
      {"nk", std::to_string(r.diag.nk)},
      {"n_r", fmt(r.diag.n_r)},
      {"dt_ps", fmt(r.diag.dt)},
      {"dt_tail_ps", fmt(r.diag.dt_tail)},
      {"steps", std::to_string(r.diag.steps)},
      {"t_end_ps", fmt(r.diag.t_end)},
      {"recurrence_ps", fmt(r.diag.recurrence)},
      {"symplectic_defect", fmt(r.diag.symplectic_defect)},
      {"pump_photon_drift", fmt(r.diag.pump_photon_drift)},
  };
  write_file(dir / "scalars.csv", [&](std::ostream& os) { write_scalars(os, pr.scalars); });
  pr.files.push_back(rel + "scalars.csv");
  if (write_moments_csv) {
    write_file(dir / "moments.csv",
               [&](std::ostream& os) { write_moments(os, r.moments, sim.signal_window(), sim.idler_window()); });
    pr.files.push_back(rel + "moments.csv");
  }
  pr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return pr;
}

PointResult run_cw_point(const SimConfig& c, const fs::path& dir, const std::string& rel,
                         bool write_moments_csv, int spectrum_points) {
  auto t0 = std::chrono::steady_clock::now();
  PointResult pr;
  Simulation sim(c);
  CwResult r = sim.run_cw();
  const SimConfig& sc = sim.config();
  pr.converged = r.converged;
  pr.notes = r.diag.notes;
  pr.n_out = r.rates.out;
  pr.n_tot = r.rates.total;

  double gam = figures_of_merit(sim.spec(), S).gamma_rad;
  std::vector<double> grid = default_omega_grid(r.densities, gam, spectrum_points);
  SqueezingSpectrum spec = squeezing_spectrum(r.densities, grid);

  CmioDevice cd = cmio_device(sim.spec());
  CmioCw cm = cmio_cw(cd, sim.spec(), sc.drive.power, grid, sc.spm_xpm);
  SqueezingSpectrum cspec = squeezing_spectrum(cm.densities, grid);
  pr.cmio_out = cm.rate_out;

  // an unsettled run is not a steady state, so there is nothing to compare
  const bool in_regime = cmio_regime(sc) && r.converged;
  const std::string note = r.converged ? cmio_note(sc) : "cw rates not settled";
  OracleReport rate = compare("cmio", "rate_out", r.rates.out, cm.rate_out, in_regime ? 0.05 : 0);
  rate.note = note;
  pr.reports.push_back(rate);
  // worst dB gap over |w| <= 3 linewidths
  double gap = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i]) > 3 * gam * (1 + 1e-12)) continue;
    gap = std::max(gap, std::abs(SqueezingSpectrum::to_db(spec.vmin[i]) - SqueezingSpectrum::to_db(cspec.vmin[i])));
    gap = std::max(gap, std::abs(SqueezingSpectrum::to_db(spec.vmax[i]) - SqueezingSpectrum::to_db(cspec.vmax[i])));
  }
  OracleReport sq = compare("cmio", "spectrum_dB_gap", gap, 0.0, in_regime ? 0.2 : 0, true);
  sq.note = note.empty() ? "max over |omega| <= 3 linewidths" : note;
  pr.reports.push_back(sq);
  OracleReport eff = compare("efficiency", "rate_out/rate_total", r.rates.out / r.rates.total,
                             figures_of_merit(sim.spec(), S).eta_esc, 0.02);
  eff.note = "low-gain limit only";
  pr.reports.push_back(eff);

  pr.scalars = {
      {"schema", CSV_SCHEMA},
      {"kind", "cw"},
      {"finesse", fmt(sc.device.finesse)},
      {"eta_esc", fmt(sc.device.eta_esc)},
      {"power_mw", fmt(sc.drive.power / MW)},
      {"spm_xpm", sc.spm_xpm ? "1" : "0"},
      {"rate_out_per_s", fmt(r.rates.out)},
      {"rate_lost_per_s", fmt(r.rates.lost)},
      {"rate_total_per_s", fmt(r.rates.total)},
      {"rate_drift_per_round_trip", fmt(r.rates.drift)},
      {"converged", r.converged ? "1" : "0"},
      {"cmio_rate_out_per_s", fmt(cm.rate_out)},
      {"cmio_ring_photons", fmt(cm.ring_photons)},
      {"linewidth_radps", fmt(gam)},
      {"dk_per_um", fmt(sim.signal_window().dk)},
      {"nk", std::to_string(r.diag.nk)},
      {"n_r", fmt(r.diag.n_r)},
      {"dt_ps", fmt(r.diag.dt)},
      {"steps", std::to_string(r.diag.steps)},
      {"t_moments_ps", fmt(r.t2)},
      {"recurrence_ps", fmt(r.diag.recurrence)},
      {"symplectic_defect", fmt(r.diag.symplectic_defect)},
      {"pump_photon_drift", fmt(r.diag.pump_photon_drift)},
  };
  write_file(dir / "scalars.csv", [&](std::ostream& os) { write_scalars(os, pr.scalars); });
  write_file(dir / "spectrum.csv", [&](std::ostream& os) { write_spectrum(os, spec); });
  write_file(dir / "spectrum_cmio.csv", [&](std::ostream& os) { write_spectrum(os, cspec); });
  pr.files.insert(pr.files.end(), {rel + "scalars.csv", rel + "spectrum.csv", rel + "spectrum_cmio.csv"});
  if (write_moments_csv) {
    write_file(dir / "moments.csv",
               [&](std::ostream& os) { write_moments(os, r.m2, sim.signal_window(), sim.idler_window()); });
    pr.files.push_back(rel + "moments.csv");
  }
  pr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return pr;
}

// runs jobs on up to `threads` workers; results keep the job order
std::vector<PointResult> run_pool(const std::vector<std::function<PointResult()>>& jobs, int threads) {
  std::vector<PointResult> out(jobs.size());
  std::vector<std::exception_ptr> err(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k; (k = next++) < jobs.size();) {
      try {
        out[k] = jobs[k]();
      } catch (...) {
        err[k] = std::current_exception();
      }
    }
  };
  int n = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string point_dir(size_t k, const std::string& suffix = "") {
  char buf[32];
  std::snprintf(buf, sizeof buf, "point_%02zu", k);
  return std::string(buf) + suffix;
}

void write_metadata(const fs::path& dir, const RunConfig& cfg, const std::vector<PointResult>& pts,
                    const ScenarioOutcome& o, double seconds) {
  write_file(dir / "metadata.txt", [&](std::ostream& os) {
    os << "version=" << VERSION << '\n';
    os << "csv_schema=" << CSV_SCHEMA << '\n';
    os << "scenario=" << cfg.scenario << '\n';
    os << "config=" << config_echo(cfg) << '\n';
    os << "converged=" << (o.converged ? 1 : 0) << '\n';
    os << "wall_seconds=" << fmt(seconds) << '\n';
    for (const auto& p : pts) {
      std::string key = p.label.empty() ? "run" : p.label;
      os << key << ".seconds=" << fmt(p.seconds) << '\n';
      for (const auto& n : p.notes) os << key << ".note=" << n << '\n';
    }
    for (const auto& r : o.reports)
      os << "oracle." << r.oracle << '.' << r.quantity << '=' << fmt(r.main) << " vs " << fmt(r.reference)
         << (r.tolerance <= 0 ? " (info)" : r.pass ? " (pass)" : " (fail)") << '\n';
  });
}

void collect(ScenarioOutcome& o, std::vector<PointResult>& pts) {
  for (auto& p : pts) {
    tag(p.reports, p.label);
    o.reports.insert(o.reports.end(), p.reports.begin(), p.reports.end());
    o.files.insert(o.files.end(), p.files.begin(), p.files.end());
    for (const auto& n : p.notes) o.notes.push_back((p.label.empty() ? "" : p.label + ": ") + n);
    o.converged = o.converged && p.converged;
  }
}

}  // namespace

ScenarioOutcome run_scenario(const RunConfig& cfg, int threads) {
  auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  ScenarioOutcome o;
  std::vector<PointResult> pts;

  if (cfg.scenario == "single" || cfg.scenario == "cw_spectrum") {
    if (cfg.sim.drive.kind == PumpDrive::CW)
      pts.push_back(run_cw_point(cfg.sim, dir, "", cfg.write_moments, cfg.spectrum_points));
    else
      pts.push_back(run_pulsed_point(cfg.sim, dir, "", cfg.write_moments, false));
    collect(o, pts);
  } else if (cfg.scenario == "finesse_sweep") {
    std::vector<std::function<PointResult()>> jobs;
    for (size_t k = 0; k < cfg.sweep.size(); ++k) {
      SimConfig c = cfg.sim;
      c.device.finesse = cfg.sweep[k];
      std::string rel = point_dir(k);
      jobs.push_back([c, dir, rel, &cfg] {
        PointResult p = run_pulsed_point(c, dir / rel, rel + "/", cfg.write_moments, true);
        p.label = rel;
        return p;
      });
    }
    pts = run_pool(jobs, threads);
    Table t{{"finesse", "n_tot", "n_out", "g2_S", "g11", "first_order_n_tot", "cmio_n_out"}, {}};
    for (size_t k = 0; k < pts.size(); ++k)
      t.rows.push_back({fmt(cfg.sweep[k]), fmt(pts[k].n_tot), fmt(pts[k].n_out), fmt(pts[k].g2),
                        fmt(pts[k].g11), fmt(pts[k].first_order), fmt(pts[k].cmio_out)});
    write_file(dir / "finesse_sweep.csv", [&](std::ostream& os) { t.write(os); });
    o.files.push_back("finesse_sweep.csv");
    collect(o, pts);
  } else if (cfg.scenario == "power_sweep") {
    const bool cw = cfg.sim.drive.kind == PumpDrive::CW;
    std::vector<std::function<PointResult()>> jobs;
    for (size_t k = 0; k < cfg.sweep.size(); ++k)
      for (bool spm : {true, false}) {
        SimConfig c = cfg.sim;
        c.spm_xpm = spm;
        if (cw)
          c.drive.power = cfg.sweep[k] * MW;
        else
          c.drive.energy = cfg.sweep[k];
        std::string rel = point_dir(k, spm ? "_spm_xpm" : "_linear");
        jobs.push_back([c, dir, rel, cw, &cfg] {
          PointResult p = cw ? run_cw_point(c, dir / rel, rel + "/", cfg.write_moments, cfg.spectrum_points)
                             : run_pulsed_point(c, dir / rel, rel + "/", cfg.write_moments, false);
          p.label = rel;
          return p;
        });
      }
    pts = run_pool(jobs, threads);
    Table t;
    if (cw)
      t.header = {"power_mw", "rate_out_spm_xpm", "rate_out_linear", "rate_total_spm_xpm", "rate_total_linear"};
    else
      t.header = {"energy_pj", "n_out_spm_xpm", "n_out_linear", "n_tot_spm_xpm", "n_tot_linear"};
    for (size_t k = 0; k < cfg.sweep.size(); ++k) {
      const PointResult& a = pts[2 * k];
      const PointResult& b = pts[2 * k + 1];
      t.rows.push_back({fmt(cfg.sweep[k]), fmt(a.n_out), fmt(b.n_out), fmt(a.n_tot), fmt(b.n_tot)});
    }
    write_file(dir / "power_sweep.csv", [&](std::ostream& os) { t.write(os); });
    o.files.push_back("power_sweep.csv");
    collect(o, pts);
  }

  write_file(dir / "oracles.csv", [&](std::ostream& os) { write_reports(os, o.reports); });
  o.files.push_back("oracles.csv");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_metadata(dir, cfg, pts, o, secs);
  return o;
}

ScenarioOutcome run_checks(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  ScenarioOutcome o;
  PointResult pr;
  pr.label = "check";

  // toy copy of the configured device against direct integration
  {
    SimConfig c = cfg.sim;
    c.nk = 3;
    c.device.n_ring = 2;
    c.grow_grid = false;
    c.drive = PumpDrive{};
    c.drive.energy = 1.0;
    Simulation sim(c);
    auto eng = sim.make_engine(sim.linear_pump());
    const double t1 = std::min(sim.pulse_end(), 1500.0);
    OutTransfer ref = direct_ode_reference(*eng, 0, t1);
    eng->reset(0);
    eng->run(4000, t1 / 4000);
    OracleReport r = compare("direct_ode", "transfer_distance", (eng->out_transfer().U - ref.U).norm(), 0.0, 1e-6, true);
    r.note = "toy device: 3 bins, 2 ring phantoms, 1 pJ";
    pr.reports.push_back(r);
  }
  if (cfg.sim.drive.kind == PumpDrive::Gaussian) {
    PointResult p = run_pulsed_point(cfg.sim, dir / "check", "check/", false, true);
    pr.reports.insert(pr.reports.end(), p.reports.begin(), p.reports.end());
    pr.notes = p.notes;
  } else {
    PointResult p = run_cw_point(cfg.sim, dir / "check", "check/", false, cfg.spectrum_points);
    pr.reports.insert(pr.reports.end(), p.reports.begin(), p.reports.end());
    pr.notes = p.notes;
    pr.converged = p.converged;
  }
  o.reports = pr.reports;
  o.notes = pr.notes;
  o.converged = pr.converged;
  write_file(dir / "oracles.csv", [&](std::ostream& os) { write_reports(os, o.reports); });
  o.files.push_back("oracles.csv");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  pr.seconds = secs;
  write_metadata(dir, cfg, {pr}, o, secs);
  return o;
}

}  // namespace ringsq
