#include "ringsq/errors.hpp"
#include "ringsq/runner.hpp"
#include "ringsq/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace ringsq;

namespace {

py::dict report_dict(const OracleReport& r) {
  py::dict d;
  d["oracle"] = r.oracle;
  d["quantity"] = r.quantity;
  d["main"] = r.main;
  d["reference"] = r.reference;
  d["deviation"] = r.deviation;
  d["tolerance"] = r.tolerance;
  d["absolute"] = r.absolute;
  d["pass"] = r.pass;
  d["note"] = r.note;
  return d;
}

py::dict outcome_dict(const ScenarioOutcome& o) {
  py::dict d;
  d["converged"] = o.converged;
  d["files"] = o.files;
  d["notes"] = o.notes;
  py::list reps;
  for (const auto& r : o.reports) reps.append(report_dict(r));
  d["reports"] = reps;
  return d;
}

py::dict moments_dict(const MomentMatrices& m) {
  py::dict d;
  d["NSS"] = m.NSS;
  d["NII"] = m.NII;
  d["MSI"] = m.MSI;
  d["MIS"] = m.MIS;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pair generation and squeezing in a coupled microring";

  // translators are tried newest first, so the base class goes in first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NotConverged>(m, "NotConverged", PyExc_RuntimeError);

  m.def("scenario_names", &scenario_names);
  m.def("normalize_config", [](const std::string& text) { return config_echo(parse_config(text)); },
        py::arg("config_json"), "validate a JSON config and return it with every default filled in");

  m.def(
      "run_scenario",
      [](const std::string& text, const std::string& out_dir, int threads) {
        RunConfig c = parse_config(text);
        if (!out_dir.empty()) c.out_dir = out_dir;
        py::gil_scoped_release nogil;
        ScenarioOutcome o = run_scenario(c, threads);
        py::gil_scoped_acquire gil;
        return outcome_dict(o);
      },
      py::arg("config_json"), py::arg("out_dir") = "", py::arg("threads") = 1);

  m.def(
      "run_pulsed",
      [](const std::string& text) {
        RunConfig c = parse_config(text);
        if (c.sim.drive.kind != PumpDrive::Gaussian) throw ConfigError("run_pulsed needs a gaussian drive");
        PulsedResult r;
        {
          py::gil_scoped_release nogil;
          Simulation sim(c.sim);
          r = sim.run_pulsed();
        }
        py::dict d;
        d["n_tot_S"] = r.photons.tot_S;
        d["n_tot_I"] = r.photons.tot_I;
        d["n_out_S"] = r.photons.out_S;
        d["n_out_I"] = r.photons.out_I;
        d["lost_S"] = r.photons.lost_S;
        d["moments"] = moments_dict(r.moments);
        d["symplectic_defect"] = r.diag.symplectic_defect;
        d["steps"] = r.diag.steps;
        d["notes"] = r.diag.notes;
        try {
          Correlations g = correlations(r.moments);
          d["g2_S"] = g.g2_S;
          d["g2_I"] = g.g2_I;
          d["g11"] = g.g11;
        } catch (const UndefinedCorrelation&) {
          d["g2_S"] = py::none();
          d["g2_I"] = py::none();
          d["g11"] = py::none();
        }
        return d;
      },
      py::arg("config_json"));

  m.def(
      "figures_of_merit",
      [](const std::string& text) {
        RunConfig c = parse_config(text);
        DeviceSpec spec = build_device(c.sim.device);
        py::dict d;
        for (int J : {S, P, I}) {
          FiguresOfMerit f = figures_of_merit(spec, J);
          py::dict e;
          e["gamma_hz"] = f.gamma_hz;
          e["gamma_rad_per_ps"] = f.gamma_rad;
          e["eta_esc"] = f.eta_esc;
          e["finesse"] = f.finesse;
          e["peak_enhancement"] = f.peak_enhancement;
          d[J == S ? "signal" : J == P ? "pump" : "idler"] = e;
        }
        return d;
      },
      py::arg("config_json"));
}
