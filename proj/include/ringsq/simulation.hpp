#pragma once

#include "ringsq/observables.hpp"

#include <memory>
#include <string>

namespace ringsq {

struct SimConfig {
  DeviceParams device;
  double n_r = 10;  // window half-width in linewidths (capped at 0.4 F)
  int nk = 41;
  PumpDrive drive;
  bool spm_xpm = true;
  double dt = 0;             // 0: automatic two-segment schedule
  int dt_refine = 0;         // halve (k > 0) or double (-1) every step, 2^k
  double pump_tol = 1e-6;    // pump photon drift
  double end_fraction = 1e-4;
  bool grow_grid = true;     // pulsed: enlarge nk when the run outlasts the grid recurrence
  int cw_round_trips = 10;
  double cw_drift_tol = 1e-5;
  double symplectic_warn = 1e-6;
};

struct RunDiagnostics {
  double dt = 0;
  double dt_tail = 0;  // step after the pulse has entered (pulsed)
  int steps = 0;
  double t_end = 0;
  double recurrence = 0;
  int nk = 0;
  double n_r = 0;
  double symplectic_defect = 0;
  double pump_photon_drift = 0;
  std::vector<std::string> notes;
};

struct PulsedResult {
  OutTransfer out;
  PhotonNumbers photons;
  MomentMatrices moments;
  RunDiagnostics diag;
};

struct CwResult {
  PhotonNumbers p1, pc, p2;
  MomentMatrices m1, m2;
  double t1 = 0, tc = 0, t2 = 0;
  SpectralDensities densities;
  PairRates rates;
  bool converged = true;
  OutTransfer out;  // at t2
  RunDiagnostics diag;
};

// Owns every piece of one operating point: device, windows, couplings, pump.
class Simulation {
 public:
  explicit Simulation(const SimConfig& cfg);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const SimConfig& config() const { return cfg_; }
  const DeviceSpec& spec() const { return spec_; }
  const ResonanceWindow& signal_window() const { return ws_; }
  const ResonanceWindow& idler_window() const { return wi_; }
  const WindowBasis& pump_basis() const { return wbp_; }
  const PumpModel& pump_model() const { return pm_; }
  const PumpField& pump_field() const { return field_; }
  const PumpTrajectory& linear_pump() const { return lin_; }
  double recurrence_time() const;
  double round_trip() const;

  // pump history used by the signal/idler run, n2 half steps of h
  const PumpTrajectory& pump_trajectory(double h, int n2);
  // engine bound to the current pump trajectory
  std::unique_ptr<SqueezeEngine> make_engine(const PumpTrajectory& tr) const;

  PulsedResult run_pulsed();
  CwResult run_cw();

  double pulse_end() const { return t_end_; }

 private:
  SimConfig cfg_;
  DeviceSpec spec_;
  ResonanceWindow ws_, wi_, wp_;
  WindowBasis wbp_;
  CouplingTensor tensor_;
  DenseCoupling dense_;
  PumpModel pm_;
  PumpField field_;
  PumpTrajectory lin_, traj_;
  double t_end_ = 0;
  double n_r_ = 0;
  std::vector<std::string> notes_;

  void build(int nk);
};

}  // namespace ringsq
