#pragma once

#include "ringsq/nonlinear.hpp"

#include <optional>

namespace ringsq {

struct PumpDrive {
  enum Kind { Gaussian, CW } kind = Gaussian;
  double energy = 100;     // pJ (pulsed)
  double tau = 70;         // ps, intensity rms duration (pulsed)
  double power = 1 * MW;  // pJ/ps (cw)
  double k0_offset = 0;    // centre of the drive relative to k_P, rad/um
  double lead = 5;         // pulse centre starts lead * v tau before the coupler
};

// pump grid: at least the signal/idler span, four pulse bandwidths for a
// pulse, and bins no wider than the signal/idler bins
ResonanceWindow pump_window(const DeviceSpec& spec, const PumpDrive& drive,
                            const ResonanceWindow& si, double half_width = 0);

// per-bin transforms of one window in the local basis
struct WindowBasis {
  ResonanceWindow win;
  std::vector<Mat> X;    // Lin^-1
  std::vector<Mat> Lin;
  std::vector<Mat> Lout;
  std::vector<Mat> C;    // commutators
  Mat Cstack;            // (nk n) x n, commutators stacked by bin
};

WindowBasis window_basis(const DeviceSpec& spec, const ResonanceWindow& win);

// amplitudes of the drive in the asymptotic-in basis of the real waveguide
Vec drive_amplitudes(const DeviceSpec& spec, const ResonanceWindow& win, const PumpDrive& drive);

struct PumpField {
  ResonanceWindow win;
  Vec alpha_in;   // nk, real waveguide channel
  Mat alpha_loc;  // nk x n
  double t = 0;
};

PumpField init_pump(const DeviceSpec& spec, const WindowBasis& wb, const PumpDrive& drive);

// Classical pump history as seen by the signal/idler equations. Local devices
// store q_n = dk sum_k alpha_loc_n(k); single-channel devices store alpha_in(k).
class PumpTrajectory {
 public:
  bool dense = false;
  double dk = 0;
  RVec dw;        // frequency offset of each pump bin, rad/ps
  Mat a0;         // initial amplitudes (nk x n local, nk x 1 dense)
  bool sampled = false;
  double t0 = 0, h = 0;
  std::vector<Vec> samples;

  Vec coords(double t) const;
  double t_end() const;
};

struct PumpModel {
  const DeviceSpec* spec = nullptr;
  const WindowBasis* wb = nullptr;              // local devices
  const CouplingTensor* tensor = nullptr;       // local devices
  const DenseCoupling* dense = nullptr;         // single-channel devices
  bool spm = true;
};

PumpTrajectory linear_trajectory(const PumpModel& m, const PumpField& f);

// RK4 with step h, samples every step; throws StepSizeError when the photon
// number of the lossless-in-total system drifts by more than tol. end, when
// given, receives the amplitudes after the last step.
PumpTrajectory propagate_pump(const PumpModel& m, const PumpField& f, double h, int n_steps,
                              double tol = 1e-6, std::vector<double>* photons = nullptr,
                              PumpField* end = nullptr);

// kernels for the signal/idler generator at time t
PumpKernels kernels_at(const PumpModel& m, const PumpTrajectory& tr, double t, bool xpm);

// pump energy stored in the ring (relative units)
double ring_energy(const PumpModel& m, const Vec& coords);

// first time after the peak where the ring energy falls below frac of the peak
double pulse_end_time(const PumpModel& m, const PumpTrajectory& tr, double frac, double dt,
                      double t_max);

// pump photon number of an amplitude set: sum_k dk |Lin^T alpha_loc|^2
double pump_photons(const PumpModel& m, const Mat& alpha_loc, double dk);

}  // namespace ringsq
