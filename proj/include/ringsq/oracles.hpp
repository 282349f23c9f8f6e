#pragma once

#include "ringsq/observables.hpp"

#include <functional>
#include <limits>
#include <string>

namespace ringsq {

// One comparison between the main path and a reference computation.
struct OracleReport {
  std::string oracle;
  std::string quantity;
  double main = 0;
  double reference = 0;
  double deviation = 0;  // relative unless absolute is set
  double tolerance = 0;  // <= 0: informational, never fails
  bool absolute = false;
  bool pass = true;
  std::string note;
};

OracleReport compare(const std::string& oracle, const std::string& quantity, double main,
                     double reference, double tolerance, bool absolute = false);

// Leading Dyson term of the pair amplitude: W ~ i dk int ds e^{i(wS+wI)s} C P(s),
// mapped to the output basis; n_tot = |W|_F^2 over all channels.
struct FirstOrderPairs {
  double n_tot = 0;
  bool valid = true;  // false when the estimate reaches 1e-2
  std::string warning;
};
// h: quadrature step, 0 picks one from the window detunings and tau
FirstOrderPairs first_order_pairs(const SqueezeEngine& eng, double t0, double t1, double h = 0,
                                  double tau = 0);

// Adaptive Runge-Kutta-Fehlberg 7(8) on the unsplit lab-frame generator; toy
// sizes only (state dimension <= 96).
OutTransfer direct_ode_reference(const SqueezeEngine& eng, double t0, double t1,
                                 double tol = 1e-12);

// Point-coupled single-mode-per-resonance model. Rates are amplitude decay
// rates (the linewidth HWHM); couplings are per unit ring photon number.
struct CmioDevice {
  double gamma[3] = {0, 0, 0};  // S, P, I, rad/ps
  double eta = 1;
  double g_spm = 0;   // d b_P/dt = i g_spm |b_P|^2 b_P
  double g_xpm_s = 0, g_xpm_i = 0;
  double g_sfwm = 0;  // d b_S/dt = i g_sfwm b_P^2 b_I^dagger
};
CmioDevice cmio_device(const DeviceSpec& spec);

struct CmioPulsed {
  double n_tot = 0, n_out = 0;
  double g2_S = 0, g2_I = 0, g11 = 0;
  int bins = 0;
};
// flux: input pump amplitude at the coupler, sqrt(photons/ps); time bins of width dt
CmioPulsed cmio_pulsed(const CmioDevice& d, const std::function<cplx(double)>& flux, double t_end,
                       double dt, bool spm_xpm);

// input amplitude of a sampled pump window at the coupler. The sampled field is
// periodic in the grid recurrence time; a finite centre keeps one period only.
std::function<cplx(double)> window_flux(const ResonanceWindow& win, const Vec& alpha_in, double v,
                                        double centre = std::numeric_limits<double>::quiet_NaN());

struct CmioCw {
  double ring_photons = 0;  // |b_P|^2
  double rate_out = 0, rate_total = 0;  // signal photons per second
  SpectralDensities densities;
};
// cw drive of power (pJ/ps) on resonance; densities on the given offsets (rad/ps)
CmioCw cmio_cw(const CmioDevice& d, const DeviceSpec& spec, double power,
               const std::vector<double>& omega, bool spm_xpm);

}  // namespace ringsq
