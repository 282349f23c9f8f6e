#pragma once

#include "ringsq/types.hpp"

#include <string>
#include <vector>

namespace ringsq {

// resonance slots, always in this order inside DeviceSpec::res
enum Res : int { S = 0, P = 1, I = 2 };
const char* res_name(int J);

struct ResonanceSpec {
  char label = 'P';
  double omega = 0;  // rad/ps
  double k = 0;      // waveguide reference wavevector, rad/um
  double kr = 0;     // ring reference wavevector, rad/um
  double v = 0;      // waveguide group velocity, um/ps
  double u = 0;      // ring group velocity, um/ps
  double dbeta() const { return k - kr; }
};

enum class ChannelKind { Waveguide, Ring, WgPhantom };

struct Channel {
  ChannelKind kind;
  int point;  // index of the coupling point the channel attaches to
};

struct CouplingPoint {
  double z;
  int ring_ch = -1;  // -1 when the point has no ring phantom (lossless device)
  int wg_ch = -1;    // waveguide channel entering at this point (0 for z = 0)
};

// Phantom channels discretizing distributed loss. Channel 0 is the real
// waveguide; the remaining channels are ordered by coupling point, ring
// phantom before waveguide phantom.
struct PhantomLayout {
  int n_ring = 0;
  std::vector<CouplingPoint> points;
  std::vector<Channel> channels;
  std::vector<std::vector<double>> sigma;  // [J][channel], channel 0 unused (1)

  int n_channels() const { return static_cast<int>(channels.size()); }
  double kappa(int J, int ch) const;
  double xi(int J) const;  // product of ring phantom sigmas
};

PhantomLayout make_layout(double L_r, double L_c, int n_ring, int n_res, double sigma_ph);

struct DeviceSpec {
  double L_r = 0;
  double L_c = 0;
  double omega_c = 0;  // coupling rate, rad/ps (branch offset already folded in)
  int branch = 0;
  std::vector<ResonanceSpec> res;  // S, P, I
  double gamma_wg = 0;             // 1/((pJ/ps) um)
  double gamma_ring = 0;
  PhantomLayout layout;

  double alpha0(int J) const;
  int n_channels() const { return layout.n_channels(); }
};

// three neighbouring ring resonances around the pump; the pump order is
// snapped to the closest isolated-ring resonance of lambda_p
std::vector<ResonanceSpec> nearest_neighbor_resonances(double lambda_um, double n_e, double v,
                                                       double R_e);

struct PathLength {
  double l;
  double Ltilde;
};
PathLength map_path(const DeviceSpec& spec, int J, double z);

struct Calibration {
  double rho;
  double sigma_bar;
  double xi;
  double sigma_ph;
  double alpha0;
  double omega_c;
};

// inverts finesse and escape efficiency; coupler geometry taken from res and L_c
Calibration calibrate_coupling(double finesse, double eta, int n_ring, int branch,
                               const ResonanceSpec& res, double L_c);

struct FiguresOfMerit {
  double gamma_hz;     // HWHM in Hz
  double gamma_rad;    // HWHM angular, rad/ps
  double eta_esc;
  double finesse;
  double peak_enhancement;
  double sigma_bar;
  double xi;
};
FiguresOfMerit figures_of_merit(const DeviceSpec& spec, int J);

// |F_J(dk)|^2 of the lossy ring with point-equivalent coupling
double enhancement(const DeviceSpec& spec, int J, double dk);

struct ResonanceWindow {
  int J = 0;
  double k0 = 0;   // window centre (waveguide wavevector)
  double dk = 0;   // bin width
  int nk = 0;
  std::vector<double> offsets;  // k_i - k_J

  double omega_offset(const ResonanceSpec& r, int i) const { return r.v * offsets[i]; }
};

ResonanceWindow build_k_grid(const DeviceSpec& spec, int J, double n_r, int nk);
ResonanceWindow make_window(int J, double k0, double half_width, int nk);

struct DeviceParams {
  double R_e = 120.0;
  double L_c_fraction = 0.25;
  double lambda_um = 1.55;
  double n_e = 2.0;
  double v = C_LIGHT / 2.0;
  double u_over_v = 1.0;
  double dbeta = 0.0;
  double gamma_nl = 1.0;  // 1/(W m)
  double finesse = 780.0;
  double eta_esc = 0.75;
  int n_ring = 20;
  int branch = 0;
  std::vector<double> sigma_override;  // optional per-channel sigma (channels 1..)
};

DeviceSpec build_device(const DeviceParams& p);

}  // namespace ringsq
