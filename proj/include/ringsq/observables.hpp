#pragma once

#include "ringsq/squeeze.hpp"

namespace ringsq {

// Second moments of one output channel in the discrete (canonical) bin
// operators b_i = sqrt(dk) a(k_i); densities <a^dagger(k) a(k')> are N / dk.
struct MomentMatrices {
  int nk = 0;
  Mat NSS, NII;  // <b^dagger_i b_j>
  Mat MSI, MIS;  // <b_i b_j>, first index on the first resonance
};

MomentMatrices output_moments(const OutTransfer& o, int channel = 0);

// all channels and both resonances: N = W* W^T, M = V W^T over (signal, idler) modes
struct FullMoments {
  Mat N, M;
};
FullMoments full_moments(const OutTransfer& o);
// max |M M^dagger - conj(N (N + I))|; zero for a pure Gaussian state
double purity_defect(const Mat& N, const Mat& M);

struct PhotonNumbers {
  double tot_S = 0, tot_I = 0;
  double out_S = 0, out_I = 0;
  std::vector<double> lost_S, lost_I;  // per phantom channel 1..n-1
  double lost_total_S() const;
  double lost_total_I() const;
};
PhotonNumbers photon_numbers(const OutTransfer& o);

struct Correlations {
  double g2_S = 0, g2_I = 0, g11 = 0;
};
// throws UndefinedCorrelation when a trace vanishes
Correlations correlations(const MomentMatrices& m);

// N eigenvalues and M singular values; the left and right factors of a traced
// (lossy) state need not coincide, so no common Schmidt basis is implied
struct MomentSpectra {
  RVec n_S, n_I;
  RVec m_SI;
};
MomentSpectra decompose(const MomentMatrices& m);

// Stationary spectral densities per signal bin i (idler partner at the mirror bin)
struct SpectralDensities {
  RVec omega;  // signal-bin angular offsets, rad/ps
  RVec nS, nI;  // signal at +w, idler at +w
  Vec mSI;      // <a_S(+w) a_I(-w)>
  Vec mIS;      // <a_I(+w) a_S(-w)>
};

// densities from two snapshots of the channel moments taken dt apart; the
// growth rate per bin times the recurrence time 2 pi/(v dk)
SpectralDensities cw_densities(const MomentMatrices& a, const MomentMatrices& b, double dt,
                               const ResonanceWindow& ws, double v);

struct SqueezingSpectrum {
  std::vector<double> omega, vmin, vmax, phi_star;
  static double to_db(double v) { return 10 * std::log10(v); }
};

// V(w; phi) = 1 + N~(w,w) + N~(-w,-w) + 2 Re{M~(w,-w) e^{-i phi}}; linear
// interpolation of the densities between bins. Throws DomainError outside the window.
SqueezingSpectrum squeezing_spectrum(const SpectralDensities& d, const std::vector<double>& omega);
// default grid: 201 points over +-5 linewidths clipped to the sampled window
std::vector<double> default_omega_grid(const SpectralDensities& d, double gamma_rad, int n = 201);

struct PairRates {
  double out = 0, lost = 0, total = 0;  // photons per second, signal
  double drift = 0;                     // relative rate change per round trip
};
// rates from photon numbers at t1 < tc < t2; drift compares the two halves
PairRates cw_pair_rates(const PhotonNumbers& p1, const PhotonNumbers& pc, const PhotonNumbers& p2,
                        double t1, double tc, double t2, double round_trip);

}  // namespace ringsq
