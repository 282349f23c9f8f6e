#pragma once

#include "ringsq/basis.hpp"

#include <array>

namespace ringsq {

enum Region : int { Waveguide = 0, Ring = 1 };

// local modes sharing one inter-point segment (one or two members)
struct LocalGroup {
  int point = 0;
  double z0 = 0, z1 = 0;
  std::vector<int> members;
};

// resonance-centre local envelopes of one resonance
struct LocalModes {
  int J = 0;
  std::vector<int> anchor;
  std::vector<Vec2> start;
  std::vector<LocalGroup> groups;
};

LocalModes local_modes(const DeviceSpec& spec, int J);

using Quad = std::array<int, 4>;

int combinatorial_factor(const Quad& Jv);

// 1/2 hbar w gamma v^2 with geometric-mean frequency and velocity, um/ps
double nonlinear_strength(const DeviceSpec& spec, const Quad& Jv, Region tau);

// carrier mismatch k1 + k2 - k3 - k4 of the region's reference wavevectors
double carrier_mismatch(const DeviceSpec& spec, const Quad& Jv, Region tau);

// integral over the shared segment of conj(h1) conj(h2) h3 h4 e^{-i dk0 (z - z_n)}
// with resonance-centre envelopes; zero unless all four modes share a segment
cplx segment_overlap(const DeviceSpec& spec, const std::array<const LocalModes*, 4>& m,
                     const Quad& nv, Region tau, int nodes = 16);

// same integrand with each envelope evaluated at its own detuning
cplx segment_overlap_exact(const DeviceSpec& spec, const std::array<const LocalModes*, 4>& m,
                           const Quad& nv, Region tau, const std::array<double, 4>& dks,
                           int nodes = 16);

// g Lambda J~ C_{m,n1} e^{-i dk0 z_n}
cplx effective_coupling(const DeviceSpec& spec, const std::array<const LocalModes*, 4>& m,
                        const Quad& Jv, const Quad& nv, int m_out, const Mat& C, Region tau);

// Per-group coefficient tables for the equations of motion, with the
// multiplicity of each process, Lambda/(2 pi)^2 and both regions folded in.
struct CouplingTensor {
  int n = 0;  // local modes per resonance
  std::vector<LocalGroup> groups;
  // [group][a*8 + b*4 + c*2 + d] over group members
  std::vector<std::array<cplx, 16>> xpm_s, xpm_i, sfwm, spm;
  Mat ring_gram;  // int_ring conj(h_a) h_b of the pump local modes
};

CouplingTensor build_coupling_tensor(const DeviceSpec& spec, int nodes = 16);

struct PumpKernels {
  Mat KS;  // cross-phase on signal, n x n
  Mat KI;  // cross-phase on idler
  Mat P;   // pair generation, signal index x idler index
};

// q: pump local amplitudes integrated over the pump window
PumpKernels pump_kernels(const CouplingTensor& t, const Vec& q, bool xpm);

// self-phase drive s with d alpha_loc/dt = ... + i C s
Vec spm_drive(const CouplingTensor& t, const Vec& q);

// Exact-overlap representation for the single-channel (lossless) device:
// envelopes on a quadrature grid for every bin of a window.
struct SpatialGrid {
  RVec z, w;
  std::vector<int> region;
};

SpatialGrid make_spatial_grid(const DeviceSpec& spec, int pieces_ring = 40, int pieces_coupler = 8,
                              int nodes = 16);

// rows: grid nodes, columns: bins (asymptotic-in envelope of the real waveguide input)
Mat spatial_envelopes(const DeviceSpec& spec, int J, const std::vector<double>& dks,
                      const SpatialGrid& g);

struct DenseCoupling {
  SpatialGrid grid;
  RVec lam_xpm_s, lam_xpm_i, lam_sfwm, lam_spm;  // per node, regions folded in
  Vec sfwm_phase;  // e^{-i dk0 z} per node
  Mat HS, HI, HP;
};

DenseCoupling build_dense_coupling(const DeviceSpec& spec, const std::vector<double>& dS,
                                   const std::vector<double>& dI, const std::vector<double>& dP);

// Q(z) = dk_P sum_k alpha(k) h(z; k)
Vec pump_profile(const DenseCoupling& d, const Vec& alpha, double dkP);

// N_k x N_k kernels in the asymptotic-in basis
PumpKernels dense_kernels(const DenseCoupling& d, const Vec& Q, bool xpm);
Vec dense_spm_drive(const DenseCoupling& d, const Vec& Q);

}  // namespace ringsq
