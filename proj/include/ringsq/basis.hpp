#pragma once

#include "ringsq/device.hpp"

#include <iosfwd>

namespace ringsq {

// Sampled envelopes of a set of modes (columns). Samples sit on both sides
// of every coupling point; mid-segment values are rebuilt on demand.
struct AsymptoticEnvelope {
  int J = 0;
  double dk = 0;
  std::vector<Mat> before;  // [point] 2 x modes, (psi, phi) at z_j^-
  std::vector<Mat> after;   // [point] 2 x modes, at z_j^+
  Mat exit;                 // 1 x modes, waveguide envelope at L_c
  Mat out;                  // channels x modes, outgoing amplitudes
  Mat in;                   // channels x modes, incoming amplitudes
};

struct NetworkSolution {
  AsymptoticEnvelope env;  // asymptotic-in modes, one per input channel
  Mat S;                   // S(m, n): outgoing amplitude in m for unit input in n
  cplx round_trip;         // ring amplitude factor for one unforced round trip
};

// steady state for unit input in every channel; throws SingularError near a pole
NetworkSolution build_asymptotic_in(const DeviceSpec& spec, int J, double dk);

// modes with a unit outgoing wave in exactly one channel, via the adjoint (S^dagger)
AsymptoticEnvelope build_asymptotic_out(const NetworkSolution& net);

// same, by explicit inversion of S; used to cross-check the adjoint route
AsymptoticEnvelope build_asymptotic_out_inverse(const NetworkSolution& net);

// (psi, phi) of every mode at z; in the waveguide beyond L_c psi is 0
Mat envelope_at(const DeviceSpec& spec, const AsymptoticEnvelope& env, double z);

struct BasisTransform {
  Mat Lin;   // row c: incoming amplitudes of local mode c
  Mat Lout;  // row c: outgoing amplitudes of local mode c
  Mat X;     // Lin^-1
  Mat Xout;  // Lout^-1
  std::vector<int> anchor;   // coupling point of each local mode
  std::vector<Vec2> start;   // (psi, phi) of each local mode at its anchor, z^+
};

BasisTransform build_local_transform(const DeviceSpec& spec, int J, double dk);

// commutators [a_loc_n, a_loc_n'^dagger] from the inverse transform
Mat commutator_matrix(const Mat& Xinv);

enum class BasisDir { InToLoc, LocToIn, LocToOut };
Vec change_basis(const Vec& a, BasisDir dir, const BasisTransform& t);

// local mode envelope at z, for a mode anchored at point j with start state s
Vec2 local_envelope(const DeviceSpec& spec, int J, double dk, int point, const Vec2& start, double z);

// advance (psi, phi) along [za, zb] inside one inter-point segment; psi is
// dropped once the waveguide leaves the coupler
Vec2 advance(const DeviceSpec& spec, int J, double dk, double za, double zb, const Vec2& s);

// end of the segment that starts at coupling point j (L_r for the last one)
double segment_end(const DeviceSpec& spec, int j);

void dump_envelopes(std::ostream& os, const DeviceSpec& spec, const AsymptoticEnvelope& env,
                    int samples_per_segment);

}  // namespace ringsq
