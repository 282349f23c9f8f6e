#pragma once

#include "ringsq/device.hpp"

namespace ringsq {

struct CouplerEnvelope {
  cplx sigma;
  cplx kappa;
  double alpha;     // envelope wavenumber alpha_k
  double gamma;     // signed phase-mismatch factor, |gamma| <= 1
  double mu_plus;
  double mu_minus;
};

CouplerEnvelope coupler_envelopes(const DeviceSpec& spec, int J, double z, double dk);

// transfer of (waveguide, ring) envelopes from 0 to z, resp. za to zb, inside [0, L_c]
Mat2 coupler_transfer(const DeviceSpec& spec, int J, double z, double dk);
Mat2 coupler_transfer(const DeviceSpec& spec, int J, double za, double zb, double dk);

struct RingResponse {
  cplx R;
  cplx T;
  cplx sigma_bar;
  cplx kappa_bar;
};

// lossless ring; throws SingularError on an exact pole
RingResponse ring_response(const DeviceSpec& spec, int J, double dk);

// 1 - s e^{i theta} without cancellation near theta = 0, s = 1
cplx one_minus_rotated(cplx s, double theta);

}  // namespace ringsq
