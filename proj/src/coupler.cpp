#include "ringsq/coupler.hpp"

#include "ringsq/errors.hpp"

#include <cmath>

namespace ringsq {

namespace {

struct CouplerParams {
  double m0;     // mean diagonal of the translation-invariant generator
  double mu;     // half difference of the diagonal
  double cw;     // omega_c / v
  double cr;     // omega_c / u
  double alpha;
};

CouplerParams params(const DeviceSpec& spec, int J, double dk) {
  const ResonanceSpec& r = spec.res[J];
  double a = dk + r.dbeta();
  double b = (r.v / r.u) * dk;
  CouplerParams p;
  p.m0 = 0.5 * (a + b);
  p.mu = 0.5 * (a - b);
  p.cw = spec.omega_c / r.v;
  p.cr = spec.omega_c / r.u;
  p.alpha = std::sqrt(p.mu * p.mu + p.cw * p.cr);
  return p;
}

// exp(i d M) with M = [[m0 + mu, -cw], [-cr, m0 - mu]]
Mat2 invariant_transfer(const CouplerParams& p, double d) {
  double c = std::cos(p.alpha * d);
  double s_over = p.alpha > 0 ? std::sin(p.alpha * d) / p.alpha : d;
  Mat2 E;
  E(0, 0) = cplx(c, s_over * p.mu);
  E(1, 1) = cplx(c, -s_over * p.mu);
  E(0, 1) = cplx(0.0, -s_over * p.cw);
  E(1, 0) = cplx(0.0, -s_over * p.cr);
  return expi(p.m0 * d) * E;
}

}  // namespace

CouplerEnvelope coupler_envelopes(const DeviceSpec& spec, int J, double z, double dk) {
  CouplerParams p = params(spec, J, dk);
  const ResonanceSpec& r = spec.res[J];
  CouplerEnvelope e;
  e.alpha = p.alpha;
  e.gamma = p.alpha > 0 ? p.mu / p.alpha : 0.0;
  e.mu_minus = p.mu;
  e.mu_plus = 0.5 * (1.0 + r.v / r.u) * dk;
  cplx ph = expi(-0.5 * r.dbeta() * z);
  double s = std::sin(p.alpha * z);
  e.sigma = cplx(std::cos(p.alpha * z), e.gamma * s) * ph;
  e.kappa = std::sqrt(std::max(0.0, 1.0 - e.gamma * e.gamma)) * s * ph;
  return e;
}

Mat2 coupler_transfer(const DeviceSpec& spec, int J, double za, double zb, double dk) {
  CouplerParams p = params(spec, J, dk);
  double db = spec.res[J].dbeta();
  Mat2 E = invariant_transfer(p, zb - za);
  // waveguide envelope carries e^{i dbeta z} relative to the invariant frame
  E.row(0) *= expi(-db * zb);
  E.col(0) *= expi(db * za);
  return E;
}

Mat2 coupler_transfer(const DeviceSpec& spec, int J, double z, double dk) {
  return coupler_transfer(spec, J, 0.0, z, dk);
}

cplx one_minus_rotated(cplx s, double theta) {
  // 1 - s e^{it} = (1 - s) + s (1 - e^{it}),  1 - e^{it} = -2i sin(t/2) e^{it/2}
  cplx one_minus_phase = -2.0 * I1 * std::sin(0.5 * theta) * expi(0.5 * theta);
  return (1.0 - s) + s * one_minus_phase;
}

RingResponse ring_response(const DeviceSpec& spec, int J, double dk) {
  const ResonanceSpec& r = spec.res[J];
  CouplerEnvelope e = coupler_envelopes(spec, J, spec.L_c, dk);
  PathLength pl = map_path(spec, J, spec.L_r);
  double lc = map_path(spec, J, spec.L_c).l;
  double theta = dk * pl.Ltilde;
  cplx den = one_minus_rotated(std::conj(e.sigma), theta);
  if (std::abs(den) == 0.0) throw SingularError("ring_response: exact lossless pole");
  RingResponse out;
  out.sigma_bar = e.sigma;
  out.kappa_bar = e.kappa;
  out.R = -I1 * std::sqrt(r.v / r.u) * std::conj(e.kappa) / den;
  out.T = (e.sigma - expi(theta)) / den * expi(dk * lc);
  return out;
}

}  // namespace ringsq
