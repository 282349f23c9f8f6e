#include "ringsq/observables.hpp"

#include "ringsq/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace ringsq {

namespace {

Mat channel_rows(const Mat& m, int nk, int n, int channel) {
  Mat r(nk, m.cols());
  for (int i = 0; i < nk; ++i) r.row(i) = m.row(i * n + channel);
  return r;
}

}  // namespace

MomentMatrices output_moments(const OutTransfer& o, int channel) {
  if (channel < 0 || channel >= o.n) throw DomainError("channel out of range");
  Mat VSS = channel_rows(o.VSS(), o.nk, o.n, channel);
  Mat WSI = channel_rows(o.WSI(), o.nk, o.n, channel);
  Mat WIS = channel_rows(o.WIS(), o.nk, o.n, channel);
  Mat VII = channel_rows(o.VII(), o.nk, o.n, channel);
  MomentMatrices m;
  m.nk = o.nk;
  m.NSS = WSI.conjugate() * WSI.transpose();
  m.NII = WIS.conjugate() * WIS.transpose();
  m.MSI = VSS * WIS.transpose();
  m.MIS = VII * WSI.transpose();
  return m;
}

FullMoments full_moments(const OutTransfer& o) {
  const Eigen::Index m = o.modes();
  Mat V = Mat::Zero(2 * m, 2 * m), W = Mat::Zero(2 * m, 2 * m);
  V.topLeftCorner(m, m) = o.VSS();
  V.bottomRightCorner(m, m) = o.VII();
  W.topRightCorner(m, m) = o.WSI();
  W.bottomLeftCorner(m, m) = o.WIS();
  FullMoments f;
  f.N = W.conjugate() * W.transpose();
  f.M = V * W.transpose();
  return f;
}

double purity_defect(const Mat& N, const Mat& M) {
  Mat lhs = M * M.adjoint();
  Mat rhs = (N * (N + Mat::Identity(N.rows(), N.cols()))).conjugate();
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

double PhotonNumbers::lost_total_S() const {
  double s = 0;
  for (double x : lost_S) s += x;
  return s;
}

double PhotonNumbers::lost_total_I() const {
  double s = 0;
  for (double x : lost_I) s += x;
  return s;
}

PhotonNumbers photon_numbers(const OutTransfer& o) {
  PhotonNumbers p;
  Mat WSI = o.WSI(), WIS = o.WIS();
  RVec rs = WSI.rowwise().squaredNorm(), ri = WIS.rowwise().squaredNorm();
  std::vector<double> cs(o.n, 0.0), ci(o.n, 0.0);
  for (int i = 0; i < o.nk; ++i)
    for (int c = 0; c < o.n; ++c) {
      cs[c] += rs(i * o.n + c);
      ci[c] += ri(i * o.n + c);
    }
  p.out_S = cs[0];
  p.out_I = ci[0];
  p.lost_S.assign(cs.begin() + 1, cs.end());
  p.lost_I.assign(ci.begin() + 1, ci.end());
  p.tot_S = rs.sum();
  p.tot_I = ri.sum();
  return p;
}

Correlations correlations(const MomentMatrices& m) {
  double ts = m.NSS.trace().real(), ti = m.NII.trace().real();
  if (!(ts > 0) || !(ti > 0)) throw UndefinedCorrelation("correlations need a non-zero photon number");
  Correlations c;
  c.g2_S = ((m.NSS * m.NSS).trace().real() + ts * ts) / (ts * ts);
  c.g2_I = ((m.NII * m.NII).trace().real() + ti * ti) / (ti * ti);
  c.g11 = ((m.MSI * m.MSI.adjoint()).trace().real() + ts * ti) / (ts * ti);
  return c;
}

MomentSpectra decompose(const MomentMatrices& m) {
  MomentSpectra s;
  s.n_S = Eigen::SelfAdjointEigenSolver<Mat>(m.NSS, Eigen::EigenvaluesOnly).eigenvalues().reverse();
  s.n_I = Eigen::SelfAdjointEigenSolver<Mat>(m.NII, Eigen::EigenvaluesOnly).eigenvalues().reverse();
  s.m_SI = Eigen::JacobiSVD<Mat>(m.MSI).singularValues();
  return s;
}

SpectralDensities cw_densities(const MomentMatrices& a, const MomentMatrices& b, double dt,
                               const ResonanceWindow& ws, double v) {
  if (a.nk != b.nk || a.nk != ws.nk) throw DomainError("snapshot sizes differ");
  const int nk = a.nk;
  const double scale = 2 * PI / (v * ws.dk) / dt;
  SpectralDensities d;
  d.omega.resize(nk);
  d.nS.resize(nk);
  d.nI.resize(nk);
  d.mSI.resize(nk);
  d.mIS.resize(nk);
  for (int i = 0; i < nk; ++i) {
    int m = nk - 1 - i;
    d.omega(i) = v * ws.offsets[i];
    d.nS(i) = scale * (b.NSS(i, i) - a.NSS(i, i)).real();
    d.nI(i) = scale * (b.NII(i, i) - a.NII(i, i)).real();
    d.mSI(i) = scale * (b.MSI(i, m) - a.MSI(i, m));
    d.mIS(i) = scale * (b.MIS(i, m) - a.MIS(i, m));
  }
  return d;
}

namespace {

template <class V>
auto interp(const RVec& x, const V& y, double xi) {
  const Eigen::Index n = x.size();
  if (xi < x(0) - 1e-12 * std::abs(x(0)) || xi > x(n - 1) + 1e-12 * std::abs(x(n - 1)))
    throw DomainError("spectrum frequency outside the sampled window");
  Eigen::Index j = std::upper_bound(x.data(), x.data() + n, xi) - x.data() - 1;
  j = std::clamp<Eigen::Index>(j, 0, n - 2);
  double f = std::clamp((xi - x(j)) / (x(j + 1) - x(j)), 0.0, 1.0);
  return (1 - f) * y(j) + f * y(j + 1);
}

}  // namespace

SqueezingSpectrum squeezing_spectrum(const SpectralDensities& d, const std::vector<double>& omega) {
  SqueezingSpectrum s;
  for (double w : omega) {
    double np = 0.5 * (interp(d.omega, d.nS, w) + interp(d.omega, d.nI, w));
    double nm = 0.5 * (interp(d.omega, d.nS, -w) + interp(d.omega, d.nI, -w));
    cplx mt = 0.5 * (interp(d.omega, d.mSI, w) + interp(d.omega, d.mIS, w));
    double base = 1 + np + nm;
    s.omega.push_back(w);
    s.vmin.push_back(base - 2 * std::abs(mt));
    s.vmax.push_back(base + 2 * std::abs(mt));
    // Re{M e^{-i phi}} is most negative at phi = arg M + pi
    double phi = std::arg(mt) + PI;
    if (phi > PI) phi -= 2 * PI;
    s.phi_star.push_back(phi);
  }
  return s;
}

std::vector<double> default_omega_grid(const SpectralDensities& d, double gamma_rad, int n) {
  double lim = std::min(5 * gamma_rad, std::min(-d.omega(0), d.omega(d.omega.size() - 1)));
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = n == 1 ? 0.0 : -lim + 2 * lim * i / (n - 1);
  return g;
}

PairRates cw_pair_rates(const PhotonNumbers& p1, const PhotonNumbers& pc, const PhotonNumbers& p2,
                        double t1, double tc, double t2, double round_trip) {
  const double per_s = 1e12;
  PairRates r;
  r.out = (p2.out_S - p1.out_S) / (t2 - t1) * per_s;
  r.lost = (p2.lost_total_S() - p1.lost_total_S()) / (t2 - t1) * per_s;
  r.total = (p2.tot_S - p1.tot_S) / (t2 - t1) * per_s;
  double a = (pc.tot_S - p1.tot_S) / (tc - t1), b = (p2.tot_S - pc.tot_S) / (t2 - tc);
  double trips = 0.5 * (t2 - t1) / round_trip;
  r.drift = (a + b) != 0 ? std::abs(b - a) / std::abs(0.5 * (a + b)) / std::max(trips, 1e-300) : 0.0;
  return r;
}

}  // namespace ringsq
