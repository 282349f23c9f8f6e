#include "ringsq/basis.hpp"

#include "ringsq/coupler.hpp"
#include "ringsq/errors.hpp"

#include <Eigen/LU>
#include <cmath>
#include <ostream>

namespace ringsq {

double segment_end(const DeviceSpec& spec, int j) {
  const auto& pts = spec.layout.points;
  return j + 1 < static_cast<int>(pts.size()) ? pts[j + 1].z : spec.L_r;
}

Vec2 advance(const DeviceSpec& spec, int J, double dk, double za, double zb, const Vec2& s) {
  Vec2 out = s;
  const ResonanceSpec& r = spec.res[J];
  if (za < spec.L_c) {
    double zc = std::min(zb, spec.L_c);
    out = coupler_transfer(spec, J, za, zc, dk) * out;
    if (zb > zc) {
      out(0) = 0.0;
      out(1) *= expi((r.v / r.u) * dk * (zb - zc));
    }
  } else {
    out(0) = 0.0;
    out(1) *= expi((r.v / r.u) * dk * (zb - za));
  }
  return out;
}

namespace {

// propagate every column of a 2 x m state across [za, zb]; the waveguide
// leaving the coupler in between is recorded into exit
void advance_block(const DeviceSpec& spec, int J, double dk, double za, double zb, Mat& st,
                   Mat* exit) {
  const ResonanceSpec& r = spec.res[J];
  if (za < spec.L_c) {
    double zc = std::min(zb, spec.L_c);
    st = coupler_transfer(spec, J, za, zc, dk) * st;
    if (zc == spec.L_c) {
      if (exit) *exit = st.row(0);
      st.row(0).setZero();
    }
    if (zb > zc) st.row(1) *= expi((r.v / r.u) * dk * (zb - zc));
  } else {
    st.row(1) *= expi((r.v / r.u) * dk * (zb - za));
  }
}

// lossless splice on flux amplitudes: field a, phantom input p
void splice(double sg, double kp, cplx& a, cplx p, cplx& out) {
  out = -I1 * kp * a + sg * p;
  a = sg * a - I1 * kp * p;
}

AsymptoticEnvelope combine(const AsymptoticEnvelope& e, const Mat& coeffs) {
  AsymptoticEnvelope o;
  o.J = e.J;
  o.dk = e.dk;
  for (const auto& m : e.before) o.before.push_back(m * coeffs);
  for (const auto& m : e.after) o.after.push_back(m * coeffs);
  o.exit = e.exit * coeffs;
  o.out = e.out * coeffs;
  o.in = e.in * coeffs;
  return o;
}

}  // namespace

NetworkSolution build_asymptotic_in(const DeviceSpec& spec, int J, double dk) {
  const PhantomLayout& lay = spec.layout;
  const ResonanceSpec& r = spec.res[J];
  const int nc = lay.n_channels();
  const int cols = nc + 1;  // last column: unit ring amplitude arriving at z = 0
  const double flux = std::sqrt(r.u / r.v);
  const int np = static_cast<int>(lay.points.size());

  Mat st = Mat::Zero(2, cols);
  st(1, nc) = 1.0;
  Mat out = Mat::Zero(nc, cols);
  Mat exit = Mat::Zero(1, cols);
  std::vector<Mat> before(np), after(np);

  for (int j = 0; j < np; ++j) {
    const CouplingPoint& pt = lay.points[j];
    if (j > 0) advance_block(spec, J, dk, lay.points[j - 1].z, pt.z, st, &exit);
    before[j] = st;
    if (j == 0) st(0, 0) = 1.0;
    if (pt.ring_ch >= 0) {
      int c = pt.ring_ch;
      double sg = lay.sigma[J][c], kp = lay.kappa(J, c);
      for (int col = 0; col < cols; ++col) {
        cplx a = flux * st(1, col);
        splice(sg, kp, a, col == c ? 1.0 : 0.0, out(c, col));
        st(1, col) = a / flux;
      }
    }
    if (pt.wg_ch > 0) {
      int c = pt.wg_ch;
      double sg = lay.sigma[J][c], kp = lay.kappa(J, c);
      for (int col = 0; col < cols; ++col) {
        cplx a = st(0, col);
        splice(sg, kp, a, col == c ? 1.0 : 0.0, out(c, col));
        st(0, col) = a;
      }
    }
    after[j] = st;
  }
  advance_block(spec, J, dk, lay.points[np - 1].z, spec.L_r, st, &exit);
  out.row(0) = exit;

  cplx H = st(1, nc);
  if (std::abs(1.0 - H) < 1e-14) throw SingularError("ring round trip is singular");
  // ring amplitude closing the loop for each physical input
  Eigen::RowVectorXcd ring = st.row(1).head(nc) / (1.0 - H);

  Mat close = Mat::Zero(cols, nc);
  close.topRows(nc).setIdentity();
  close.row(nc) = ring;

  NetworkSolution sol;
  sol.round_trip = H;
  AsymptoticEnvelope& e = sol.env;
  e.J = J;
  e.dk = dk;
  for (int j = 0; j < np; ++j) {
    e.before.push_back(before[j] * close);
    e.after.push_back(after[j] * close);
  }
  e.exit = exit * close;
  e.out = out * close;
  e.in = Mat::Identity(nc, nc);
  sol.S = e.out;
  return sol;
}

AsymptoticEnvelope build_asymptotic_out(const NetworkSolution& net) {
  return combine(net.env, net.S.adjoint());
}

AsymptoticEnvelope build_asymptotic_out_inverse(const NetworkSolution& net) {
  return combine(net.env, net.S.partialPivLu().inverse());
}

Mat envelope_at(const DeviceSpec& spec, const AsymptoticEnvelope& env, double z) {
  if (z < 0 || z > spec.L_r) throw DomainError("envelope_at: z outside [0, L_r]");
  const auto& pts = spec.layout.points;
  int j = 0;
  while (j + 1 < static_cast<int>(pts.size()) && pts[j + 1].z <= z) ++j;
  Mat st = env.after[j];
  advance_block(spec, env.J, env.dk, pts[j].z, z, st, nullptr);
  if (z > spec.L_c) st.row(0).setZero();
  if (z == spec.L_c) st.row(0) = env.exit;
  return st;
}

Vec2 local_envelope(const DeviceSpec& spec, int J, double dk, int point, const Vec2& start,
                    double z) {
  double za = spec.layout.points[point].z;
  double zb = segment_end(spec, point);
  if (z < za || z > zb) return Vec2::Zero();
  Vec2 s = advance(spec, J, dk, za, z, start);
  if (z > spec.L_c) s(0) = 0.0;
  return s;
}

BasisTransform build_local_transform(const DeviceSpec& spec, int J, double dk) {
  const PhantomLayout& lay = spec.layout;
  const ResonanceSpec& r = spec.res[J];
  const int nc = lay.n_channels();
  const int np = static_cast<int>(lay.points.size());
  const double flux = std::sqrt(r.u / r.v);
  BasisTransform t;
  t.Lin = Mat::Zero(nc, nc);
  t.Lout = Mat::Zero(nc, nc);
  t.anchor.assign(nc, 0);
  t.start.assign(nc, Vec2::Zero());

  if (lay.n_ring == 0) {
    // single channel: the local mode is the asymptotic-in mode itself
    NetworkSolution net = build_asymptotic_in(spec, J, dk);
    t.Lin(0, 0) = 1.0;
    t.Lout(0, 0) = net.S(0, 0);
    t.start[0] = net.env.after[0].col(0);
    t.X = t.Lin;
    t.Xout = t.Lout.inverse();
    return t;
  }

  for (int c = 0; c < nc; ++c) {
    const Channel& ch = lay.channels[c];
    int j = ch.point;
    Vec2 s = Vec2::Zero();
    t.Lin(c, c) = 1.0;
    double sg = lay.sigma[J][c], kp = lay.kappa(J, c);
    switch (ch.kind) {
      case ChannelKind::Waveguide:
        s(0) = 1.0;
        break;
      case ChannelKind::Ring:
        s(1) = -I1 * kp / flux;
        t.Lout(c, c) = sg;
        break;
      case ChannelKind::WgPhantom:
        s(0) = -I1 * kp;
        t.Lout(c, c) = sg;
        break;
    }
    t.anchor[c] = j;
    t.start[c] = s;

    double za = lay.points[j].z, zb = segment_end(spec, j);
    Mat st = s;
    Mat ex = Mat::Zero(1, 1);
    bool crosses = za < spec.L_c && zb >= spec.L_c;
    advance_block(spec, J, dk, za, zb, st, &ex);
    if (crosses) t.Lout(c, 0) += ex(0, 0);

    const CouplingPoint& nx = lay.points[(j + 1) % np];
    int rc = nx.ring_ch;
    double sr = lay.sigma[J][rc], kr = lay.kappa(J, rc);
    if (kr == 0.0) throw ConfigError("phantom channel with zero coupling cannot anchor a local mode");
    cplx a = flux * st(1, 0);
    t.Lin(c, rc) += -I1 * sr * a / kr;
    t.Lout(c, rc) += -I1 * a / kr;
    if (nx.wg_ch > 0) {
      int wc = nx.wg_ch;
      double sw = lay.sigma[J][wc], kw = lay.kappa(J, wc);
      if (kw == 0.0) throw ConfigError("phantom channel with zero coupling cannot anchor a local mode");
      cplx w = st(0, 0);
      t.Lin(c, wc) += -I1 * sw * w / kw;
      t.Lout(c, wc) += -I1 * w / kw;
    }
  }
  t.X = t.Lin.partialPivLu().inverse();
  t.Xout = t.Lout.partialPivLu().inverse();
  return t;
}

Mat commutator_matrix(const Mat& Xinv) { return Xinv.transpose() * Xinv.conjugate(); }

Vec change_basis(const Vec& a, BasisDir dir, const BasisTransform& t) {
  if (a.size() != t.Lin.rows()) throw DomainError("change_basis: dimension mismatch");
  switch (dir) {
    case BasisDir::InToLoc: return t.X.transpose() * a;
    case BasisDir::LocToIn: return t.Lin.transpose() * a;
    case BasisDir::LocToOut: return t.Lout.transpose() * a;
  }
  return a;
}

void dump_envelopes(std::ostream& os, const DeviceSpec& spec, const AsymptoticEnvelope& env,
                    int samples_per_segment) {
  const auto& pts = spec.layout.points;
  int np = static_cast<int>(pts.size());
  os.precision(17);
  for (int j = 0; j < np; ++j) {
    double za = pts[j].z, zb = segment_end(spec, j);
    for (int s = 0; s < samples_per_segment; ++s) {
      double z = za + (zb - za) * s / samples_per_segment;
      Mat st = envelope_at(spec, env, z);
      for (int m = 0; m < st.cols(); ++m) {
        if (z <= spec.L_c)
          os << res_name(env.J) << ',' << env.dk << ',' << m << ",wg," << z << ',' << st(0, m).real()
             << ',' << st(0, m).imag() << '\n';
        os << res_name(env.J) << ',' << env.dk << ',' << m << ",ring," << z << ','
           << st(1, m).real() << ',' << st(1, m).imag() << '\n';
      }
    }
  }
}

}  // namespace ringsq
