#include "ringsq/nonlinear.hpp"

#include "ringsq/errors.hpp"
#include "ringsq/quadrature.hpp"

#include <cmath>

namespace ringsq {

LocalModes local_modes(const DeviceSpec& spec, int J) {
  BasisTransform t = build_local_transform(spec, J, 0.0);
  LocalModes m;
  m.J = J;
  m.anchor = t.anchor;
  m.start = t.start;
  const auto& pts = spec.layout.points;
  for (int j = 0; j < static_cast<int>(pts.size()); ++j) {
    LocalGroup g;
    g.point = j;
    g.z0 = pts[j].z;
    g.z1 = segment_end(spec, j);
    for (int c = 0; c < static_cast<int>(m.anchor.size()); ++c)
      if (m.anchor[c] == j) g.members.push_back(c);
    if (!g.members.empty()) m.groups.push_back(g);
  }
  return m;
}

int combinatorial_factor(const Quad& Jv) { return Jv[0] == Jv[1] ? 2 : 1; }

double nonlinear_strength(const DeviceSpec& spec, const Quad& Jv, Region tau) {
  double w = 1, v = 1;
  for (int J : Jv) {
    w *= spec.res[J].omega;
    v *= spec.res[J].v;
  }
  w = std::pow(w, 0.25);
  v = std::pow(v, 0.25);
  double g = tau == Waveguide ? spec.gamma_wg : spec.gamma_ring;
  return 0.5 * HBAR * w * g * v * v;
}

double carrier_mismatch(const DeviceSpec& spec, const Quad& Jv, Region tau) {
  auto k = [&](int J) { return tau == Waveguide ? spec.res[J].k : spec.res[J].kr; };
  return k(Jv[0]) + k(Jv[1]) - k(Jv[2]) - k(Jv[3]);
}

namespace {

// integrate f over [a, b] split at L_c, restricted to the region
template <class F>
cplx integrate_region(const DeviceSpec& spec, double a, double b, Region tau, int nodes, F&& f) {
  if (tau == Waveguide) b = std::min(b, spec.L_c);
  if (b <= a) return 0.0;
  std::vector<std::pair<double, double>> pieces;
  if (a < spec.L_c && b > spec.L_c) {
    pieces = {{a, spec.L_c}, {spec.L_c, b}};
  } else {
    pieces = {{a, b}};
  }
  const GaussRule& r = gauss_legendre(nodes);
  cplx acc = 0;
  for (auto [lo, hi] : pieces) {
    double h = 0.5 * (hi - lo), c = 0.5 * (hi + lo);
    for (int i = 0; i < nodes; ++i) acc += r.w[i] * h * f(c + h * r.x[i]);
  }
  return acc;
}

cplx overlap_impl(const DeviceSpec& spec, const std::array<const LocalModes*, 4>& m,
                  const Quad& nv, Region tau, const std::array<double, 4>& dks, int nodes) {
  int pt = m[0]->anchor[nv[0]];
  for (int i = 1; i < 4; ++i)
    if (m[i]->anchor[nv[i]] != pt) return 0.0;
  double z0 = spec.layout.points[pt].z, z1 = segment_end(spec, pt);
  Quad Jv{m[0]->J, m[1]->J, m[2]->J, m[3]->J};
  double dk0 = carrier_mismatch(spec, Jv, tau);
  auto f = [&](double z) {
    cplx h[4];
    for (int i = 0; i < 4; ++i)
      h[i] = local_envelope(spec, Jv[i], dks[i], pt, m[i]->start[nv[i]], z)(tau);
    return std::conj(h[0]) * std::conj(h[1]) * h[2] * h[3] * expi(-dk0 * (z - z0));
  };
  return integrate_region(spec, z0, z1, tau, nodes, f);
}

}  // namespace

cplx segment_overlap(const DeviceSpec& spec, const std::array<const LocalModes*, 4>& m,
                     const Quad& nv, Region tau, int nodes) {
  return overlap_impl(spec, m, nv, tau, {0, 0, 0, 0}, nodes);
}

cplx segment_overlap_exact(const DeviceSpec& spec, const std::array<const LocalModes*, 4>& m,
                           const Quad& nv, Region tau, const std::array<double, 4>& dks,
                           int nodes) {
  return overlap_impl(spec, m, nv, tau, dks, nodes);
}

cplx effective_coupling(const DeviceSpec& spec, const std::array<const LocalModes*, 4>& m,
                        const Quad& Jv, const Quad& nv, int m_out, const Mat& C, Region tau) {
  double zn = spec.layout.points[m[0]->anchor[nv[0]]].z;
  return static_cast<double>(combinatorial_factor(Jv)) * nonlinear_strength(spec, Jv, tau) *
         segment_overlap(spec, m, nv, tau) * C(m_out, nv[0]) *
         expi(-carrier_mismatch(spec, Jv, tau) * zn);
}

CouplingTensor build_coupling_tensor(const DeviceSpec& spec, int nodes) {
  LocalModes ms = local_modes(spec, S), mp = local_modes(spec, P), mi = local_modes(spec, I);
  CouplingTensor t;
  t.n = spec.n_channels();
  t.groups = mp.groups;
  const double inv = 1.0 / (4 * PI * PI);
  auto table = [&](const std::array<const LocalModes*, 4>& m, const Quad& Jv, double mult,
                   const LocalGroup& g) {
    std::array<cplx, 16> out{};
    int s = static_cast<int>(g.members.size());
    for (int a = 0; a < s; ++a)
      for (int b = 0; b < s; ++b)
        for (int c = 0; c < s; ++c)
          for (int d = 0; d < s; ++d) {
            Quad nv{g.members[a], g.members[b], g.members[c], g.members[d]};
            cplx acc = 0;
            for (Region tau : {Waveguide, Ring})
              acc += nonlinear_strength(spec, Jv, tau) * segment_overlap(spec, m, nv, tau, nodes) *
                     expi(-carrier_mismatch(spec, Jv, tau) * g.z0);
            out[a * 8 + b * 4 + c * 2 + d] = mult * inv * acc;
          }
    return out;
  };
  for (const LocalGroup& g : t.groups) {
    // XPM collects the four orderings with the field in a creation slot,
    // SFWM the two orderings of the pair, SPM the two creation slots
    t.xpm_s.push_back(table({&ms, &mp, &ms, &mp}, {S, P, S, P}, 4.0, g));
    t.xpm_i.push_back(table({&mi, &mp, &mi, &mp}, {I, P, I, P}, 4.0, g));
    t.sfwm.push_back(table({&ms, &mi, &mp, &mp}, {S, I, P, P}, 2.0, g));
    t.spm.push_back(table({&mp, &mp, &mp, &mp}, {P, P, P, P}, 2.0, g));
  }
  t.ring_gram = Mat::Zero(t.n, t.n);
  for (const LocalGroup& g : t.groups)
    for (int a : g.members)
      for (int b : g.members)
        t.ring_gram(a, b) = integrate_region(spec, g.z0, g.z1, Ring, nodes, [&](double z) {
          Vec2 ha = local_envelope(spec, P, 0.0, g.point, mp.start[a], z);
          Vec2 hb = local_envelope(spec, P, 0.0, g.point, mp.start[b], z);
          return std::conj(ha(1)) * hb(1);
        });
  return t;
}

PumpKernels pump_kernels(const CouplingTensor& t, const Vec& q, bool xpm) {
  PumpKernels k;
  k.KS = Mat::Zero(t.n, t.n);
  k.KI = Mat::Zero(t.n, t.n);
  k.P = Mat::Zero(t.n, t.n);
  for (std::size_t gi = 0; gi < t.groups.size(); ++gi) {
    const auto& mem = t.groups[gi].members;
    int s = static_cast<int>(mem.size());
    for (int a = 0; a < s; ++a)
      for (int c = 0; c < s; ++c) {
        cplx ks = 0, ki = 0, p = 0;
        for (int b = 0; b < s; ++b)
          for (int d = 0; d < s; ++d) {
            int idx = a * 8 + b * 4 + c * 2 + d;
            cplx qq = std::conj(q(mem[b])) * q(mem[d]);
            ks += t.xpm_s[gi][idx] * qq;
            ki += t.xpm_i[gi][idx] * qq;
            // pair term: (a, c) are the signal and idler slots here
            p += t.sfwm[gi][a * 8 + c * 4 + b * 2 + d] * q(mem[b]) * q(mem[d]);
          }
        if (xpm) {
          k.KS(mem[a], mem[c]) = ks;
          k.KI(mem[a], mem[c]) = ki;
        }
        k.P(mem[a], mem[c]) = p;
      }
  }
  return k;
}

Vec spm_drive(const CouplingTensor& t, const Vec& q) {
  Vec s = Vec::Zero(t.n);
  for (std::size_t gi = 0; gi < t.groups.size(); ++gi) {
    const auto& mem = t.groups[gi].members;
    int n = static_cast<int>(mem.size());
    for (int a = 0; a < n; ++a) {
      cplx acc = 0;
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d)
            acc += t.spm[gi][a * 8 + b * 4 + c * 2 + d] * std::conj(q(mem[b])) * q(mem[c]) *
                   q(mem[d]);
      s(mem[a]) = acc;
    }
  }
  return s;
}

SpatialGrid make_spatial_grid(const DeviceSpec& spec, int pieces_ring, int pieces_coupler,
                              int nodes) {
  const GaussRule& r = gauss_legendre(nodes);
  std::vector<double> z, w;
  std::vector<int> reg;
  auto add = [&](double a, double b, int pieces, int region) {
    double h = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
      double lo = a + p * h;
      for (int i = 0; i < nodes; ++i) {
        z.push_back(lo + 0.5 * h * (1 + r.x[i]));
        w.push_back(0.5 * h * r.w[i]);
        reg.push_back(region);
      }
    }
  };
  add(0, spec.L_c, pieces_coupler, Waveguide);
  add(0, spec.L_c, pieces_coupler, Ring);
  if (spec.L_c < spec.L_r) add(spec.L_c, spec.L_r, pieces_ring, Ring);
  SpatialGrid g;
  g.z = Eigen::Map<RVec>(z.data(), z.size());
  g.w = Eigen::Map<RVec>(w.data(), w.size());
  g.region = reg;
  return g;
}

Mat spatial_envelopes(const DeviceSpec& spec, int J, const std::vector<double>& dks,
                      const SpatialGrid& g) {
  Mat H(g.z.size(), dks.size());
  for (std::size_t i = 0; i < dks.size(); ++i) {
    NetworkSolution net = build_asymptotic_in(spec, J, dks[i]);
    for (Eigen::Index n = 0; n < g.z.size(); ++n)
      H(n, i) = envelope_at(spec, net.env, g.z(n))(g.region[n], 0);
  }
  return H;
}

DenseCoupling build_dense_coupling(const DeviceSpec& spec, const std::vector<double>& dS,
                                   const std::vector<double>& dI, const std::vector<double>& dP) {
  DenseCoupling d;
  d.grid = make_spatial_grid(spec);
  const SpatialGrid& g = d.grid;
  Eigen::Index nz = g.z.size();
  d.lam_xpm_s.resize(nz);
  d.lam_xpm_i.resize(nz);
  d.lam_sfwm.resize(nz);
  d.lam_spm.resize(nz);
  d.sfwm_phase.resize(nz);
  const double inv = 1.0 / (4 * PI * PI);
  for (Eigen::Index n = 0; n < nz; ++n) {
    Region tau = static_cast<Region>(g.region[n]);
    d.lam_xpm_s(n) = 4 * inv * g.w(n) * nonlinear_strength(spec, {S, P, S, P}, tau);
    d.lam_xpm_i(n) = 4 * inv * g.w(n) * nonlinear_strength(spec, {I, P, I, P}, tau);
    d.lam_sfwm(n) = 2 * inv * g.w(n) * nonlinear_strength(spec, {S, I, P, P}, tau);
    d.lam_spm(n) = 2 * inv * g.w(n) * nonlinear_strength(spec, {P, P, P, P}, tau);
    d.sfwm_phase(n) = expi(-carrier_mismatch(spec, {S, I, P, P}, tau) * g.z(n));
  }
  d.HS = spatial_envelopes(spec, S, dS, g);
  d.HI = spatial_envelopes(spec, I, dI, g);
  d.HP = spatial_envelopes(spec, P, dP, g);
  return d;
}

Vec pump_profile(const DenseCoupling& d, const Vec& alpha, double dkP) {
  return dkP * (d.HP * alpha);
}

PumpKernels dense_kernels(const DenseCoupling& d, const Vec& Q, bool xpm) {
  PumpKernels k;
  RVec I2 = Q.cwiseAbs2();
  if (xpm) {
    k.KS = d.HS.adjoint() * (d.lam_xpm_s.cwiseProduct(I2)).asDiagonal() * d.HS;
    k.KI = d.HI.adjoint() * (d.lam_xpm_i.cwiseProduct(I2)).asDiagonal() * d.HI;
  } else {
    k.KS = Mat::Zero(d.HS.cols(), d.HS.cols());
    k.KI = Mat::Zero(d.HI.cols(), d.HI.cols());
  }
  Vec w = d.lam_sfwm.cast<cplx>().cwiseProduct(d.sfwm_phase).cwiseProduct(Q.cwiseProduct(Q));
  k.P = d.HS.adjoint() * w.asDiagonal() * d.HI.conjugate();
  return k;
}

Vec dense_spm_drive(const DenseCoupling& d, const Vec& Q) {
  Vec w = d.lam_spm.cast<cplx>().cwiseProduct(Q.cwiseAbs2().cast<cplx>()).cwiseProduct(Q);
  return d.HP.adjoint() * w;
}

}  // namespace ringsq
