#include "ringsq/device.hpp"

#include "ringsq/coupler.hpp"
#include "ringsq/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <string>

namespace ringsq {

const char* res_name(int J) {
  switch (J) {
    case S: return "S";
    case P: return "P";
    case I: return "I";
  }
  return "?";
}

double PhantomLayout::kappa(int J, int ch) const {
  double s = sigma[J][ch];
  return std::sqrt(std::max(0.0, 1.0 - s * s));
}

double PhantomLayout::xi(int J) const {
  double x = 1.0;
  for (const auto& pt : points)
    if (pt.ring_ch >= 0) x *= sigma[J][pt.ring_ch];
  return x;
}

PhantomLayout make_layout(double L_r, double L_c, int n_ring, int n_res, double sigma_ph) {
  if (n_ring < 0) throw ConfigError("phantom count must be >= 0");
  PhantomLayout lay;
  lay.n_ring = n_ring;
  lay.channels.push_back({ChannelKind::Waveguide, 0});
  if (n_ring == 0) {
    lay.points.push_back({0.0, -1, 0});
  } else {
    for (int j = 0; j < n_ring; ++j) {
      double z = j * L_r / n_ring;
      if (std::abs(z - L_c) < 1e-9 * L_r) z = L_c;
      CouplingPoint pt{z, -1, j == 0 ? 0 : -1};
      pt.ring_ch = static_cast<int>(lay.channels.size());
      lay.channels.push_back({ChannelKind::Ring, j});
      if (z > 0 && z < L_c) {
        pt.wg_ch = static_cast<int>(lay.channels.size());
        lay.channels.push_back({ChannelKind::WgPhantom, j});
      }
      lay.points.push_back(pt);
    }
  }
  lay.sigma.assign(n_res, std::vector<double>(lay.channels.size(), sigma_ph));
  for (auto& s : lay.sigma) s[0] = 1.0;
  return lay;
}

double DeviceSpec::alpha0(int J) const {
  return omega_c / std::sqrt(res[J].v * res[J].u);
}

std::vector<ResonanceSpec> nearest_neighbor_resonances(double lambda_um, double n_e, double v,
                                                       double R_e) {
  if (!(lambda_um > 0 && n_e > 0 && v > 0 && R_e > 0))
    throw ConfigError("nearest_neighbor_resonances: parameters must be positive");
  double L_r = 2 * PI * R_e;
  double m = std::round(n_e * L_r / lambda_um);
  double kp = 2 * PI * m / L_r;
  double wp = kp * C_LIGHT / n_e;
  std::vector<ResonanceSpec> out(3);
  const char labels[3] = {'S', 'P', 'I'};
  const double sign[3] = {1.0, 0.0, -1.0};
  for (int J = 0; J < 3; ++J) {
    ResonanceSpec& r = out[J];
    r.label = labels[J];
    r.omega = wp + sign[J] * v / R_e;
    r.k = kp + sign[J] / R_e;
    r.kr = r.k;
    r.v = v;
    r.u = v;
  }
  return out;
}

PathLength map_path(const DeviceSpec& spec, int J, double z) {
  if (z < 0 || z > spec.L_r * (1 + 1e-12))
    throw DomainError("map_path: z outside [0, L_r]");
  const ResonanceSpec& r = spec.res[J];
  double q = r.v / r.u;
  auto l_of = [&](double x) {
    if (x <= spec.L_c) return 0.5 * (1 + q) * x;
    return q * x - 0.5 * (q - 1) * spec.L_c;
  };
  return {l_of(z), l_of(spec.L_r)};
}

namespace {

double rho_from_finesse(double F) {
  // F = pi sqrt(rho) / (1 - rho) is a quadratic in sqrt(rho)
  double s = (-PI + std::sqrt(PI * PI + 4 * F * F)) / (2 * F);
  return s * s;
}

}  // namespace

Calibration calibrate_coupling(double finesse, double eta, int n_ring, int branch,
                               const ResonanceSpec& res, double L_c) {
  if (!(finesse > 1)) throw InfeasibleTarget("finesse must exceed 1");
  if (!(eta > 0 && eta <= 1)) throw InfeasibleTarget("escape efficiency must lie in (0, 1]");
  if (branch < 0) throw ConfigError("branch must be >= 0");
  Calibration c;
  c.rho = rho_from_finesse(finesse);
  if (!(c.rho > 0 && c.rho < 1)) throw InfeasibleTarget("no round-trip factor for this finesse");
  c.xi = std::sqrt(eta + c.rho * c.rho * (1 - eta));
  c.sigma_bar = c.rho / c.xi;
  c.sigma_ph = n_ring > 0 ? std::pow(c.xi, 1.0 / n_ring) : 1.0;

  double mu = 0.5 * res.dbeta();
  double target = 1 - c.sigma_bar * c.sigma_bar;
  auto f = [&](double a) {
    double s = std::sin(a * L_c);
    double m = mu == 0 ? 0.0 : mu * mu / (a * a);
    return (1 - m) * s * s - target;
  };
  double lo = std::max(std::abs(mu), 2 * PI * branch / L_c);
  double hi = (2 * PI * branch + 0.5 * PI) / L_c;
  if (lo <= 0) lo = 1e-12 / L_c;
  double flo = f(lo), fhi = f(hi);
  if (flo > 0 || fhi < 0) throw InfeasibleTarget("coupler cannot reach the required cross-coupling");
  double a;
  if (fhi == 0) {
    a = hi;
  } else {
    boost::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    auto br = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    a = 0.5 * (br.first + br.second);
  }
  c.alpha0 = std::sqrt(std::max(0.0, a * a - mu * mu));
  c.omega_c = c.alpha0 * std::sqrt(res.v * res.u);
  return c;
}

FiguresOfMerit figures_of_merit(const DeviceSpec& spec, int J) {
  CouplerEnvelope e = coupler_envelopes(spec, J, spec.L_c, 0.0);
  FiguresOfMerit f;
  f.sigma_bar = std::abs(e.sigma);
  f.xi = spec.layout.xi(J);
  double rho = f.sigma_bar * f.xi;
  if (rho >= 1) throw UnphysicalDevice("round-trip factor >= 1");
  double Lt = map_path(spec, J, spec.L_r).Ltilde;
  double rate = spec.res[J].v / (2 * PI * Lt) * (1 - rho) / std::sqrt(rho);  // 1/ps
  f.gamma_hz = rate * 1e12;
  f.gamma_rad = 2 * PI * rate;
  f.finesse = PI * std::sqrt(rho) / (1 - rho);
  double s2 = f.sigma_bar * f.sigma_bar, x2 = f.xi * f.xi;
  f.eta_esc = (1 - s2) * x2 / (1 - s2 * x2);
  double k2 = std::norm(e.kappa);
  f.peak_enhancement = k2 / ((1 - rho) * (1 - rho));
  return f;
}

double enhancement(const DeviceSpec& spec, int J, double dk) {
  CouplerEnvelope e = coupler_envelopes(spec, J, spec.L_c, dk);
  double Lt = map_path(spec, J, spec.L_r).Ltilde;
  cplx den = one_minus_rotated(std::conj(e.sigma) * spec.layout.xi(J), dk * Lt);
  return std::norm(e.kappa) / std::norm(den);
}

ResonanceWindow make_window(int J, double k0, double half_width, int nk) {
  if (nk < 3 || nk % 2 == 0) throw ConfigError("N_k must be odd and >= 3");
  if (!(half_width > 0)) throw ConfigError("window half-width must be positive");
  ResonanceWindow w;
  w.J = J;
  w.k0 = k0;
  w.nk = nk;
  w.dk = 2 * half_width / (nk - 1);
  int c = nk / 2;
  for (int i = 0; i < nk; ++i) w.offsets.push_back((i - c) * w.dk);
  return w;
}

ResonanceWindow build_k_grid(const DeviceSpec& spec, int J, double n_r, int nk) {
  if (!(n_r > 0)) throw ConfigError("n_r must be positive");
  FiguresOfMerit f = figures_of_merit(spec, J);
  const ResonanceSpec& r = spec.res[J];
  double half = n_r * f.gamma_rad / r.v;
  double fsr_k = 2 * PI / map_path(spec, J, spec.L_r).Ltilde;
  if (half >= 0.5 * fsr_k)
    throw ConfigError("resonance window reaches half a free spectral range; reduce n_r");
  return make_window(J, r.k, half, nk);
}

DeviceSpec build_device(const DeviceParams& p) {
  if (!(p.R_e > 0)) throw ConfigError("R_e must be positive");
  if (!(p.L_c_fraction > 0 && p.L_c_fraction <= 1)) throw ConfigError("L_c fraction must lie in (0, 1]");
  if (!(p.u_over_v > 0)) throw ConfigError("u/v must be positive");
  if (!(p.gamma_nl >= 0)) throw ConfigError("gamma_nl must be >= 0");
  DeviceSpec d;
  d.L_r = 2 * PI * p.R_e;
  d.L_c = p.L_c_fraction * d.L_r;
  d.branch = p.branch;
  d.res = nearest_neighbor_resonances(p.lambda_um, p.n_e, p.v, p.R_e);
  for (auto& r : d.res) {
    r.u = p.u_over_v * r.v;
    r.k = r.kr + p.dbeta;
  }
  int n_ring = p.eta_esc >= 1.0 ? 0 : p.n_ring;
  if (p.eta_esc < 1.0 && n_ring < 1) throw ConfigError("lossy device needs at least one phantom");
  Calibration c = calibrate_coupling(p.finesse, p.eta_esc, n_ring, p.branch, d.res[P], d.L_c);
  d.omega_c = c.omega_c;
  d.layout = make_layout(d.L_r, d.L_c, n_ring, 3, c.sigma_ph);
  if (!p.sigma_override.empty()) {
    if (static_cast<int>(p.sigma_override.size()) != d.n_channels() - 1)
      throw ConfigError("sigma override needs " + std::to_string(d.n_channels() - 1) + " entries");
    for (double s : p.sigma_override)
      if (!(s > 0 && s <= 1)) throw ConfigError("phantom sigma must lie in (0, 1]");
    for (auto& row : d.layout.sigma)
      for (int ch = 1; ch < d.n_channels(); ++ch) row[ch] = p.sigma_override[ch - 1];
  }
  d.gamma_wg = p.gamma_nl * PER_W_M;
  d.gamma_ring = p.gamma_nl * PER_W_M;
  return d;
}

}  // namespace ringsq
