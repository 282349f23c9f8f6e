#include "ringsq/oracles.hpp"

#include "ringsq/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <map>

namespace ringsq {

OracleReport compare(const std::string& oracle, const std::string& quantity, double main,
                     double reference, double tolerance, bool absolute) {
  OracleReport r;
  r.oracle = oracle;
  r.quantity = quantity;
  r.main = main;
  r.reference = reference;
  r.tolerance = tolerance;
  r.absolute = absolute;
  double diff = std::abs(main - reference);
  r.deviation = absolute ? diff : diff / std::max(std::abs(reference), 1e-300);
  r.pass = tolerance <= 0 || r.deviation <= tolerance;
  return r;
}

FirstOrderPairs first_order_pairs(const SqueezeEngine& eng, double t0, double t1, double h,
                                  double tau) {
  const int nk = eng.bins(), n = eng.channels();
  const RVec& wS = eng.signal_detuning();
  const RVec& wI = eng.idler_detuning();
  if (!(h > 0)) {
    double wmax = wS.cwiseAbs().maxCoeff() + wI.cwiseAbs().maxCoeff();
    h = wmax > 0 ? 0.05 / wmax : (t1 - t0) / 100;
    if (tau > 0) h = std::min(h, tau / 40);
  }
  int ns = std::max(2, static_cast<int>(std::ceil((t1 - t0) / h)));
  if (ns % 2) ++ns;
  h = (t1 - t0) / ns;

  // distinct pair frequencies wS_i + wI_j
  const double quantum = 1e-9 * (wS.cwiseAbs().maxCoeff() + wI.cwiseAbs().maxCoeff()) + 1e-300;
  std::map<long long, int> index;
  std::vector<double> freqs;
  std::vector<int> slot(static_cast<size_t>(nk) * nk);
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nk; ++j) {
      double w = wS(i) + wI(j);
      long long key = std::llround(w / quantum);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, static_cast<int>(freqs.size())).first;
        freqs.push_back(w);
      }
      slot[static_cast<size_t>(i) * nk + j] = it->second;
    }

  const bool dense = eng.dense();
  const int m = dense ? nk : n;
  // dense: one accumulator per bin pair; local: one n x n block per frequency
  std::vector<Mat> F(dense ? 1 : freqs.size(), Mat::Zero(m, m));
  for (int s = 0; s <= ns; ++s) {
    double t = t0 + s * h;
    double wq = (s == 0 || s == ns) ? 1.0 : (s % 2 ? 4.0 : 2.0);
    wq *= h / 3;
    Mat B = eng.coupling_block(t);
    Mat Pm = B.topRightCorner(m, m);
    if (dense) {
      for (int i = 0; i < nk; ++i)
        for (int j = 0; j < nk; ++j) F[0](i, j) += wq * expi((wS(i) + wI(j)) * t) * Pm(i, j);
    } else {
      for (size_t f = 0; f < freqs.size(); ++f) F[f] += (wq * expi(freqs[f] * t)) * Pm;
    }
  }
  const cplx pre = I1 * eng.bin_width();
  const WindowBasis& bs = eng.signal_basis();
  const WindowBasis& bi = eng.idler_basis();
  double total = 0;
  if (dense) {
    for (int i = 0; i < nk; ++i)
      for (int j = 0; j < nk; ++j) total += std::norm(bs.Lout[i](0, 0) * pre * F[0](i, j));
  } else {
    for (int i = 0; i < nk; ++i) {
      Mat left = bs.Lout[i].transpose() * bs.C[i];
      for (int j = 0; j < nk; ++j)
        total += (pre * left * F[slot[static_cast<size_t>(i) * nk + j]] * bi.X[j].adjoint()).squaredNorm();
    }
  }
  FirstOrderPairs r;
  r.n_tot = total;
  if (total >= 1e-2) {
    r.valid = false;
    r.warning = "first-order pair estimate " + std::to_string(total) + " is outside its validity range";
  }
  return r;
}

OutTransfer direct_ode_reference(const SqueezeEngine& eng, double t0, double t1, double tol) {
  const int d = eng.dim();
  if (d > 96) throw DomainError("direct ODE reference is limited to state dimension 96");
  using State = std::vector<cplx>;
  Mat x0 = eng.phases(t0).asDiagonal() * eng.initial_state();
  State x(x0.data(), x0.data() + x0.size());
  auto rhs = [&](const State& y, State& dy, double t) {
    Mat G = eng.full_generator(t);
    Eigen::Map<const Mat> Y(y.data(), d, d);
    dy.resize(y.size());
    Eigen::Map<Mat> DY(dy.data(), d, d);
    DY.noalias() = G * Y;
  };
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_fehlberg78<State>());
  double h0 = std::max(1e-6 * (t1 - t0), 1e-9);
  ode::integrate_adaptive(stepper, rhs, x, t0, t1, h0);
  Eigen::Map<Mat> X(x.data(), d, d);
  RowMat xi = eng.phases(t1).conjugate().asDiagonal() * X;
  return eng.to_out(xi);
}

CmioDevice cmio_device(const DeviceSpec& spec) {
  CmioDevice d;
  for (int J : {S, P, I}) d.gamma[J] = figures_of_merit(spec, J).gamma_rad;
  d.eta = figures_of_merit(spec, P).eta_esc;
  const double L = spec.L_r;
  d.g_spm = 2 * nonlinear_strength(spec, {P, P, P, P}, Ring) / L;
  d.g_xpm_s = 4 * nonlinear_strength(spec, {S, P, S, P}, Ring) / L;
  d.g_xpm_i = 4 * nonlinear_strength(spec, {I, P, I, P}, Ring) / L;
  d.g_sfwm = 2 * nonlinear_strength(spec, {S, I, P, P}, Ring) / L;
  return d;
}

std::function<cplx(double)> window_flux(const ResonanceWindow& win, const Vec& alpha_in, double v,
                                        double centre) {
  const double pre = std::sqrt(v / (2 * PI)) * win.dk;
  std::vector<double> w(win.nk);
  for (int i = 0; i < win.nk; ++i) w[i] = v * win.offsets[i];
  Vec a = alpha_in;
  // a sampled window repeats every recurrence time; keep only the copy around the pulse
  const double half = std::isnan(centre) ? std::numeric_limits<double>::infinity() : PI / (v * win.dk);
  return [pre, w, a, centre, half](double t) {
    if (std::abs(t - centre) > half) return cplx(0);
    cplx s = 0;
    for (size_t i = 0; i < w.size(); ++i) s += a(static_cast<Eigen::Index>(i)) * expi(-w[i] * t);
    return pre * s;
  };
}

namespace {

using M2 = Eigen::Matrix2cd;

M2 pair_generator(const CmioDevice& d, cplx bp, bool spm_xpm) {
  const double np = std::norm(bp);
  const double xs = spm_xpm ? d.g_xpm_s * np : 0.0, xi = spm_xpm ? d.g_xpm_i * np : 0.0;
  const cplx g = d.g_sfwm * bp * bp;
  M2 A;
  A << -d.gamma[S] + I1 * xs, I1 * g, -I1 * std::conj(g), -d.gamma[I] - I1 * xi;
  return A;
}

}  // namespace

CmioPulsed cmio_pulsed(const CmioDevice& d, const std::function<cplx(double)>& flux, double t_end,
                       double dt, bool spm_xpm) {
  const int T = std::max(1, static_cast<int>(std::ceil(t_end / dt - 1e-9)));
  dt = t_end / T;
  // pump ring amplitude at bin midpoints, RK4 with four substeps per bin
  const double kp = std::sqrt(2 * d.eta * d.gamma[P]);
  auto f = [&](double t, cplx b) {
    cplx r = -d.gamma[P] * b - kp * flux(t);
    if (spm_xpm) r += I1 * d.g_spm * std::norm(b) * b;
    return r;
  };
  std::vector<cplx> mid(T);
  cplx b = 0;
  const double h = dt / 4;
  for (int n = 0; n < T; ++n) {
    for (int s = 0; s < 4; ++s) {
      double t = n * dt + s * h;
      cplx k1 = f(t, b), k2 = f(t + h / 2, b + h / 2 * k1), k3 = f(t + h / 2, b + h / 2 * k2),
           k4 = f(t + h, b + h * k3);
      b += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (s == 1) mid[n] = b;
    }
  }

  // Signal / idler-dagger pair driven by the combined (waveguide + loss) noise
  // time bins e_S,n and e_I,n^dagger. x = (b_S, b_I^dagger) coefficients.
  // Column 0 is the ring's own vacuum at t = 0, column n + 1 is bin n.
  const double D0 = -std::sqrt(2 * d.gamma[S]), D1 = -std::sqrt(2 * d.gamma[I]);
  const int cols = T + 1;
  Mat U = Mat::Zero(2, cols), W = Mat::Zero(2, cols);  // on e_S and on e_I^dagger
  U(0, 0) = 1;
  W(1, 0) = 1;
  Mat ubar0(T, cols), wbar0(T, cols), ubar1(T, cols);
  double in_S = 0, in_I = 0;
  for (int n = 0; n < T; ++n) {
    M2 A = pair_generator(d, mid[n], spm_xpm);
    Eigen::Matrix<cplx, 6, 6> aug = Eigen::Matrix<cplx, 6, 6>::Zero();
    aug.block<2, 2>(0, 0) = A * dt;
    aug.block<2, 2>(0, 2) = M2::Identity() * dt;
    aug.block<2, 2>(2, 4) = M2::Identity() * dt;
    Eigen::Matrix<cplx, 6, 6> ex = aug.exp();
    M2 Phi = ex.block<2, 2>(0, 0);
    M2 Psi = ex.block<2, 2>(0, 2);  // int_0^dt e^{As} ds
    M2 Xi = ex.block<2, 2>(0, 4);   // int_0^dt (dt - s) e^{As} ds
    const double rs = 1 / std::sqrt(dt);
    Eigen::Vector2cd nS = Eigen::Vector2cd(D0 * rs, 0), nI = Eigen::Vector2cd(0, D1 * rs);
    // bin averages
    const int k = n + 1;
    Mat Ub = Psi * U.leftCols(k) / dt, Wb = Psi * W.leftCols(k) / dt;
    Eigen::Vector2cd us = Xi * nS / dt, wi = Xi * nI / dt;
    ubar0.row(n).setZero();
    wbar0.row(n).setZero();
    ubar1.row(n).setZero();
    ubar0.row(n).head(k) = Ub.row(0);
    wbar0.row(n).head(k) = Wb.row(0);
    ubar1.row(n).head(k) = Ub.row(1);
    ubar0(n, k) = us(0);
    wbar0(n, k) = wi(0);
    ubar1(n, k) = us(1);
    in_S += 2 * d.gamma[S] * dt * wbar0.row(n).squaredNorm();
    in_I += 2 * d.gamma[I] * dt * ubar1.row(n).squaredNorm();
    // advance
    U.leftCols(k) = Phi * U.leftCols(k);
    W.leftCols(k) = Phi * W.leftCols(k);
    U.col(k) = Psi * nS;
    W.col(k) = Psi * nI;
  }
  MomentMatrices m;
  m.nk = T;
  const double cs = std::sqrt(2 * d.eta * d.gamma[S] * dt), ci = std::sqrt(2 * d.eta * d.gamma[I] * dt);
  Mat WS = cs * wbar0;
  Mat WI = ci * ubar1.conjugate();
  Mat VS = cs * ubar0;
  for (int n = 0; n < T; ++n) VS(n, n + 1) += std::sqrt(d.eta);
  m.NSS = WS.conjugate() * WS.transpose();
  m.NII = WI.conjugate() * WI.transpose();
  m.MSI = VS * WI.transpose();
  m.MIS = m.MSI.transpose();
  CmioPulsed r;
  r.bins = T;
  r.n_out = m.NSS.trace().real();
  r.n_tot = in_S + W.row(0).squaredNorm();
  (void)in_I;
  // no pump inside the horizon leaves nothing to correlate
  if (!(r.n_out > 0)) {
    r.g2_S = r.g2_I = r.g11 = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  Correlations c = correlations(m);
  r.g2_S = c.g2_S;
  r.g2_I = c.g2_I;
  r.g11 = c.g11;
  return r;
}

CmioCw cmio_cw(const CmioDevice& d, const DeviceSpec& spec, double power,
               const std::vector<double>& omega, bool spm_xpm) {
  const double flux2 = power / (HBAR * spec.res[P].omega);  // photons per ps
  const double kp2 = 2 * d.eta * d.gamma[P];
  const double gp = d.gamma[P];
  // |b|^2 (gp^2 + g^2 |b|^4) = kp2 flux2
  double nb = kp2 * flux2 / (gp * gp);
  if (spm_xpm && d.g_spm > 0 && nb > 0) {
    auto eq = [&](double x) { return x * (gp * gp + d.g_spm * d.g_spm * x * x) - kp2 * flux2; };
    std::uintmax_t it = 200;
    auto root = boost::math::tools::toms748_solve(eq, 0.0, nb, boost::math::tools::eps_tolerance<double>(52), it);
    nb = 0.5 * (root.first + root.second);
  }
  const cplx bp = std::sqrt(nb);  // overall pump phase drops out of every observable
  M2 A = pair_generator(d, bp, spm_xpm);
  const double D0 = -std::sqrt(2 * d.gamma[S]), D1 = -std::sqrt(2 * d.gamma[I]);
  const double cs = std::sqrt(2 * d.eta * d.gamma[S]), ci = std::sqrt(2 * d.eta * d.gamma[I]);
  auto G = [&](double w) -> M2 { return (-I1 * w * M2::Identity() - A).inverse(); };
  auto nS = [&](double w) { return cs * cs * D1 * D1 * std::norm(G(w)(0, 1)); };
  auto nI = [&](double w) { return ci * ci * D0 * D0 * std::norm(G(-w)(1, 0)); };
  auto mSI = [&](double w) {
    M2 g = G(w);
    return (std::sqrt(d.eta) + cs * g(0, 0) * D0) * ci * std::conj(g(1, 0)) * D0;
  };
  CmioCw r;
  r.ring_photons = nb;
  const size_t n = omega.size();
  r.densities.omega.resize(n);
  r.densities.nS.resize(n);
  r.densities.nI.resize(n);
  r.densities.mSI.resize(n);
  r.densities.mIS.resize(n);
  for (size_t k = 0; k < n; ++k) {
    const double w = omega[k];
    r.densities.omega(k) = w;
    r.densities.nS(k) = nS(w);
    r.densities.nI(k) = nI(w);
    r.densities.mSI(k) = mSI(w);
    r.densities.mIS(k) = mSI(-w);
  }
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  double out = gauss_kronrod<double, 61>::integrate(nS, -inf, inf, 15, 1e-10) / (2 * PI);
  r.rate_out = out * 1e12;
  r.rate_total = out / d.eta * 1e12;
  return r;
}

}  // namespace ringsq
