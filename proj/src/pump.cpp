#include "ringsq/pump.hpp"

#include "ringsq/errors.hpp"

#include <cmath>
#include <string>

namespace ringsq {

ResonanceWindow pump_window(const DeviceSpec& spec, const PumpDrive& drive,
                            const ResonanceWindow& si, double half_width) {
  const ResonanceSpec& r = spec.res[P];
  double pulse_bw = drive.kind == PumpDrive::Gaussian ? 4.0 / (r.v * drive.tau) : 0.0;
  double half;
  if (half_width > 0) {
    if (half_width < pulse_bw)
      throw ConfigError("pump window narrower than four pulse bandwidths");
    half = half_width;
  } else {
    half = std::max(si.offsets.back(), pulse_bw);
  }
  half = std::max(half, std::abs(drive.k0_offset) + (drive.kind == PumpDrive::Gaussian ? pulse_bw : 0.0));
  double fsr_k = 2 * PI / map_path(spec, P, spec.L_r).Ltilde;
  if (half >= 0.5 * fsr_k) throw ConfigError("pump window reaches half a free spectral range");
  int n_half = static_cast<int>(std::ceil(half / si.dk - 1e-9));
  n_half = std::max(n_half, 1);
  return make_window(P, r.k, n_half * std::min(si.dk, half / n_half), 2 * n_half + 1);
}

WindowBasis window_basis(const DeviceSpec& spec, const ResonanceWindow& win) {
  WindowBasis wb;
  wb.win = win;
  int n = spec.n_channels();
  wb.Cstack.resize(static_cast<Eigen::Index>(win.nk) * n, n);
  for (int i = 0; i < win.nk; ++i) {
    BasisTransform t = build_local_transform(spec, win.J, win.offsets[i]);
    wb.X.push_back(t.X);
    wb.Lin.push_back(t.Lin);
    wb.Lout.push_back(t.Lout);
    wb.C.push_back(commutator_matrix(t.X));
    wb.Cstack.middleRows(static_cast<Eigen::Index>(i) * n, n) = wb.C.back();
  }
  return wb;
}

Vec drive_amplitudes(const DeviceSpec& spec, const ResonanceWindow& win, const PumpDrive& drive) {
  const ResonanceSpec& r = spec.res[P];
  Vec a = Vec::Zero(win.nk);
  if (drive.kind == PumpDrive::Gaussian) {
    if (!(drive.energy > 0 && drive.tau > 0)) throw ConfigError("pulse energy and duration must be positive");
    double mu_z = -drive.lead * r.v * drive.tau;
    double amp = std::pow(2 / PI, 0.25) * std::sqrt(drive.energy * drive.tau * r.v / (HBAR * r.omega));
    for (int i = 0; i < win.nk; ++i) {
      double x = win.offsets[i] - drive.k0_offset;
      a(i) = amp * std::exp(-r.v * r.v * drive.tau * drive.tau * x * x) * expi(-x * mu_z);
    }
  } else {
    if (!(drive.power > 0)) throw ConfigError("cw power must be positive");
    double pos = drive.k0_offset / win.dk + win.nk / 2;
    int i = static_cast<int>(std::lround(pos));
    if (i < 0 || i >= win.nk || std::abs(pos - i) > 1e-6)
      throw ConfigError("cw pump must sit on a grid point of the pump window");
    a(i) = std::sqrt(2 * PI * drive.power / (HBAR * r.omega * r.v)) / win.dk;
  }
  return a;
}

PumpField init_pump(const DeviceSpec& spec, const WindowBasis& wb, const PumpDrive& drive) {
  PumpField f;
  f.win = wb.win;
  f.alpha_in = drive_amplitudes(spec, wb.win, drive);
  int n = spec.n_channels();
  f.alpha_loc.resize(wb.win.nk, n);
  for (int i = 0; i < wb.win.nk; ++i) f.alpha_loc.row(i) = wb.X[i].row(0) * f.alpha_in(i);
  return f;
}

Vec PumpTrajectory::coords(double t) const {
  if (!sampled) {
    Vec ph(dw.size());
    for (Eigen::Index i = 0; i < dw.size(); ++i) ph(i) = expi(-dw(i) * (t - t0));
    if (dense) return a0.col(0).cwiseProduct(ph);
    return dk * (a0.transpose() * ph);
  }
  double x = (t - t0) / h;
  int n = static_cast<int>(samples.size());
  if (x < -1e-9 || x > n - 1 + 1e-9) throw DomainError("pump time outside the trajectory");
  int i = std::clamp(static_cast<int>(std::floor(x)), 0, std::max(0, n - 2));
  double f = std::clamp(x - i, 0.0, 1.0);
  if (n == 1) return samples[0];
  return (1 - f) * samples[i] + f * samples[i + 1];
}

double PumpTrajectory::t_end() const {
  return sampled ? t0 + h * (samples.size() - 1) : 1e300;
}

PumpTrajectory linear_trajectory(const PumpModel& m, const PumpField& f) {
  PumpTrajectory tr;
  tr.dense = m.spec->layout.n_ring == 0;
  tr.dk = f.win.dk;
  tr.dw.resize(f.win.nk);
  for (int i = 0; i < f.win.nk; ++i) tr.dw(i) = f.win.omega_offset(m.spec->res[P], i);
  tr.a0 = tr.dense ? Mat(f.alpha_in) : f.alpha_loc;
  tr.t0 = f.t;
  return tr;
}

double pump_photons(const PumpModel& m, const Mat& alpha_loc, double dk) {
  double n = 0;
  for (Eigen::Index i = 0; i < alpha_loc.rows(); ++i)
    n += (m.wb->Lin[i].transpose() * alpha_loc.row(i).transpose()).squaredNorm();
  return n * dk;
}

PumpTrajectory propagate_pump(const PumpModel& m, const PumpField& f, double h, int n_steps,
                              double tol, std::vector<double>* photons, PumpField* end) {
  PumpTrajectory lin = linear_trajectory(m, f);
  if (!m.spm) {
    if (end) {
      double t1 = f.t + n_steps * h;
      *end = f;
      end->t = t1;
      for (int i = 0; i < f.win.nk; ++i) {
        cplx ph = expi(-lin.dw(i) * (t1 - f.t));
        end->alpha_loc.row(i) *= ph;
        end->alpha_in(i) *= ph;
      }
    }
    return lin;
  }
  const bool dense = lin.dense;
  const int nk = f.win.nk;
  const int n = dense ? 1 : m.spec->n_channels();
  const double dk = f.win.dk;
  const RVec& dw = lin.dw;

  auto alpha_of = [&](double t, const Mat& beta) {
    Mat a = beta;
    for (int i = 0; i < nk; ++i) a.row(i) *= expi(-dw(i) * (t - f.t));
    return a;
  };
  auto coords_of = [&](const Mat& a) -> Vec {
    if (dense) return a.col(0);
    return dk * a.colwise().sum().transpose();
  };
  // d beta / dt in the interaction picture
  auto rhs = [&](double t, const Mat& beta) {
    Mat a = alpha_of(t, beta);
    Mat d(nk, n);
    if (dense) {
      Vec s = dense_spm_drive(*m.dense, pump_profile(*m.dense, a.col(0), dk));
      d.col(0) = I1 * s;
    } else {
      Vec s = spm_drive(*m.tensor, coords_of(a));
      Vec cs = m.wb->Cstack * s;
      for (int i = 0; i < nk; ++i) d.row(i) = I1 * cs.segment(static_cast<Eigen::Index>(i) * n, n).transpose();
    }
    for (int i = 0; i < nk; ++i) d.row(i) *= expi(dw(i) * (t - f.t));
    return d;
  };
  auto count = [&](const Mat& a) {
    return dense ? dk * a.squaredNorm() : pump_photons(m, a, dk);
  };

  Mat beta = dense ? Mat(f.alpha_in) : f.alpha_loc;
  PumpTrajectory tr = lin;
  tr.sampled = true;
  tr.t0 = f.t;
  tr.h = h;
  double t = f.t;
  double n0 = count(alpha_of(t, beta));
  tr.samples.push_back(coords_of(alpha_of(t, beta)));
  if (photons) photons->push_back(n0);
  for (int step = 0; step < n_steps; ++step) {
    Mat k1 = rhs(t, beta);
    Mat k2 = rhs(t + 0.5 * h, beta + 0.5 * h * k1);
    Mat k3 = rhs(t + 0.5 * h, beta + 0.5 * h * k2);
    Mat k4 = rhs(t + h, beta + h * k3);
    beta += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    t = f.t + (step + 1) * h;
    Mat a = alpha_of(t, beta);
    double nn = count(a);
    if (photons) photons->push_back(nn);
    if (n0 > 0 && std::abs(nn - n0) > tol * n0)
      throw StepSizeError("pump photon number drifted by " + std::to_string(std::abs(nn - n0) / n0) +
                          "; try a step below " + std::to_string(0.5 * h) + " ps");
    tr.samples.push_back(coords_of(a));
  }
  if (end) {
    *end = f;
    end->t = t;
    Mat a = alpha_of(t, beta);
    if (dense) {
      end->alpha_in = a.col(0);
      end->alpha_loc = a;
    } else {
      end->alpha_loc = a;
      for (int i = 0; i < nk; ++i)
        end->alpha_in(i) = (m.wb->Lin[i].transpose() * a.row(i).transpose())(0);
    }
  }
  return tr;
}

PumpKernels kernels_at(const PumpModel& m, const PumpTrajectory& tr, double t, bool xpm) {
  Vec c = tr.coords(t);
  if (tr.dense) return dense_kernels(*m.dense, pump_profile(*m.dense, c, tr.dk), xpm);
  return pump_kernels(*m.tensor, c, xpm);
}

double ring_energy(const PumpModel& m, const Vec& coords) {
  if (m.spec->layout.n_ring == 0) {
    const DenseCoupling& d = *m.dense;
    Vec Q = pump_profile(d, coords, 1.0);  // relative units
    double e = 0;
    for (Eigen::Index k = 0; k < Q.size(); ++k)
      if (d.grid.region[k] == Ring) e += d.grid.w(k) * std::norm(Q(k));
    return e;
  }
  return (coords.adjoint() * m.tensor->ring_gram * coords)(0, 0).real();
}

double pulse_end_time(const PumpModel& m, const PumpTrajectory& tr, double frac, double dt,
                      double t_max) {
  double peak = 0, t_peak = 0;
  for (double t = 0; t < t_max; t += dt) {
    double e = ring_energy(m, tr.coords(t));
    if (e > peak) {
      peak = e;
      t_peak = t;
    }
    if (t > t_peak && e < frac * peak) return t;
  }
  return t_max;
}

}  // namespace ringsq
