#include "ringsq/simulation.hpp"

#include "ringsq/errors.hpp"

#include <cmath>
#include <sstream>

namespace ringsq {

Simulation::Simulation(const SimConfig& cfg) : cfg_(cfg) {
  if (cfg.nk < 3 || cfg.nk % 2 == 0) throw ConfigError("nk must be odd and at least 3");
  if (!(cfg.n_r > 0)) throw ConfigError("n_r must be positive");
  spec_ = build_device(cfg.device);
  double F = figures_of_merit(spec_, P).finesse;
  n_r_ = cfg.n_r;
  if (n_r_ > 0.4 * F) {
    n_r_ = 0.4 * F;
    std::ostringstream s;
    s << "window half-width capped at 0.4 F = " << n_r_ << " linewidths";
    notes_.push_back(s.str());
  }
  build(cfg.nk);
  if (cfg.drive.kind == PumpDrive::Gaussian) {
    const double gam = figures_of_merit(spec_, P).gamma_rad;
    const double tau = cfg.drive.tau;
    double probe = std::min(tau / 10, 0.05 / gam);
    double t_max = 2 * cfg.drive.lead * tau + 10 * tau + 60 / gam;
    // the sampled pump repeats every pump-grid recurrence time, so the ring
    // only empties within one period; refine the grid until it does
    int nk = cfg.nk;
    double cap = t_max;
    for (;;) {
      cap = std::min(t_max, 2 * PI / (spec_.res[P].v * wp_.dk));
      t_end_ = pulse_end_time(pm_, lin_, cfg.end_fraction, probe, cap);
      if (t_end_ < cap || cap >= t_max || !cfg.grow_grid) break;
      nk = 2 * nk - 1;
      build(nk);
    }
    if (t_end_ >= t_max)
      notes_.push_back("pulse end time hit its search limit");
    else if (t_end_ >= cap)
      notes_.push_back("pulse end time limited by the pump grid recurrence");
    if (cfg.grow_grid) {
      double half = ws_.offsets.back();
      double need = 1.1 * t_end_ * spec_.res[S].v * 2 * half / (2 * PI);
      int want = std::max(cfg.nk, 2 * static_cast<int>(std::ceil(need / 2)) + 1);
      if (want != ws_.nk) build(want);
      if (want != cfg.nk) {
        std::ostringstream s;
        s << "signal/idler grid grown from " << cfg.nk << " to " << want
          << " bins so the run stays within the grid recurrence time";
        notes_.push_back(s.str());
      }
    }
  }
}

void Simulation::build(int nk) {
  ws_ = build_k_grid(spec_, S, n_r_, nk);
  wi_ = make_window(I, spec_.res[I].k, ws_.offsets.back(), nk);
  wp_ = pump_window(spec_, cfg_.drive, ws_);
  wbp_ = window_basis(spec_, wp_);
  pm_ = PumpModel{};
  pm_.spec = &spec_;
  pm_.wb = &wbp_;
  pm_.spm = cfg_.spm_xpm;
  if (spec_.layout.n_ring == 0) {
    dense_ = build_dense_coupling(spec_, ws_.offsets, wi_.offsets, wp_.offsets);
    pm_.dense = &dense_;
  } else {
    if (tensor_.groups.empty()) tensor_ = build_coupling_tensor(spec_);
    pm_.tensor = &tensor_;
  }
  field_ = init_pump(spec_, wbp_, cfg_.drive);
  lin_ = linear_trajectory(pm_, field_);
}

double Simulation::recurrence_time() const { return 2 * PI / (spec_.res[S].v * ws_.dk); }

double Simulation::round_trip() const {
  return map_path(spec_, S, spec_.L_r).Ltilde / spec_.res[S].v;
}

const PumpTrajectory& Simulation::pump_trajectory(double h, int n2) {
  std::vector<double> ph;
  traj_ = propagate_pump(pm_, field_, h, n2, cfg_.pump_tol, &ph);
  return traj_;
}

std::unique_ptr<SqueezeEngine> Simulation::make_engine(const PumpTrajectory& tr) const {
  return std::make_unique<SqueezeEngine>(spec_, ws_, wi_, pm_, tr, cfg_.spm_xpm);
}

PulsedResult Simulation::run_pulsed() {
  if (cfg_.drive.kind != PumpDrive::Gaussian) throw ConfigError("run_pulsed needs a gaussian drive");
  PulsedResult r;
  // two uniform segments: tau/20 while the pulse enters, then an odd multiple
  // K of it so every midpoint stays on the pump's half-step sample grid
  double dt = cfg_.dt;
  int n1 = 0, n2 = 0, K = 1;
  if (dt > 0) {
    n1 = std::max(1, static_cast<int>(std::ceil(t_end_ / dt - 1e-9)));
  } else {
    auto probe = make_engine(lin_);
    const double tau = cfg_.drive.tau;
    double t_sw = std::min(t_end_, (cfg_.drive.lead + 4) * tau);
    double dt1 = probe->suggest_dt(0, t_sw, tau);
    // even counts so one level of coarsening stays exact
    n1 = 2 * std::max(1, static_cast<int>(std::ceil(t_sw / dt1 / 2 - 1e-9)));
    dt1 = t_sw / n1;
    if (t_end_ > t_sw) {
      double dt_tail = probe->suggest_dt(t_sw, t_end_, 0);
      K = std::max(1, static_cast<int>(std::floor(dt_tail / dt1)));
      if (K % 2 == 0) --K;
      n2 = 2 * std::max(1, static_cast<int>(std::ceil((t_end_ - t_sw) / (K * dt1) / 2 - 1e-9)));
    }
  }
  if (cfg_.dt_refine > 0) {
    n1 <<= cfg_.dt_refine;
    n2 <<= cfg_.dt_refine;
  } else if (cfg_.dt_refine == -1) {
    if (n1 % 2 || n2 % 2) throw ConfigError("dt_refine = -1 needs an even number of steps");
    n1 /= 2;
    n2 /= 2;
  } else if (cfg_.dt_refine < -1) {
    throw ConfigError("dt_refine must be at least -1");
  }
  {
    double t_sw = cfg_.dt > 0 ? t_end_ : std::min(t_end_, (cfg_.drive.lead + 4) * cfg_.drive.tau);
    dt = t_sw / n1;
  }
  const double t_run = (n1 + static_cast<double>(K) * n2) * dt;
  const PumpTrajectory* tr = &lin_;
  if (cfg_.spm_xpm) {
    std::vector<double> ph;
    traj_ = propagate_pump(pm_, field_, 0.5 * dt, 2 * (n1 + K * n2), cfg_.pump_tol, &ph);
    for (double x : ph) r.diag.pump_photon_drift = std::max(r.diag.pump_photon_drift, std::abs(x - ph.front()) / ph.front());
    tr = &traj_;
  }
  auto eng = make_engine(*tr);
  eng->reset(0.0);
  eng->run(n1, dt);
  if (n2 > 0) eng->run(n2, K * dt);
  r.out = eng->out_transfer();
  r.photons = photon_numbers(r.out);
  r.moments = output_moments(r.out, 0);
  r.diag.dt = dt;
  r.diag.dt_tail = K * dt;
  r.diag.steps = n1 + n2;
  r.diag.t_end = t_run;
  r.diag.recurrence = recurrence_time();
  r.diag.nk = ws_.nk;
  r.diag.n_r = n_r_;
  r.diag.symplectic_defect = r.out.symplectic_defect();
  r.diag.notes = notes_;
  if (r.diag.symplectic_defect > cfg_.symplectic_warn) {
    std::ostringstream s;
    s << "accuracy warning: symplectic defect " << r.diag.symplectic_defect << "; try dt <= " << 0.5 * dt;
    r.diag.notes.push_back(s.str());
  }
  return r;
}

CwResult Simulation::run_cw() {
  if (cfg_.drive.kind != PumpDrive::CW) throw ConfigError("run_cw needs a cw drive");
  CwResult r;
  const double tc = 0.5 * recurrence_time();
  double dt = cfg_.dt;
  if (!(dt > 0)) dt = make_engine(lin_)->suggest_dt(0, tc, 0);
  int nc = std::max(1, static_cast<int>(std::ceil(tc / dt - 1e-9)));
  dt = tc / nc;
  // finite-difference window centred on half the recurrence time, where the
  // growth kernel of every non-matched bin pair vanishes
  int m = std::max(1, static_cast<int>(std::lround(0.5 * cfg_.cw_round_trips * round_trip() / dt)));
  m = std::min(m, nc);
  const int n = nc + m;
  const PumpTrajectory* tr = &lin_;
  if (cfg_.spm_xpm) {
    std::vector<double> ph;
    traj_ = propagate_pump(pm_, field_, 0.5 * dt, 2 * n, cfg_.pump_tol, &ph);
    for (double x : ph) r.diag.pump_photon_drift = std::max(r.diag.pump_photon_drift, std::abs(x - ph.front()) / ph.front());
    tr = &traj_;
  }
  auto eng = make_engine(*tr);
  eng->reset(0.0);
  eng->run(n, dt, [&](int s, double t) {
    if (s != nc - m && s != nc && s != nc + m) return;
    OutTransfer o = eng->out_transfer();
    if (s == nc - m) {
      r.t1 = t;
      r.p1 = photon_numbers(o);
      r.m1 = output_moments(o, 0);
    }
    if (s == nc) {
      r.tc = t;
      r.pc = photon_numbers(o);
    }
    if (s == nc + m) {
      r.t2 = t;
      r.p2 = photon_numbers(o);
      r.m2 = output_moments(o, 0);
      r.out = std::move(o);
    }
  });
  if (nc - m == 0) {
    OutTransfer o = eng->to_out(eng->initial_state());
    r.t1 = 0;
    r.p1 = photon_numbers(o);
    r.m1 = output_moments(o, 0);
  }
  r.densities = cw_densities(r.m1, r.m2, r.t2 - r.t1, ws_, spec_.res[S].v);
  r.rates = cw_pair_rates(r.p1, r.pc, r.p2, r.t1, r.tc, r.t2, round_trip());
  r.converged = r.rates.drift <= cfg_.cw_drift_tol;
  r.diag.dt = dt;
  r.diag.dt_tail = dt;
  r.diag.steps = n;
  r.diag.t_end = r.t2;
  r.diag.recurrence = recurrence_time();
  r.diag.nk = ws_.nk;
  r.diag.n_r = n_r_;
  r.diag.symplectic_defect = r.out.symplectic_defect();
  r.diag.notes = notes_;
  if (!r.converged) {
    std::ostringstream s;
    s << "cw rate drift " << r.rates.drift << " per round trip exceeds " << cfg_.cw_drift_tol;
    r.diag.notes.push_back(s.str());
  }
  return r;
}

}  // namespace ringsq
