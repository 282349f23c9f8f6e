#include "ringsq/squeeze.hpp"

#include "ringsq/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace ringsq {

namespace {

double norm1(const Mat& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

Mat series_integral(const Mat& At, double dt) {
  const Eigen::Index d = At.rows();
  Mat M = (I1 * dt) * At;
  Mat term = (I1 * dt) * Mat::Identity(d, d);
  Mat E = term;
  for (int n = 1; n <= 64; ++n) {
    term = term * M / static_cast<double>(n + 1);
    double tn = term.norm();
    E += term;
    if (tn < 1e-14 * E.norm() || tn == 0) return E;
  }
  throw StepSizeError("nonlinear step series did not converge in 64 terms; reduce the time step");
}

}  // namespace

Mat phi_integral(const Mat& At, double dt, StepPath path, StepPath* used) {
  const Eigen::Index d = At.rows();
  if (path == StepPath::Auto) {
    path = StepPath::Series;
    if (dt * norm1(At) > 1.0) {
      Eigen::PartialPivLU<Mat> lu(At);
      if (lu.rcond() > 1e-8) path = StepPath::Closed;
    }
  }
  if (used) *used = path;
  if (path == StepPath::Series) return series_integral(At, dt);
  Eigen::PartialPivLU<Mat> lu(At);
  Mat ex = ((I1 * dt) * At).exp();
  return lu.solve(ex - Mat::Identity(d, d));
}

std::vector<Mat> nonlinear_step(const std::vector<Mat>& A, double dt, StepPath path) {
  if (A.empty()) return {};
  Mat At = Mat::Zero(A[0].rows(), A[0].cols());
  for (const Mat& a : A) At += a;
  Mat E = phi_integral(At, dt, path);
  std::vector<Mat> U;
  U.reserve(A.size());
  for (const Mat& a : A) U.push_back(a * E);
  return U;
}

double OutTransfer::symplectic_defect() const {
  const Eigen::Index m = modes();
  Mat Us = U;
  Us.rightCols(m) *= -1.0;
  Mat D = Us * U.adjoint();
  D.topLeftCorner(m, m) -= Mat::Identity(m, m);
  D.bottomRightCorner(m, m) += Mat::Identity(m, m);
  return D.cwiseAbs().maxCoeff();
}

SqueezeEngine::SqueezeEngine(const DeviceSpec& spec, const ResonanceWindow& ws,
                             const ResonanceWindow& wi, const PumpModel& pump,
                             const PumpTrajectory& traj, bool xpm)
    : spec_(&spec), ws_(ws), wi_(wi), pump_(&pump), traj_(&traj), xpm_(xpm) {
  if (ws.nk != wi.nk || std::abs(ws.dk - wi.dk) > 1e-12 * ws.dk)
    throw ConfigError("signal and idler windows must share bin count and width");
  if (ws.J != S || wi.J != I) throw ConfigError("windows must belong to the signal and idler");
  dense_ = spec.layout.n_ring == 0;
  nk_ = ws.nk;
  n_ = spec.n_channels();
  dk_ = ws.dk;
  wS_.resize(nk_);
  wI_.resize(nk_);
  for (int i = 0; i < nk_; ++i) {
    wS_(i) = ws.omega_offset(spec.res[S], i);
    wI_(i) = wi.omega_offset(spec.res[I], i);
  }
  bs_ = window_basis(spec, ws);
  bi_ = window_basis(spec, wi);
  if (dense_) {
    if (!pump.dense || pump.dense->HS.cols() != nk_ || pump.dense->HI.cols() != nk_)
      throw ConfigError("single-channel device needs dense couplings on the signal/idler windows");
  } else {
    if (!pump.tensor) throw ConfigError("local device needs a coupling tensor");
    chat_sum_ = Mat::Zero(2 * n_, 2 * n_);
    cs_.resize(static_cast<Eigen::Index>(nk_) * n_, n_);
    ci_.resize(static_cast<Eigen::Index>(nk_) * n_, n_);
    for (int i = 0; i < nk_; ++i) {
      cs_.middleRows(i * n_, n_) = bs_.C[i];
      ci_.middleRows(i * n_, n_) = bi_.C[i].conjugate();
      chat_sum_.topLeftCorner(n_, n_) += bs_.C[i];
      chat_sum_.bottomRightCorner(n_, n_) += bi_.C[i].conjugate();
    }
  }
  reset(0.0);
}

int SqueezeEngine::srow(int i) const { return dense_ ? i : i * n_; }
int SqueezeEngine::irow(int i) const { return dense_ ? nk_ + i : (nk_ + i) * n_; }

Mat SqueezeEngine::coupling_block(double t) const {
  PumpKernels k = kernels_at(*pump_, *traj_, t, xpm_);
  const Eigen::Index m = k.KS.rows();
  Mat B(2 * m, 2 * m);
  B << k.KS, k.P, -k.P.adjoint(), -k.KI.conjugate();
  return B;
}

Mat SqueezeEngine::total_generator(double t) const {
  Mat B = coupling_block(t);
  return dense_ ? Mat(dk_ * B) : Mat(dk_ * chat_sum_ * B);
}

Mat SqueezeEngine::full_generator(double t) const {
  const int d = dim();
  Mat G = Mat::Zero(d, d);
  Mat B = coupling_block(t);
  if (dense_) {
    G = (I1 * dk_) * B;
  } else {
    for (int i = 0; i < nk_; ++i) {
      Mat rs = (I1 * dk_) * bs_.C[i] * B.topRows(n_);
      Mat ri = (I1 * dk_) * bi_.C[i].conjugate() * B.bottomRows(n_);
      for (int j = 0; j < nk_; ++j) {
        G.block(srow(i), srow(j), n_, n_) = rs.leftCols(n_);
        G.block(srow(i), irow(j), n_, n_) = rs.rightCols(n_);
        G.block(irow(i), srow(j), n_, n_) = ri.leftCols(n_);
        G.block(irow(i), irow(j), n_, n_) = ri.rightCols(n_);
      }
    }
  }
  for (int i = 0; i < nk_; ++i)
    for (int c = 0; c < (dense_ ? 1 : n_); ++c) {
      G(srow(i) + c, srow(i) + c) -= I1 * wS_(i);
      G(irow(i) + c, irow(i) + c) += I1 * wI_(i);
    }
  return G;
}

double SqueezeEngine::suggest_dt(double t0, double t1, double tau, int samples) const {
  double amax = 0;
  for (int s = 0; s <= samples; ++s) {
    double t = t0 + (t1 - t0) * s / samples;
    amax = std::max(amax, norm1(total_generator(t)));
  }
  double wmax = std::max(wS_.cwiseAbs().maxCoeff(), wI_.cwiseAbs().maxCoeff());
  double dt = 1e300;
  if (amax > 0) dt = std::min(dt, 1.0 / (20 * amax));
  if (wmax > 0) dt = std::min(dt, 0.1 / wmax);
  if (tau > 0) dt = std::min(dt, tau / 20);
  if (dt == 1e300) dt = t1 > t0 ? (t1 - t0) : 1.0;
  return dt;
}

Mat SqueezeEngine::initial_state() const {
  const int d = dense_ ? 2 * nk_ : 2 * nk_ * n_;
  Mat x = Mat::Zero(d, d);
  if (dense_) return Mat::Identity(d, d);
  for (int i = 0; i < nk_; ++i) {
    x.block(srow(i), srow(i), n_, n_) = bs_.X[i].transpose();
    x.block(irow(i), irow(i), n_, n_) = bi_.X[i].adjoint();
  }
  return x;
}

void SqueezeEngine::reset(double t0) {
  t_ = t0;
  x_ = initial_state();
}

Vec SqueezeEngine::phases(double t) const {
  Vec p(dim());
  const int m = dense_ ? 1 : n_;
  for (int i = 0; i < nk_; ++i) {
    p.segment(srow(i), m).setConstant(expi(-wS_(i) * t));
    p.segment(irow(i), m).setConstant(expi(wI_(i) * t));
  }
  return p;
}

void SqueezeEngine::step(double dt, StepPath path) {
  const double tm = t_ + 0.5 * dt;
  Mat B = coupling_block(tm);
  Vec ph = phases(tm);
  if (dense_) {
    Mat A = dk_ * B;
    Mat E = phi_integral(A, dt, path);
    // x~ += P^-1 (A E) P x~, P = diag(ph)
    Mat y = ph.asDiagonal() * x_;
    Mat z = (A * E) * y;
    x_.noalias() += ph.conjugate().asDiagonal() * z;
  } else {
    const int w = 2 * n_;
    const Eigen::Index m = static_cast<Eigen::Index>(nk_) * n_;
    Mat At = dk_ * chat_sum_ * B;
    Mat E = phi_integral(At, dt, path);
    Mat G = dk_ * B * E;
    RowMat y = RowMat::Zero(w, x_.cols());
    for (int j = 0; j < nk_; ++j) {
      y.topRows(n_) += ph(srow(j)) * x_.middleRows(srow(j), n_);
      y.bottomRows(n_) += ph(irow(j)) * x_.middleRows(irow(j), n_);
    }
    RowMat z = G * y;
    // x_i += conj(ph_i) C^_i z; C^ is block diagonal so S and I rows split
    Mat ms(m, n_), mi(m, n_);
    for (int i = 0; i < nk_; ++i) {
      ms.middleRows(i * n_, n_) = std::conj(ph(srow(i))) * cs_.middleRows(i * n_, n_);
      mi.middleRows(i * n_, n_) = std::conj(ph(irow(i))) * ci_.middleRows(i * n_, n_);
    }
    x_.topRows(m).noalias() += ms * z.topRows(n_);
    x_.bottomRows(m).noalias() += mi * z.bottomRows(n_);
  }
  t_ += dt;
}

void SqueezeEngine::run(int n_steps, double dt, const std::function<void(int, double)>& after_step) {
  for (int s = 0; s < n_steps; ++s) {
    step(dt);
    if (monitor) {
      OutTransfer o = out_transfer();
      monitor(t_, std::sqrt(o.WSI().squaredNorm() + o.WIS().squaredNorm()));
    }
    if (after_step) after_step(s + 1, t_);
  }
}

OutTransfer SqueezeEngine::to_out(const RowMat& x) const {
  OutTransfer o;
  o.nk = nk_;
  o.n = n_;
  o.U = x;
  for (int i = 0; i < nk_; ++i) {
    if (dense_) {
      o.U.row(i) *= bs_.Lout[i](0, 0);
      o.U.row(nk_ + i) *= std::conj(bi_.Lout[i](0, 0));
    } else {
      o.U.middleRows(srow(i), n_) = bs_.Lout[i].transpose() * x.middleRows(srow(i), n_);
      o.U.middleRows(irow(i), n_) = bi_.Lout[i].adjoint() * x.middleRows(irow(i), n_);
    }
  }
  return o;
}

}  // namespace ringsq
