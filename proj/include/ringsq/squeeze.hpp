#pragma once

#include "ringsq/pump.hpp"

#include <functional>

namespace ringsq {

enum class StepPath { Auto, Series, Closed };

// E = i sum_n dt^{n+1}/(n+1)! (i At)^n, i.e. the integral of i e^{i s At} over
// [0, dt]. Series below unit norm, closed form At^-1 (e^{i dt At} - I) above
// it when At is well conditioned.
Mat phi_integral(const Mat& At, double dt, StepPath path = StepPath::Auto,
                 StepPath* used = nullptr);

// U_i = A_i E(sum_j A_j): exact update x_i += U_i sum_j x_j for a frozen
// generator dx_i/dt = i A_i sum_j x_j
std::vector<Mat> nonlinear_step(const std::vector<Mat>& A, double dt,
                                 StepPath path = StepPath::Auto);

// Signal/idler-dagger transfer in the asymptotic bases. Rows: outgoing
// operators, columns: incoming ones; both ordered signal modes (index
// i*n + c for bin i, channel c) then idler-dagger modes.
struct OutTransfer {
  int nk = 0, n = 0;
  Mat U;

  int modes() const { return nk * n; }
  Mat VSS() const { return U.topLeftCorner(modes(), modes()); }
  Mat WSI() const { return U.topRightCorner(modes(), modes()); }
  Mat WIS() const { return U.bottomLeftCorner(modes(), modes()).conjugate(); }
  Mat VII() const { return U.bottomRightCorner(modes(), modes()).conjugate(); }

  // max |U diag(I,-I) U^dagger - diag(I,-I)|; covers V V^dagger - W W^dagger = I
  // and the symmetry of V W^T for both resonances
  double symplectic_defect() const;
};

class SqueezeEngine {
 public:
  // ws, wi: signal and idler windows with equal bin count and width. For
  // single-channel devices the pump model must carry a DenseCoupling built on
  // the same windows.
  SqueezeEngine(const DeviceSpec& spec, const ResonanceWindow& ws, const ResonanceWindow& wi,
                const PumpModel& pump, const PumpTrajectory& traj, bool xpm);

  bool dense() const { return dense_; }
  int channels() const { return n_; }
  int bins() const { return nk_; }
  int dim() const { return static_cast<int>(x_.rows()); }
  double time() const { return t_; }
  const ResonanceWindow& signal_window() const { return ws_; }
  const ResonanceWindow& idler_window() const { return wi_; }
  const WindowBasis& signal_basis() const { return bs_; }
  const WindowBasis& idler_basis() const { return bi_; }
  const RVec& signal_detuning() const { return wS_; }  // rad/ps per bin
  const RVec& idler_detuning() const { return wI_; }
  double bin_width() const { return dk_; }

  // 2n x 2n block [[KS, P], [-P^dagger, -KI*]] (local) or the full 2nk one (dense)
  Mat coupling_block(double t) const;
  // generator of the summed operator, dk (sum_i C_i) B, or dk B when dense
  Mat total_generator(double t) const;
  // full dim x dim matrix G with dx/dt = G x in the state ordering (lab frame)
  Mat full_generator(double t) const;

  // default step: min(1/(20 max|At|_1), tau/20 for pulses, 0.1/max window detuning)
  double suggest_dt(double t0, double t1, double tau = 0, int samples = 200) const;

  void reset(double t0);
  void step(double dt, StepPath path = StepPath::Auto);
  void run(int n_steps, double dt, const std::function<void(int, double)>& after_step = {});

  // interaction-picture state, local basis, signal rows then idler-dagger rows
  const RowMat& state() const { return x_; }
  Mat initial_state() const;
  // lab-frame phases e^{-i Phi t} per row
  Vec phases(double t) const;
  OutTransfer out_transfer() const { return to_out(x_); }
  OutTransfer to_out(const RowMat& x_interaction) const;

  // diagnostics sink: called with (t, |W|_F) every step when set
  std::function<void(double, double)> monitor;

 private:
  const DeviceSpec* spec_;
  ResonanceWindow ws_, wi_;
  const PumpModel* pump_;
  const PumpTrajectory* traj_;
  bool xpm_;
  bool dense_;
  int nk_, n_;
  double dk_;
  RVec wS_, wI_;           // bin frequency offsets
  WindowBasis bs_, bi_;
  Mat chat_sum_;  // sum_i diag(C_S,i, C_I,i*)
  Mat cs_, ci_;   // stacked C_S,i and C_I,i*, nk n x n
  RowMat x_;  // row-major: per-bin row blocks are contiguous
  double t_ = 0;

  int srow(int i) const;  // first signal row of bin i
  int irow(int i) const;  // first idler-dagger row of bin i
};

}  // namespace ringsq
