#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "common.hpp"
#include "ringsq/errors.hpp"
#include "ringsq/oracles.hpp"
#include "ringsq/quadrature.hpp"
#include "ringsq/simulation.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace ringsq;

namespace {

Mat random_mat(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

// three bins, two ring phantoms: 18 x 18 state
SimConfig toy(double energy = 1.0, bool spm = false) {
  SimConfig c;
  c.nk = 3;
  c.device.n_ring = 2;
  c.grow_grid = false;
  c.spm_xpm = spm;
  c.drive.energy = energy;
  return c;
}

OutTransfer run_toy(Simulation& sim, int steps, double t1) {
  auto eng = sim.make_engine(sim.linear_pump());
  eng->reset(0);
  eng->run(steps, t1 / steps);
  return eng->out_transfer();
}

}  // namespace

TEST_CASE("series and closed-form step integrals agree") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Mat A = random_mat(8, rng);
    double nrm = A.cwiseAbs().colwise().sum().maxCoeff();
    double dt = (0.3 + 0.1 * (trial % 7)) / nrm;
    StepPath used;
    Mat es = phi_integral(A, dt, StepPath::Series, &used);
    CHECK(used == StepPath::Series);
    Mat ec = phi_integral(A, dt, StepPath::Closed, &used);
    CHECK(used == StepPath::Closed);
    CHECK((es - ec).norm() < 1e-12 * es.norm());
  }
}

TEST_CASE("step integral matches gauss quadrature of the propagator") {
  std::mt19937 rng(11);
  Mat A = random_mat(6, rng);
  double dt = 2.5 / A.norm();
  // i int_0^dt e^{i s A} ds with 30 Gauss-Legendre nodes
  Mat ref = Mat::Zero(6, 6);
  const GaussRule& g = gauss_legendre(30);
  for (size_t k = 0; k < g.x.size(); ++k) {
    double s = 0.5 * dt * (g.x[k] + 1);
    ref += (0.5 * dt * g.w[k]) * (I1 * s * A).exp();
  }
  ref *= I1;
  CHECK((phi_integral(A, dt) - ref).norm() < 1e-12 * ref.norm());
}

TEST_CASE("series path refuses steps it cannot converge") {
  std::mt19937 rng(3);
  Mat A = random_mat(6, rng);
  CHECK_THROWS_AS(phi_integral(A, 200.0 / A.norm(), StepPath::Series), StepSizeError);
}

TEST_CASE("zero generator adds nothing") {
  std::vector<Mat> A(3, Mat::Zero(4, 4));
  for (const Mat& u : nonlinear_step(A, 0.7)) CHECK(u.norm() == 0);
}

TEST_CASE("nonlinear update is the exact frozen-generator flow") {
  // dx_i/dt = i A_i sum_j x_j for three blocks, against the exponential of the
  // stacked generator
  std::mt19937 rng(5);
  const int d = 4, m = 3;
  std::vector<Mat> A;
  for (int i = 0; i < m; ++i) A.push_back(0.3 * random_mat(d, rng));
  Mat G = Mat::Zero(d * m, d * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) G.block(i * d, j * d, d, d) = I1 * A[i];
  for (double dt : {0.05, 0.4, 1.5}) {
    Mat ex = (dt * G).exp();
    auto U = nonlinear_step(A, dt);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        Mat want = ex.block(i * d, j * d, d, d);
        if (i == j) want -= Mat::Identity(d, d);
        CHECK((U[i] - want).norm() < 1e-10 * (1 + want.norm()));
      }
  }
}

TEST_CASE("phases compose") {
  Simulation sim(toy());
  auto eng = sim.make_engine(sim.linear_pump());
  Vec a = eng->phases(13.0), b = eng->phases(29.5), c = eng->phases(42.5);
  CHECK((a.cwiseProduct(b) - c).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((eng->phases(0.0).array() - 1.0).abs().maxCoeff() == 0);
}

TEST_CASE("without nonlinearity the transfer is a unitary of pure phases") {
  SimConfig c = toy(100);
  c.device.gamma_nl = 0;
  Simulation sim(c);
  OutTransfer o = run_toy(sim, 50, 500);
  const Eigen::Index m = o.modes();
  CHECK(o.WSI().norm() == 0);
  CHECK(o.WIS().norm() == 0);
  Mat V = o.VSS();
  CHECK((V * V.adjoint() - Mat::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-10);
  // interaction picture: no evolution at all in the local basis
  auto eng = sim.make_engine(sim.linear_pump());
  eng->reset(0);
  eng->run(10, 5.0);
  CHECK((Mat(eng->state()) - eng->initial_state()).norm() == 0);
}

TEST_CASE("bogoliubov identities, purity and pair symmetry on the toy device") {
  Simulation sim(toy(100, true));
  OutTransfer o = run_toy(sim, 400, 1500);
  CHECK(o.WSI().norm() > 0.1);  // well away from vacuum
  double scale = o.U.cwiseAbs().maxCoeff();
  CHECK(o.symplectic_defect() < 1e-8 * scale * scale);
  FullMoments f = full_moments(o);
  double nmax = f.N.cwiseAbs().maxCoeff();
  CHECK(purity_defect(f.N, f.M) < 1e-8 * nmax * nmax);
  PhotonNumbers p = photon_numbers(o);
  CHECK(std::abs(p.tot_S - p.tot_I) < 1e-10 * p.tot_S);
}

TEST_CASE("composition is associative") {
  Simulation sim(toy(30));
  auto eng = sim.make_engine(sim.linear_pump());
  const double dt = 5.0;
  Mat x0 = eng->initial_state();
  Eigen::PartialPivLU<Mat> lu(x0);
  // U(t0, t) = X(t; t0) X0^-1
  auto U = [&](double t0, int n) {
    eng->reset(t0);
    eng->run(n, dt);
    return Mat(Mat(eng->state()) * lu.inverse());
  };
  Mat u13 = U(0, 120), u12 = U(0, 50), u23 = U(250, 70);
  CHECK((u13 - u23 * u12).norm() < 1e-10 * u13.norm());
}

TEST_CASE("engine matches direct integration on the toy device") {
  Simulation sim(toy(1.0));
  auto eng = sim.make_engine(sim.linear_pump());
  const double t1 = 1500;
  OutTransfer ref = direct_ode_reference(*eng, 0, t1);
  CHECK(ref.symplectic_defect() < 1e-9);
  eng->reset(0);
  eng->run(4000, t1 / 4000);
  OutTransfer o = eng->out_transfer();
  CHECK(o.WSI().norm() > 0.05);
  CHECK((o.U - ref.U).norm() < 1e-6);
}

TEST_CASE("splitting error is second order in the step") {
  Simulation sim(toy(1.0));
  const double t1 = 1500;
  double ref = photon_numbers(run_toy(sim, 3200, t1)).tot_S;
  std::vector<double> err;
  for (int n : {100, 200, 400}) err.push_back(std::abs(photon_numbers(run_toy(sim, n, t1)).tot_S - ref));
  for (int k = 0; k + 1 < static_cast<int>(err.size()); ++k) {
    double slope = std::log2(err[k] / err[k + 1]);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("low-gain pair number is quadratic in pulse energy") {
  SimConfig c = toy(0.1);
  Simulation a(c);
  c.drive.energy = 0.2;
  Simulation b(c);
  double na = photon_numbers(run_toy(a, 800, 1500)).tot_S;
  double nb = photon_numbers(run_toy(b, 800, 1500)).tot_S;
  CHECK(nb < 1e-3);
  CHECK(nb / na == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("single-channel device keeps the identities") {
  SimConfig c = toy(50, true);
  c.device.eta_esc = 1.0;
  c.nk = 5;
  Simulation sim(c);
  auto eng = sim.make_engine(sim.linear_pump());
  CHECK(eng->dense());
  OutTransfer o = run_toy(sim, 300, 1500);
  PhotonNumbers p = photon_numbers(o);
  CHECK(p.tot_S > 0);
  CHECK(std::abs(p.tot_S - p.tot_I) < 1e-10 * p.tot_S);
  CHECK(std::abs(p.out_S - p.tot_S) < 1e-10 * p.tot_S);
  double scale = o.U.cwiseAbs().maxCoeff();
  CHECK(o.symplectic_defect() < 1e-8 * scale * scale);
}

TEST_CASE("window mismatch is rejected") {
  Simulation sim(toy());
  ResonanceWindow wi = sim.idler_window();
  wi.nk += 2;
  CHECK_THROWS_AS(SqueezeEngine(sim.spec(), sim.signal_window(), wi, sim.pump_model(),
                                sim.linear_pump(), false),
                  ConfigError);
}
