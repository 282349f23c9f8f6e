#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "common.hpp"
#include "ringsq/basis.hpp"
#include "ringsq/coupler.hpp"
#include "ringsq/errors.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

using namespace ringsq;

namespace {

// closed-form lossless field for unit waveguide input
Vec2 closed_form(const DeviceSpec& d, int J, double dk, double z) {
  const ResonanceSpec& r = d.res[J];
  RingResponse rr = ring_response(d, J, dk);
  PathLength pl = map_path(d, J, z);
  cplx loop = expi(dk * pl.Ltilde);
  Vec2 f;
  if (z <= d.L_c) {
    CouplerEnvelope e = coupler_envelopes(d, J, z, dk);
    f(0) = (e.sigma - I1 * std::sqrt(r.u / r.v) * rr.R * e.kappa * loop) * expi(dk * pl.l);
    f(1) = (rr.R * std::conj(e.sigma) * loop - I1 * std::sqrt(r.v / r.u) * std::conj(e.kappa)) *
           expi(dk * pl.l);
  } else {
    f(0) = 0;
    f(1) = rr.R * expi(dk * pl.l);
  }
  return f;
}

std::vector<double> window(const DeviceSpec& d, int J) {
  return build_k_grid(d, J, 10, 41).offsets;
}

}  // namespace

TEST_CASE("lossless reduction reproduces the closed form") {
  auto d0 = testutil::default_device(780, 1.0);
  // same device with twenty zero-coupling phantoms
  auto d20 = d0;
  d20.layout = make_layout(d0.L_r, d0.L_c, 20, 3, 1.0);
  for (const DeviceSpec* d : {&d0, &d20})
    for (int J : {S, P, I})
      for (double dk : window(*d, J)) {
        NetworkSolution net = build_asymptotic_in(*d, J, dk);
        RingResponse rr = ring_response(*d, J, dk);
        CHECK(std::abs(net.S(0, 0) - rr.T) < 1e-12);
        for (double z : {0.0, 0.3 * d->L_c, d->L_c, 0.5 * d->L_r, 0.97 * d->L_r}) {
          Mat e = envelope_at(*d, net.env, z);
          Vec2 f = closed_form(*d, J, dk, z);
          CHECK(std::abs(e(0, 0) - f(0)) < 1e-12 * std::max(1.0, std::abs(f(0))));
          CHECK(std::abs(e(1, 0) - f(1)) < 1e-12 * std::max(1.0, std::abs(f(1))));
        }
      }
}

TEST_CASE("lossless out-mode is the in-mode over the transmission") {
  auto d = testutil::default_device(780, 1.0);
  for (double dk : window(d, S)) {
    NetworkSolution net = build_asymptotic_in(d, S, dk);
    AsymptoticEnvelope out = build_asymptotic_out(net);
    for (double z : {0.1 * d.L_c, 0.6 * d.L_r}) {
      Mat hi = envelope_at(d, net.env, z), ho = envelope_at(d, out, z);
      CHECK(testutil::max_abs(ho - hi / net.S(0, 0)) < 1e-12 * testutil::max_abs(hi));
    }
  }
}

TEST_CASE("lossy scattering matrix is unitary") {
  auto d = testutil::default_device();
  for (int J : {S, P, I})
    for (double dk : window(d, J)) {
      NetworkSolution net = build_asymptotic_in(d, J, dk);
      Mat U = net.S * net.S.adjoint();
      CHECK(testutil::max_abs(U - Mat::Identity(25, 25)) < 1e-10);
      // flux: all outgoing power of each unit input
      for (int n = 0; n < 25; ++n) CHECK(net.S.col(n).squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("adjoint and inversion routes to the out basis agree") {
  auto d = testutil::default_device();
  for (double dk : {-3e-5, 0.0, 2e-5}) {
    NetworkSolution net = build_asymptotic_in(d, P, dk);
    AsymptoticEnvelope a = build_asymptotic_out(net), b = build_asymptotic_out_inverse(net);
    for (std::size_t j = 0; j < a.after.size(); ++j)
      CHECK(testutil::max_abs(a.after[j] - b.after[j]) < 1e-10);
    CHECK(testutil::max_abs(a.out - Mat::Identity(25, 25)) < 1e-10);
  }
}

TEST_CASE("in-ring envelope follows the lossy enhancement") {
  auto d = testutil::default_device();
  const ResonanceSpec& r = d.res[S];
  double sph = d.layout.sigma[S][1];
  for (double dk : window(d, S)) {
    NetworkSolution net = build_asymptotic_in(d, S, dk);
    // just past the coupler: four interior phantom points plus the one at L_c
    Mat e = envelope_at(d, net.env, d.L_c);
    double expect = std::pow(sph, 5) * std::sqrt(r.v / r.u) * std::sqrt(enhancement(d, S, dk));
    CHECK(std::abs(e(1, 0)) == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("vanishing phantom coupling approaches the lossless basis") {
  auto d0 = testutil::default_device(780, 1.0);
  auto d = d0;
  d.layout = make_layout(d0.L_r, d0.L_c, 20, 3, 1.0 - 1e-14);
  for (double dk : {-2e-5, 0.0, 1e-5}) {
    cplx t0 = build_asymptotic_in(d0, P, dk).S(0, 0);
    cplx t = build_asymptotic_in(d, P, dk).S(0, 0);
    CHECK(std::abs(t - t0) < 1e-6);
  }
}

TEST_CASE("local transform identities") {
  auto d = testutil::default_device();
  for (int J : {S, I})
    for (double dk : {-4e-5, 0.0, 3e-5}) {
      NetworkSolution net = build_asymptotic_in(d, J, dk);
      BasisTransform t = build_local_transform(d, J, dk);
      Mat I25 = Mat::Identity(25, 25);
      CHECK(testutil::max_abs(t.Lout - t.Lin * net.S.transpose()) < 1e-10 * testutil::max_abs(t.Lout));
      CHECK(testutil::max_abs(t.Lin * t.X - I25) < 1e-12 * testutil::max_abs(t.Lin));
      CHECK(testutil::max_abs(t.Lout * t.Xout - I25) < 1e-12 * testutil::max_abs(t.Lout));
    }
}

TEST_CASE("local modes are confined to their segment") {
  auto d = testutil::default_device();
  double dk = 1.5e-5;
  NetworkSolution net = build_asymptotic_in(d, P, dk);
  BasisTransform t = build_local_transform(d, P, dk);
  AsymptoticEnvelope loc = net.env;
  // superpose asymptotic-in envelopes with the rows of Lin
  Mat coeffs = t.Lin.transpose();
  int np = static_cast<int>(d.layout.points.size());
  double scale = 0;
  std::vector<std::pair<double, Mat>> samples;
  for (int j = 0; j < np; ++j)
    for (double f : {0.01, 0.5, 0.99}) {
      double z = d.layout.points[j].z + f * (segment_end(d, j) - d.layout.points[j].z);
      Mat e = envelope_at(d, net.env, z) * coeffs;
      scale = std::max(scale, testutil::max_abs(e));
      samples.push_back({z, e});
    }
  for (auto& [z, e] : samples)
    for (int c = 0; c < 25; ++c) {
      int j = t.anchor[c];
      double za = d.layout.points[j].z, zb = segment_end(d, j);
      Vec2 direct = local_envelope(d, P, dk, j, t.start[c], z);
      if (z > za && z < zb) {
        CHECK(std::abs(e(0, c) - direct(0)) < 1e-10 * scale);
        CHECK(std::abs(e(1, c) - direct(1)) < 1e-10 * scale);
      } else {
        CHECK(std::abs(e(0, c)) < 1e-10 * scale);
        CHECK(std::abs(e(1, c)) < 1e-10 * scale);
      }
    }
}

TEST_CASE("coupler pairs overlap only each other") {
  auto d = testutil::default_device();
  BasisTransform t = build_local_transform(d, P, 0.0);
  for (int a = 0; a < 25; ++a)
    for (int b = 0; b < 25; ++b) {
      double ov = 0;
      for (int s = 1; s < 400; ++s) {
        double z = d.L_r * (s + 0.5) / 400.0;
        Vec2 ea = local_envelope(d, P, 0.0, t.anchor[a], t.start[a], z);
        Vec2 eb = local_envelope(d, P, 0.0, t.anchor[b], t.start[b], z);
        ov += std::abs(ea(0) * eb(0)) + std::abs(ea(1) * eb(1));
      }
      if (t.anchor[a] != t.anchor[b]) CHECK(ov < 1e-12);
    }
}

TEST_CASE("single-channel transform is trivial") {
  auto d = testutil::default_device(780, 1.0);
  BasisTransform t = build_local_transform(d, S, 1e-5);
  CHECK(t.Lin.rows() == 1);
  CHECK(t.Lin(0, 0) == cplx(1.0));
  Mat C = commutator_matrix(t.X);
  CHECK(std::abs(C(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("commutator duality, hermiticity and positivity") {
  for (double eta : {0.5, 0.75, 0.95}) {
    auto d = testutil::default_device(780, eta);
    for (int J : {S, P, I})
      for (double dk : window(d, J)) {
        BasisTransform t = build_local_transform(d, J, dk);
        Mat C = commutator_matrix(t.X);
        Mat Co = commutator_matrix(t.Xout);
        double s = testutil::max_abs(C);
        CHECK(testutil::max_abs(C - Co) < 1e-10 * s);
        CHECK(testutil::max_abs(C - C.adjoint()) < 1e-12 * s);
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (C + C.adjoint()));
        CHECK(es.eigenvalues().minCoeff() > -1e-12 * s);
      }
  }
}

TEST_CASE("basis changes") {
  auto d = testutil::default_device();
  double dk = -2e-5;
  NetworkSolution net = build_asymptotic_in(d, S, dk);
  BasisTransform t = build_local_transform(d, S, dk);
  Vec a = Vec::Random(25);
  Vec loc = change_basis(a, BasisDir::InToLoc, t);
  CHECK((change_basis(loc, BasisDir::LocToIn, t) - a).norm() < 1e-12 * a.norm());
  Vec out = change_basis(loc, BasisDir::LocToOut, t);
  CHECK((out - net.S * a).norm() < 1e-10 * a.norm());
  // pulse initialisation: only the real waveguide is driven
  Vec e0 = Vec::Zero(25);
  e0(0) = cplx(0.3, -0.2);
  Vec l0 = change_basis(e0, BasisDir::InToLoc, t);
  CHECK((l0 - t.X.row(0).transpose() * e0(0)).norm() < 1e-12 * l0.norm());
  CHECK_THROWS_AS(change_basis(Vec::Zero(3), BasisDir::InToLoc, t), DomainError);
}

TEST_CASE("zero-coupling phantom cannot anchor a local mode") {
  auto d = testutil::default_device();
  d.layout.sigma[S][3] = 1.0;
  CHECK_THROWS_AS(build_local_transform(d, S, 0.0), ConfigError);
}

TEST_CASE("envelope dump") {
  auto d = testutil::default_device();
  NetworkSolution net = build_asymptotic_in(d, P, 0.0);
  std::ostringstream os;
  dump_envelopes(os, d, net.env, 2);
  CHECK(os.str().find("P,0,0,wg,0,1,0") != std::string::npos);
}
