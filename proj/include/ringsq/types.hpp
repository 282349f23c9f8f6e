#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace ringsq {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

constexpr cplx I1{0.0, 1.0};
constexpr double PI = 3.14159265358979323846;

// lengths um, times ps, energies pJ, power pJ/ps (= W)
constexpr double HBAR = 1.054571817e-10;  // pJ ps
constexpr double C_LIGHT = 299.792458;    // um/ps
constexpr double MW = 1e-3;               // 1 mW in pJ/ps
constexpr double PER_W_M = 1e-6;          // 1/(W m) in 1/((pJ/ps) um)

inline cplx expi(double phase) { return std::polar(1.0, phase); }

}  // namespace ringsq
