#pragma once

#include "ringsq/device.hpp"

#include <random>

namespace testutil {

inline ringsq::DeviceSpec default_device(double finesse = 780, double eta = 0.75, int n_ring = 20) {
  ringsq::DeviceParams p;
  p.finesse = finesse;
  p.eta_esc = eta;
  p.n_ring = n_ring;
  return ringsq::build_device(p);
}

inline double max_abs(const ringsq::Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testutil
