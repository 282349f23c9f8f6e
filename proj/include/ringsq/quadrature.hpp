#pragma once

#include <vector>

namespace ringsq {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Gauss-Legendre rule, cached per order
const GaussRule& gauss_legendre(int n);

}  // namespace ringsq
