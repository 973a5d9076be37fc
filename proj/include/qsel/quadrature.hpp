#pragma once

#include <Eigen/Dense>

namespace qsel {

/// n-point Gauss-Legendre rule on [a, b].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

}  // namespace qsel
