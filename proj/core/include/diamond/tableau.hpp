#pragma once

#include <Eigen/Dense>

namespace diamond {

/// Runge–Kutta coefficients (A, b, c) of an r-stage method, together with
/// A^{-1} and its row sums, which the reduced stage system needs.
struct RKTableau {
  int r = 0;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::MatrixXd A_inv;
  Eigen::VectorXd A_inv_rowsum;
};

/// Gauss–Legendre collocation tableau with r stages (order 2r).
/// Throws InvalidArgument for r < 1.
RKTableau gauss_tableau(int r);

}  // namespace diamond
