#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

namespace diamond {

/// A multi-Hamiltonian PDE  K z_t + L z_x = grad S(z)  with constant
/// skew-symmetric K, L.
class PDESystem {
 public:
  using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Hessian = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
  using Field = std::function<Eigen::VectorXd(double x, double t)>;

  /// Validates skew-symmetry of K and L (1e-14) and the shapes of the
  /// callbacks; throws InvalidArgument on failure.
  PDESystem(Eigen::MatrixXd K, Eigen::MatrixXd L, Gradient grad_S, Hessian hess_S,
            std::optional<Field> exact = std::nullopt);

  int n() const { return static_cast<int>(K_.rows()); }
  const Eigen::MatrixXd& K() const { return K_; }
  const Eigen::MatrixXd& L() const { return L_; }
  Eigen::VectorXd grad_S(const Eigen::VectorXd& z) const { return grad_S_(z); }
  Eigen::MatrixXd hess_S(const Eigen::VectorXd& z) const { return hess_S_(z); }
  bool has_exact() const { return exact_.has_value(); }
  /// Throws UnsupportedOperation when no exact solution was supplied.
  Eigen::VectorXd exact(double x, double t) const;

  /// Largest relative deviation between hess_S and a central difference of
  /// grad_S at z.
  double hessian_consistency(const Eigen::VectorXd& z, double h = 1e-6) const;

 private:
  Eigen::MatrixXd K_;
  Eigen::MatrixXd L_;
  Gradient grad_S_;
  Hessian hess_S_;
  std::optional<Field> exact_;
};

/// Uniform diamond mesh on [a, b]: N diamonds per row of width dx and height dt.
struct MeshConfig {
  double a = 0.0;
  double b = 1.0;
  int N = 1;
  double dx = 1.0;
  double dt = 1.0;
  double lambda = 1.0;
  double t_final = 0.0;

  /// dx = (b - a)/N, dt = courant * dx.  Throws InvalidArgument on
  /// non-positive sizes.
  static MeshConfig make(double a, double b, int N, double courant, double t_final);
};

/// Coefficients of the PDE after mapping one diamond onto the unit square.
struct TransformedCoeffs {
  Eigen::MatrixXd K_tilde;
  Eigen::MatrixXd L_tilde;
};

/// K~ = K/dt - L/dx,  L~ = K/dt + L/dx.
TransformedCoeffs transform_coeffs(const PDESystem& pde, double dx, double dt);

}  // namespace diamond
