#include "diamond/pde.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "diamond/errors.hpp"

namespace diamond {

PDESystem::PDESystem(Eigen::MatrixXd K, Eigen::MatrixXd L, Gradient grad_S, Hessian hess_S,
                     std::optional<Field> exact)
    : K_(std::move(K)),
      L_(std::move(L)),
      grad_S_(std::move(grad_S)),
      hess_S_(std::move(hess_S)),
      exact_(std::move(exact)) {
  if (K_.rows() == 0 || K_.rows() != K_.cols() || L_.rows() != K_.rows() ||
      L_.cols() != K_.cols()) {
    throw InvalidArgument("PDESystem: K and L must be square matrices of equal size");
  }
  if ((K_ + K_.transpose()).cwiseAbs().maxCoeff() > 1e-14) {
    throw InvalidArgument("PDESystem: K is not skew-symmetric");
  }
  if ((L_ + L_.transpose()).cwiseAbs().maxCoeff() > 1e-14) {
    throw InvalidArgument("PDESystem: L is not skew-symmetric");
  }
  if (!grad_S_ || !hess_S_) {
    throw InvalidArgument("PDESystem: grad_S and hess_S are required");
  }
}

Eigen::VectorXd PDESystem::exact(double x, double t) const {
  if (!exact_) throw UnsupportedOperation("PDESystem: no exact solution available");
  return (*exact_)(x, t);
}

double PDESystem::hessian_consistency(const Eigen::VectorXd& z, double h) const {
  const Eigen::MatrixXd H = hess_S(z);
  double worst = 0.0;
  for (int k = 0; k < n(); ++k) {
    Eigen::VectorXd zp = z, zm = z;
    zp(k) += h;
    zm(k) -= h;
    const Eigen::VectorXd col = (grad_S(zp) - grad_S(zm)) / (2.0 * h);
    for (int i = 0; i < n(); ++i) {
      const double scale = std::max(1.0, std::abs(H(i, k)));
      worst = std::max(worst, std::abs(col(i) - H(i, k)) / scale);
    }
  }
  return worst;
}

MeshConfig MeshConfig::make(double a, double b, int N, double courant, double t_final) {
  if (!(b > a)) throw InvalidArgument("MeshConfig: need b > a");
  if (N < 1) throw InvalidArgument("MeshConfig: need N >= 1");
  if (!(courant > 0.0)) throw InvalidArgument("MeshConfig: Courant number must be positive");
  if (t_final < 0.0) throw InvalidArgument("MeshConfig: t_final must be non-negative");
  MeshConfig m;
  m.a = a;
  m.b = b;
  m.N = N;
  m.dx = (b - a) / N;
  m.dt = courant * m.dx;
  m.lambda = m.dt / m.dx;
  m.t_final = t_final;
  return m;
}

TransformedCoeffs transform_coeffs(const PDESystem& pde, double dx, double dt) {
  if (!(dx > 0.0) || !(dt > 0.0)) {
    throw InvalidArgument("transform_coeffs: dx and dt must be positive");
  }
  return {pde.K() / dt - pde.L() / dx, pde.K() / dt + pde.L() / dx};
}

}  // namespace diamond
