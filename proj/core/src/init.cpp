#include "diamond/init.hpp"

#include <algorithm>
#include <cctype>

#include "diamond/errors.hpp"

namespace diamond {

InitMethod parse_init(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (s == "exact") return InitMethod::Exact;
  if (s == "diamond") return InitMethod::Diamond;
  if (s == "phantom" || s == "boundary") return InitMethod::Phantom;
  throw InvalidArgument("unknown init method '" + std::string(name) + "'");
}

std::string init_name(InitMethod m) {
  switch (m) {
    case InitMethod::Exact:
      return "exact";
    case InitMethod::Diamond:
      return "diamond";
    case InitMethod::Phantom:
      return "phantom";
  }
  return "?";
}

namespace {

Eigen::VectorXd cauchy(const ExactWave& e, double x) {
  return Eigen::Vector3d(e.u(x, 0.0), e.u_t(x, 0.0), e.u_x(x, 0.0));
}

ZigZagState empty_state(const MeshConfig& mesh) {
  ZigZagState s;
  s.row_time = 0.0;
  s.phase = Phase::ValleyAtLeft;
  s.edges.resize(2 * mesh.N);
  return s;
}

}  // namespace

ZigZagState init_exact(const WaveProblem& p, const MeshConfig& mesh, const RKTableau& tab) {
  const ExactWave& e = p.require_exact();
  ZigZagState s = empty_state(mesh);
  for (int k = 0; k < 2 * mesh.N; ++k) {
    Eigen::MatrixXd v(3, tab.r);
    for (int m = 0; m < tab.r; ++m) {
      const NodePoint q = node_point(mesh, tab, s.phase, s.row_time, k, m);
      v.col(m) = Eigen::Vector3d(e.u(q.x, q.t), e.u_t(q.x, q.t), e.u_x(q.x, q.t));
    }
    s.edges[k] = EdgeData(std::move(v));
  }
  return s;
}

StageCoefficients triangle_coeffs(const PDESystem& pde, const MeshConfig& mesh,
                                  const RKTableau& tab) {
  const int r = tab.r;
  StageCoefficients sc;
  sc.K_tilde.resize(r * r);
  sc.L_tilde.resize(r * r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < r; ++i) {
      const double xt = tab.c(i);
      const double tt = tab.c(j);
      const double factor = 2.0 / (mesh.dx * mesh.dt * (xt + tt));
      const int s = StageBlock::index(r, i, j);
      sc.K_tilde[s] = factor * (mesh.dx * pde.K() - tt * mesh.dt * pde.L());
      sc.L_tilde[s] = factor * (mesh.dx * pde.K() + xt * mesh.dt * pde.L());
    }
  }
  return sc;
}

ZigZagState init_diamond(const WaveProblem& p, const MeshConfig& mesh, const RKTableau& tab,
                         const SolverConfig& cfg, NewtonTally* tally) {
  const ExactWave& e = p.require_exact();
  const PDESystem pde = wave_system(p);
  const StageCoefficients coeffs = triangle_coeffs(pde, mesh, tab);
  ZigZagState s = empty_state(mesh);
  const int r = tab.r;
  for (int k = 0; k < mesh.N; ++k) {
    const double xc = mesh.a + (k + 0.5) * mesh.dx;
    LocalSystem sys;
    sys.coeffs = coeffs;
    // Square left edge: x = xc - dx/2 t~, bottom edge: x = xc + dx/2 x~, both on t = 0.
    Eigen::MatrixXd left(3, r), bottom(3, r);
    for (int m = 0; m < r; ++m) {
      left.col(m) = cauchy(e, xc - 0.5 * mesh.dx * tab.c(m));
      bottom.col(m) = cauchy(e, xc + 0.5 * mesh.dx * tab.c(m));
    }
    sys.left = EdgeData(std::move(left));
    sys.bottom = EdgeData(std::move(bottom));
    LocalSolution sol = solve_local(pde, tab, sys, cfg);
    if (tally) tally->add(sol.stats);
    // Square top is the rising edge from the left base corner, square right
    // the falling edge into the right base corner.
    s.edges[2 * k] = std::move(sol.top);
    s.edges[2 * k + 1] = std::move(sol.right);
  }
  return s;
}

std::vector<StageConstraint> phantom_init_constraints(const WaveProblem& p,
                                                      const MeshConfig& mesh,
                                                      const RKTableau& tab, double xc) {
  const ExactWave& e = p.require_exact();
  if (!e.u_tx || !e.u_xx) {
    throw UnsupportedOperation("phantom initialization needs u_tx and u_xx of the initial data");
  }
  const int r = tab.r;
  auto unit = [](int k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
    v(k) = 1.0;
    return v;
  };
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  std::vector<StageConstraint> out;
  out.reserve(6 * r);
  for (int i = 0; i < r; ++i) {
    const int j = r - 1 - i;
    // (x~, t~) -> x = xc + dx (x~ - t~)/2 on t = 0
    const double x = xc + 0.5 * mesh.dx * (tab.c(i) - tab.c(j));
    const double u = e.u(x, 0.0), ut = e.u_t(x, 0.0), ux = e.u_x(x, 0.0);
    const double utx = e.u_tx(x, 0.0), uxx = e.u_xx(x, 0.0);
    out.push_back({i, j, unit(0), zero, zero, u});
    out.push_back({i, j, unit(1), zero, zero, ut});
    out.push_back({i, j, unit(2), zero, zero, ux});
    // X - T = dx z_x,  X + T = dt z_t
    out.push_back({i, j, zero, unit(1), -unit(1), mesh.dx * utx});
    out.push_back({i, j, zero, unit(2), -unit(2), mesh.dx * uxx});
    out.push_back({i, j, zero, unit(2), unit(2), mesh.dt * utx});
  }
  return out;
}

ZigZagState init_phantom(const WaveProblem& p, const MeshConfig& mesh, const RKTableau& tab,
                         const SolverConfig& cfg, NewtonTally* tally) {
  const ExactWave& e = p.require_exact();
  const PDESystem pde = wave_system(p);
  const StageCoefficients coeffs =
      StageCoefficients::uniform(transform_coeffs(pde, mesh.dx, mesh.dt));
  ZigZagState s = empty_state(mesh);
  const int r = tab.r;
  for (int k = 0; k < mesh.N; ++k) {
    const double xc = mesh.a + (k + 0.5) * mesh.dx;
    LocalSystem sys;
    sys.coeffs = coeffs;
    sys.left_free = true;
    sys.bottom_free = true;
    // Starting guess: Cauchy data at the x of each lower-edge node.
    Eigen::MatrixXd left(3, r), bottom(3, r);
    for (int m = 0; m < r; ++m) {
      left.col(m) = cauchy(e, xc - 0.5 * mesh.dx * tab.c(m));
      bottom.col(m) = cauchy(e, xc + 0.5 * mesh.dx * tab.c(m));
    }
    sys.left = EdgeData(std::move(left));
    sys.bottom = EdgeData(std::move(bottom));
    sys.constraints = phantom_init_constraints(p, mesh, tab, xc);
    LocalSolution sol = solve_local(pde, tab, sys, cfg);
    if (tally) tally->add(sol.stats);
    s.edges[2 * k] = std::move(sol.top);
    s.edges[2 * k + 1] = std::move(sol.right);
  }
  return s;
}

ZigZagState initialize(InitMethod method, const WaveProblem& p, const MeshConfig& mesh,
                       const RKTableau& tab, const SolverConfig& cfg, NewtonTally* tally) {
  switch (method) {
    case InitMethod::Exact:
      return init_exact(p, mesh, tab);
    case InitMethod::Diamond:
      return init_diamond(p, mesh, tab, cfg, tally);
    case InitMethod::Phantom:
      return init_phantom(p, mesh, tab, cfg, tally);
  }
  throw InvalidArgument("initialize: unknown method");
}

}  // namespace diamond
