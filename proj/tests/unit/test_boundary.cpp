#include <gtest/gtest.h>

#include <cmath>

#include "diamond/boundary.hpp"
#include "diamond/errors.hpp"
#include "diamond/timeloop.hpp"

using namespace diamond;

namespace {

Eigen::MatrixXd exact_edge(const ExactWave& e, const RKTableau& tab,
                           const std::function<NodePoint(double)>& at) {
  Eigen::MatrixXd v(3, tab.r);
  for (int k = 0; k < tab.r; ++k) {
    const NodePoint q = at(tab.c(k));
    v.col(k) = Eigen::Vector3d(e.u(q.x, q.t), e.u_t(q.x, q.t), e.u_x(q.x, q.t));
  }
  return v;
}

}  // namespace

TEST(Boundary, ParseCodes) {
  EXPECT_EQ(parse_bc("periodic"), std::pair(BoundaryKind::Periodic, BoundaryKind::Periodic));
  EXPECT_EQ(parse_bc("DN"), std::pair(BoundaryKind::Dirichlet, BoundaryKind::Neumann));
  EXPECT_EQ(bc_code(BoundaryKind::Neumann, BoundaryKind::Dirichlet), "nd");
  EXPECT_EQ(bc_code(BoundaryKind::Periodic, BoundaryKind::Periodic), "periodic");
  EXPECT_THROW(parse_bc("dx"), InvalidArgument);
  EXPECT_THROW(parse_bc("ddd"), InvalidArgument);
}

TEST(Boundary, SpecValidation) {
  const WaveProblem p = sample_problem("SincosDD");
  BoundarySpec s = boundary_from_problem(p);
  EXPECT_FALSE(s.periodic());
  s.right.kind = BoundaryKind::Periodic;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = boundary_from_problem(p);
  s.left.g2 = nullptr;
  EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(Boundary, ConstraintCount) {
  const WaveProblem p = sample_problem("CoscosDN");
  const BoundarySpec s = boundary_from_problem(p);
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, 8, 0.5, 1.0);
  for (int r = 1; r <= 4; ++r) {
    const RKTableau tab = gauss_tableau(r);
    EXPECT_EQ(static_cast<int>(boundary_constraints(s.left, p, mesh, tab, 0.0).size()), 3 * r);
    EXPECT_EQ(static_cast<int>(boundary_constraints(s.right, p, mesh, tab, 0.0).size()), 3 * r);
  }
}

// u = sin x cos t, f = 0: at x = 0.2 the imposed w_x = u_tt = -sin(0.2) cos(tau).
TEST(Boundary, SincosDirichletSecondDerivative) {
  const WaveProblem p = sample_problem("SincosDD");
  const BoundarySpec s = boundary_from_problem(p);
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, 8, 0.5, 1.0);
  const RKTableau tab = gauss_tableau(2);
  const double tb = 0.35;
  const auto cs = boundary_constraints(s.left, p, mesh, tab, tb);
  int seen = 0;
  for (const auto& c : cs) {
    EXPECT_EQ(c.i, c.j);
    if (c.wx(2) == 1.0 && c.wt(2) == -1.0) {
      const double tau = tb + tab.c(c.i) * mesh.dt;
      EXPECT_NEAR(c.value / mesh.dx, -std::sin(0.2) * std::cos(tau), 1e-14);
      ++seen;
    }
  }
  EXPECT_EQ(seen, 2);
}

TEST(Boundary, HomogeneousDirichletKeepsZero) {
  const WaveProblem p = sample_problem("SincosDD");
  const PDESystem pde = wave_system(p);
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, 8, 0.5, 1.0);
  BoundarySpec s;
  for (BoundarySide* side : {&s.left, &s.right}) {
    side->kind = BoundaryKind::Dirichlet;
    side->g = side->g1 = side->g2 = [](double) { return 0.0; };
  }
  s.left.x = p.a;
  s.right.x = p.b;
  const StageCoefficients sc =
      StageCoefficients::uniform(transform_coeffs(pde, mesh.dx, mesh.dt));
  for (int r = 1; r <= 3; ++r) {
    const RKTableau tab = gauss_tableau(r);
    const EdgeData zero = EdgeData::constant(Eigen::Vector3d::Zero(), r);
    for (Side side : {Side::Left, Side::Right}) {
      const BoundaryResult b =
          solve_boundary_diamond(side, zero, s, p, pde, mesh, tab, sc, 0.0, SolverConfig{});
      EXPECT_LT(b.inner.values.cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(Boundary, DirichletTraceOnDiagonalStages) {
  const WaveProblem p = sample_problem("CoscosDD");
  const PDESystem pde = wave_system(p);
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, 16, 0.5, 1.0);
  const RKTableau tab = gauss_tableau(3);
  const BoundarySpec s = boundary_from_problem(p);
  const ExactWave& e = *p.exact;
  const double tb = 0.4;
  const EdgeData bottom(exact_edge(e, tab, [&](double c) {
    return NodePoint{p.a + 0.5 * mesh.dx * c, tb + 0.5 * mesh.dt * c};
  }));
  const StageCoefficients sc =
      StageCoefficients::uniform(transform_coeffs(pde, mesh.dx, mesh.dt));
  const BoundaryResult b =
      solve_boundary_diamond(Side::Left, bottom, s, p, pde, mesh, tab, sc, tb, SolverConfig{});
  for (int i = 0; i < tab.r; ++i) {
    const double t = tb + tab.c(i) * mesh.dt;
    EXPECT_NEAR(b.stages.Zs(i, i)(0), e.u(p.a, t), 1e-12);
    EXPECT_NEAR(b.stages.Zs(i, i)(1), e.u_t(p.a, t), 1e-12);
  }
  // Inner output is the rising edge from (a + dx/2, tb + dt/2).
  const Eigen::MatrixXd want = exact_edge(e, tab, [&](double c) {
    return NodePoint{p.a + 0.5 * mesh.dx * (1 - c), tb + 0.5 * mesh.dt * (1 + c)};
  });
  EXPECT_LT((b.inner.values - want).cwiseAbs().maxCoeff(), 4e-5);
  EXPECT_LT((b.inner.values - want).row(0).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Boundary, NeumannTrace) {
  const WaveProblem p = sample_problem("SincosDN");
  const PDESystem pde = wave_system(p);
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, 16, 0.5, 1.0);
  const RKTableau tab = gauss_tableau(2);
  const BoundarySpec s = boundary_from_problem(p);
  const ExactWave& e = *p.exact;
  const double tb = 0.25;
  const EdgeData left(exact_edge(e, tab, [&](double c) {
    return NodePoint{p.b - 0.5 * mesh.dx * c, tb + 0.5 * mesh.dt * c};
  }));
  const StageCoefficients sc =
      StageCoefficients::uniform(transform_coeffs(pde, mesh.dx, mesh.dt));
  const BoundaryResult b =
      solve_boundary_diamond(Side::Right, left, s, p, pde, mesh, tab, sc, tb, SolverConfig{});
  for (int i = 0; i < tab.r; ++i) {
    EXPECT_NEAR(b.stages.Zs(i, i)(2), e.u_x(p.b, tb + tab.c(i) * mesh.dt), 1e-12);
  }
  // Inner output is the top edge, rising from (b - dx/2, tb + dt/2).
  const Eigen::MatrixXd want = exact_edge(e, tab, [&](double c) {
    return NodePoint{p.b - 0.5 * mesh.dx * (1 - c), tb + 0.5 * mesh.dt * (1 + c)};
  });
  EXPECT_LT((b.inner.values - want).cwiseAbs().maxCoeff(), 5e-4);
  EXPECT_LT((b.inner.values - want).row(0).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Boundary, PeriodicSideHasNoPhantom) {
  const WaveProblem p = sample_problem("Sincos");
  const BoundarySpec s = boundary_from_problem(p);
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, 8, 0.5, 1.0);
  EXPECT_THROW(boundary_constraints(s.left, p, mesh, gauss_tableau(1), 0.0), InvalidArgument);
}

TEST(Boundary, PeriodicWrapCopiesLastEdge) {
  const WaveProblem p = sample_problem("Sincos");
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, 3, 0.5, 1.0);
  const RKTableau tab = gauss_tableau(2);
  const ZigZagState z = init_exact(p, mesh, tab);
  const EdgeData w = periodic_wrap(z, boundary_from_problem(p));
  EXPECT_EQ(w.values, z.edges.back().values);
  ZigZagState peak = z;
  peak.phase = Phase::PeakAtLeft;
  EXPECT_THROW(periodic_wrap(peak, boundary_from_problem(p)), InvalidState);
  EXPECT_THROW(periodic_wrap(z, boundary_from_problem(sample_problem("SincosDD"))), InvalidState);
}

TEST(Boundary, ConstantStateSurvivesWrap) {
  const WaveProblem p = sample_problem("Sincos");  // f = 0, so (c, 0, 0) solves it
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, 3, 0.5, 1.0);
  const RKTableau tab = gauss_tableau(2);
  const SchemeContext ctx(p, mesh, tab, boundary_from_problem(p), SolverConfig{});
  ZigZagState z;
  z.edges.assign(6, EdgeData::constant(Eigen::Vector3d(0.7, 0, 0), 2));
  for (int s = 0; s < 4; ++s) z = half_step(ctx, z, s);
  for (const auto& e : z.edges) {
    EXPECT_LT((e.values - EdgeData::constant(Eigen::Vector3d(0.7, 0, 0), 2).values)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-13);
  }
}
