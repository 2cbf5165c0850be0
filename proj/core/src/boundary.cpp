#include "diamond/boundary.hpp"

#include <algorithm>
#include <cctype>

#include "diamond/errors.hpp"

namespace diamond {

namespace {

Eigen::VectorXd unit(int n, int k) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v(k) = 1.0;
  return v;
}

StageConstraint on_z(int i, int j, int comp, double value) {
  return {i, j, unit(3, comp), Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), value};
}

// X - T = dx z_x  and  X + T = dt z_t  on the unit square of a diamond.
StageConstraint on_x_derivative(int i, int j, int comp, double dx, double value) {
  return {i, j, Eigen::VectorXd::Zero(3), unit(3, comp), -unit(3, comp), dx * value};
}

StageConstraint on_t_derivative(int i, int j, int comp, double dt, double value) {
  return {i, j, Eigen::VectorXd::Zero(3), unit(3, comp), unit(3, comp), dt * value};
}

char kind_letter(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::Dirichlet:
      return 'd';
    case BoundaryKind::Neumann:
      return 'n';
    case BoundaryKind::Periodic:
      break;
  }
  return 'p';
}

}  // namespace

void BoundarySpec::validate() const {
  const bool lp = left.kind == BoundaryKind::Periodic;
  const bool rp = right.kind == BoundaryKind::Periodic;
  if (lp != rp) throw InvalidArgument("BoundarySpec: periodic must be set on both sides or neither");
  for (const BoundarySide* s : {&left, &right}) {
    if (s->kind == BoundaryKind::Dirichlet && !(s->g && s->g1 && s->g2)) {
      throw InvalidArgument("BoundarySpec: Dirichlet side needs g, g', g''");
    }
    if (s->kind == BoundaryKind::Neumann && !(s->h && s->h1)) {
      throw InvalidArgument("BoundarySpec: Neumann side needs h, h'");
    }
  }
}

std::pair<BoundaryKind, BoundaryKind> parse_bc(std::string_view code) {
  std::string c(code);
  std::transform(c.begin(), c.end(), c.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (c == "periodic") return {BoundaryKind::Periodic, BoundaryKind::Periodic};
  auto letter = [&](char ch) {
    if (ch == 'd') return BoundaryKind::Dirichlet;
    if (ch == 'n') return BoundaryKind::Neumann;
    throw InvalidArgument("unknown boundary code '" + std::string(code) + "'");
  };
  if (c.size() != 2) throw InvalidArgument("unknown boundary code '" + std::string(code) + "'");
  return {letter(c[0]), letter(c[1])};
}

std::string bc_code(BoundaryKind left, BoundaryKind right) {
  if (left == BoundaryKind::Periodic && right == BoundaryKind::Periodic) return "periodic";
  return {kind_letter(left), kind_letter(right)};
}

BoundarySpec boundary_from_problem(const WaveProblem& p, BoundaryKind left, BoundaryKind right) {
  BoundarySpec spec;
  auto fill = [&](BoundarySide& side, BoundaryKind kind, double x) {
    side.kind = kind;
    side.x = x;
    if (kind == BoundaryKind::Periodic) return;
    const ExactWave& e = p.require_exact();
    side.g = [u = e.u, x](double t) { return u(x, t); };
    side.g1 = [ut = e.u_t, x](double t) { return ut(x, t); };
    side.g2 = [utt = e.u_tt, x](double t) { return utt(x, t); };
    side.h = [ux = e.u_x, x](double t) { return ux(x, t); };
    side.h1 = [utx = e.u_tx, x](double t) { return utx(x, t); };
  };
  fill(spec.left, left, p.a);
  fill(spec.right, right, p.b);
  spec.validate();
  return spec;
}

BoundarySpec boundary_from_problem(const WaveProblem& p) {
  return boundary_from_problem(p, p.left_bc, p.right_bc);
}

EdgeData periodic_wrap(const ZigZagState& state, const BoundarySpec& spec) {
  if (!spec.periodic()) throw InvalidState("periodic_wrap: boundary is not periodic");
  if (state.phase != Phase::ValleyAtLeft) {
    throw InvalidState("periodic_wrap: this phase has no missing edge");
  }
  if (state.edges.empty()) throw InvalidState("periodic_wrap: empty zig-zag");
  return state.edges.back();
}

std::vector<StageConstraint> boundary_constraints(const BoundarySide& side,
                                                  const WaveProblem& p, const MeshConfig& mesh,
                                                  const RKTableau& tab, double t_bottom) {
  std::vector<StageConstraint> out;
  out.reserve(3 * tab.r);
  for (int i = 0; i < tab.r; ++i) {
    const double t = t_bottom + tab.c(i) * mesh.dt;
    switch (side.kind) {
      case BoundaryKind::Dirichlet: {
        const double g = side.g(t);
        out.push_back(on_z(i, i, 0, g));
        out.push_back(on_z(i, i, 1, side.g1(t)));
        // u_xx = u_tt - f(u)
        out.push_back(on_x_derivative(i, i, 2, mesh.dx, side.g2(t) - p.f(g)));
        break;
      }
      case BoundaryKind::Neumann: {
        const double h1 = side.h1(t);
        out.push_back(on_z(i, i, 2, side.h(t)));
        out.push_back(on_t_derivative(i, i, 2, mesh.dt, h1));
        out.push_back(on_x_derivative(i, i, 1, mesh.dx, h1));
        break;
      }
      case BoundaryKind::Periodic:
        throw InvalidArgument("boundary_constraints: periodic side has no phantom diamond");
    }
  }
  return out;
}

BoundaryResult solve_boundary_diamond(Side side, const EdgeData& z_inner,
                                      const BoundarySpec& spec, const WaveProblem& p,
                                      const PDESystem& pde, const MeshConfig& mesh,
                                      const RKTableau& tab, const StageCoefficients& coeffs,
                                      double t_bottom, const SolverConfig& cfg) {
  if (pde.n() != 3) throw UnsupportedOperation("boundary closures need the (u, v, w) formulation");
  const BoundarySide& bs = side == Side::Left ? spec.left : spec.right;
  if (bs.kind == BoundaryKind::Periodic) {
    throw InvalidArgument("solve_boundary_diamond: side is periodic");
  }
  LocalSystem sys;
  sys.coeffs = coeffs;
  if (side == Side::Left) {
    sys.bottom = z_inner;
    sys.left = z_inner;  // starting guess for the freed exterior edge
    sys.left_free = true;
  } else {
    sys.left = z_inner;
    sys.bottom = z_inner;
    sys.bottom_free = true;
  }
  sys.constraints = boundary_constraints(bs, p, mesh, tab, t_bottom);
  LocalSolution sol = solve_local(pde, tab, sys, cfg);
  BoundaryResult out;
  if (side == Side::Left) {
    out.inner = std::move(sol.right);
    out.exterior = std::move(sol.top);
    out.freed = std::move(sol.left);
  } else {
    out.inner = std::move(sol.top);
    out.exterior = std::move(sol.right);
    out.freed = std::move(sol.bottom);
  }
  out.stages = std::move(sol.stages);
  out.stats = sol.stats;
  return out;
}

}  // namespace diamond
