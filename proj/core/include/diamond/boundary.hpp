#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "diamond/diamond_solver.hpp"
#include "diamond/problems.hpp"
#include "diamond/zigzag.hpp"

namespace diamond {

enum class Side { Left, Right };

/// Boundary data on one side.  Dirichlet uses g, g', g'' (u(x_b, t));
/// Neumann uses h, h' (u_x(x_b, t)).
struct BoundarySide {
  BoundaryKind kind = BoundaryKind::Periodic;
  double x = 0.0;
  std::function<double(double)> g, g1, g2;
  std::function<double(double)> h, h1;
};

struct BoundarySpec {
  BoundarySide left;
  BoundarySide right;

  bool periodic() const { return left.kind == BoundaryKind::Periodic; }
  /// Periodic must be set on both sides or neither; data functions must be
  /// present for the chosen kinds.  Throws InvalidArgument.
  void validate() const;
};

/// Parses "periodic", "dd", "dn", "nd", "nn" (first letter is the left side).
std::pair<BoundaryKind, BoundaryKind> parse_bc(std::string_view code);
std::string bc_code(BoundaryKind left, BoundaryKind right);

/// Boundary data taken from the problem's exact solution.
BoundarySpec boundary_from_problem(const WaveProblem& p, BoundaryKind left, BoundaryKind right);
BoundarySpec boundary_from_problem(const WaveProblem& p);

/// Returns the edge that closes the row at x = a when the zig-zag starts
/// with a valley there: a copy of the last edge (the down-edge into b).
/// Throws InvalidState for non-periodic specs or a state whose phase needs
/// no wrap.
EdgeData periodic_wrap(const ZigZagState& state, const BoundarySpec& spec);

/// The 3r stage conditions on a boundary phantom diamond whose bottom corner
/// is at time t_bottom.  The boundary line maps onto the diagonal stages
/// (c_i, c_i), at times t_bottom + c_i dt.
std::vector<StageConstraint> boundary_constraints(const BoundarySide& side,
                                                  const WaveProblem& p, const MeshConfig& mesh,
                                                  const RKTableau& tab, double t_bottom);

struct BoundaryResult {
  EdgeData inner;     ///< upper edge inside the domain
  EdgeData exterior;  ///< upper edge outside the domain (not used by the scheme)
  EdgeData freed;     ///< solved exterior lower edge
  StageBlock stages;
  SolveStats stats;
};

/// Phantom diamond straddling x = a (Side::Left, z_inner is its lower-right
/// edge) or x = b (Side::Right, z_inner is its lower-left edge).  The
/// exterior lower edge is solved for together with the stages.
BoundaryResult solve_boundary_diamond(Side side, const EdgeData& z_inner,
                                      const BoundarySpec& spec, const WaveProblem& p,
                                      const PDESystem& pde, const MeshConfig& mesh,
                                      const RKTableau& tab, const StageCoefficients& coeffs,
                                      double t_bottom, const SolverConfig& cfg);

}  // namespace diamond
