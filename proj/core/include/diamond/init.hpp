#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "diamond/diamond_solver.hpp"
#include "diamond/problems.hpp"
#include "diamond/zigzag.hpp"

namespace diamond {

enum class InitMethod { Exact, Diamond, Phantom };

InitMethod parse_init(std::string_view name);
std::string init_name(InitMethod m);

/// Every initializer returns the zig-zag with valleys on t = 0 at
/// a + k dx and peaks at t = dt/2 (row_time 0, Phase::ValleyAtLeft).

/// Node values taken from the exact solution at their (x, t).
ZigZagState init_exact(const WaveProblem& p, const MeshConfig& mesh, const RKTableau& tab);

/// Coefficients on the unit square for the triangle with base
/// [xc - dx/2, xc + dx/2] on t = 0 and apex (xc, dt/2), under
/// x = xc + dx/2 (x~ - t~),  t = dt/2 x~ t~.
StageCoefficients triangle_coeffs(const PDESystem& pde, const MeshConfig& mesh,
                                  const RKTableau& tab);

/// Triangle initialization: the half diamonds cut by t = 0 are mapped onto
/// the unit square with position-dependent K~, L~ and solved from the
/// Cauchy data on their base.
ZigZagState init_diamond(const WaveProblem& p, const MeshConfig& mesh, const RKTableau& tab,
                         const SolverConfig& cfg, NewtonTally* tally = nullptr);

/// The 6r conditions imposed on the stages (c_i, c_{r+1-i}) of a phantom
/// diamond centred at (xc, 0): z = (u, u_t, u_x), v_x = u_tx, w_x = u_xx and
/// w_t = u_tx.
std::vector<StageConstraint> phantom_init_constraints(const WaveProblem& p,
                                                      const MeshConfig& mesh,
                                                      const RKTableau& tab, double xc);

/// Phantom diamond initialization: diamonds centred on t = 0 with both lower
/// edges freed and the Cauchy data imposed on the stages lying on t = 0.
ZigZagState init_phantom(const WaveProblem& p, const MeshConfig& mesh, const RKTableau& tab,
                         const SolverConfig& cfg, NewtonTally* tally = nullptr);

ZigZagState initialize(InitMethod method, const WaveProblem& p, const MeshConfig& mesh,
                       const RKTableau& tab, const SolverConfig& cfg,
                       NewtonTally* tally = nullptr);

}  // namespace diamond
