#pragma once

#include <optional>
#include <string>
#include <vector>

#include "diamond/boundary.hpp"
#include "diamond/diamond_solver.hpp"
#include "diamond/init.hpp"
#include "diamond/problems.hpp"
#include "diamond/zigzag.hpp"

namespace diamond {

/// Everything a diamond solve needs, fixed for a run.
struct SchemeContext {
  WaveProblem problem;
  PDESystem pde;
  MeshConfig mesh;
  RKTableau tab;
  BoundarySpec bc;
  SolverConfig cfg;
  TransformedCoeffs coeffs;
  StageCoefficients stage_coeffs;

  SchemeContext(WaveProblem p, MeshConfig m, RKTableau t, BoundarySpec b, SolverConfig c);
};

struct StepOutput {
  EdgeData right;
  EdgeData top;
  SolveStats stats;
};

/// Per-diamond kernels shared by the serial and parallel drivers.
StepOutput step_interior(const SchemeContext& ctx, const EdgeData& left, const EdgeData& bottom);
/// Left phantom: only `right` is meaningful.
StepOutput step_left_boundary(const SchemeContext& ctx, const EdgeData& bottom, double t_bottom);
/// Right phantom: only `top` is meaningful.
StepOutput step_right_boundary(const SchemeContext& ctx, const EdgeData& left, double t_bottom);

/// Diamonds solved in a half-step from `phase`.  From ValleyAtLeft these
/// are centred at a + k dx, k = 0..N-1 (periodic) or 0..N (the two ends are
/// boundary phantoms); from PeakAtLeft at a + (k + 1/2) dx, k = 0..N-1.
int diamonds_in_row(const SchemeContext& ctx, Phase phase);

/// Solves diamond k of the row above `edges` and writes its in-domain
/// outputs into `next`.  `wrap` is the left edge of diamond 0 in a periodic
/// ValleyAtLeft row.
void solve_row_diamond(const SchemeContext& ctx, Phase phase, double row_time,
                       const std::vector<EdgeData>& edges, const EdgeData* wrap, int k,
                       std::vector<EdgeData>& next, NewtonTally* tally);

/// One half-step; flips the phase and advances row_time by dt/2.  Solver
/// errors are rethrown with the diamond index and `step` in the message.
ZigZagState half_step(const SchemeContext& ctx, const ZigZagState& state, long step = 0,
                      NewtonTally* tally = nullptr);

/// Number of half-steps that land on t_final; throws InvalidArgument when
/// 2 t_final / dt is not an integer to 1e-9 or t_final < dt.
long half_steps_for(const MeshConfig& mesh);

struct RunOptions {
  InitMethod init = InitMethod::Exact;
  /// Record a snapshot every this many full steps (0: none).
  int snapshot_every = 0;
};

/// Up-edge node samples, one row per node: x, t, u, v, w.
struct Snapshot {
  long half_step = 0;
  Eigen::MatrixXd rows;
};

/// Samples the up-edges among edges [edge_begin, edge_end) (edge_end < 0:
/// to the end).
Snapshot take_snapshot(const ZigZagState& state, const MeshConfig& mesh, const RKTableau& tab,
                       long half_step, int edge_begin = 0, int edge_end = -1);

struct RunReport {
  std::string problem;
  int r = 0;
  MeshConfig mesh;
  InitMethod init = InitMethod::Exact;
  std::string bc;
  long half_steps = 0;
  ZigZagState final_state;
  std::optional<double> error;
  NewtonTally newton;
  double wall_seconds = 0.0;  ///< step loop only
  double initial_max_abs_u = 0.0;
  double max_abs_u = 0.0;  ///< over every zig-zag of the run
  std::vector<Snapshot> snapshots;
  int workers = 1;
  long messages = 0;
};

RunReport run(const WaveProblem& problem, const MeshConfig& mesh, const RKTableau& tab,
              const BoundarySpec& bc, const SolverConfig& cfg, const RunOptions& opts);

}  // namespace diamond
