#include "diamond/timeloop.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "diamond/diagnostics.hpp"
#include "diamond/errors.hpp"

namespace diamond {

SchemeContext::SchemeContext(WaveProblem p, MeshConfig m, RKTableau t, BoundarySpec b,
                             SolverConfig c)
    : problem(std::move(p)),
      pde(wave_system(problem)),
      mesh(m),
      tab(std::move(t)),
      bc(std::move(b)),
      cfg(c),
      coeffs(transform_coeffs(pde, mesh.dx, mesh.dt)),
      stage_coeffs(StageCoefficients::uniform(coeffs)) {
  bc.validate();
  cfg.validate();
}

StepOutput step_interior(const SchemeContext& ctx, const EdgeData& left, const EdgeData& bottom) {
  DiamondSolution s = solve_diamond(left, bottom, ctx.pde, ctx.tab, ctx.coeffs, ctx.cfg);
  return {std::move(s.right), std::move(s.top), s.stats};
}

StepOutput step_left_boundary(const SchemeContext& ctx, const EdgeData& bottom, double t_bottom) {
  BoundaryResult b = solve_boundary_diamond(Side::Left, bottom, ctx.bc, ctx.problem, ctx.pde,
                                            ctx.mesh, ctx.tab, ctx.stage_coeffs, t_bottom,
                                            ctx.cfg);
  return {std::move(b.inner), std::move(b.exterior), b.stats};
}

StepOutput step_right_boundary(const SchemeContext& ctx, const EdgeData& left, double t_bottom) {
  BoundaryResult b = solve_boundary_diamond(Side::Right, left, ctx.bc, ctx.problem, ctx.pde,
                                            ctx.mesh, ctx.tab, ctx.stage_coeffs, t_bottom,
                                            ctx.cfg);
  return {std::move(b.exterior), std::move(b.inner), b.stats};
}

int diamonds_in_row(const SchemeContext& ctx, Phase phase) {
  if (phase == Phase::PeakAtLeft || ctx.bc.periodic()) return ctx.mesh.N;
  return ctx.mesh.N + 1;
}

void solve_row_diamond(const SchemeContext& ctx, Phase phase, double row_time,
                       const std::vector<EdgeData>& edges, const EdgeData* wrap, int k,
                       std::vector<EdgeData>& next, NewtonTally* tally) {
  const int N = ctx.mesh.N;
  StepOutput out;
  if (phase == Phase::PeakAtLeft) {
    out = step_interior(ctx, edges[2 * k], edges[2 * k + 1]);
    next[2 * k] = std::move(out.top);
    next[2 * k + 1] = std::move(out.right);
  } else if (k == 0) {
    if (ctx.bc.periodic()) {
      if (!wrap) throw InvalidState("solve_row_diamond: periodic row needs the wrap edge");
      out = step_interior(ctx, *wrap, edges[0]);
      next[2 * N - 1] = std::move(out.top);
    } else {
      out = step_left_boundary(ctx, edges[0], row_time);
    }
    next[0] = std::move(out.right);
  } else if (k == N) {
    out = step_right_boundary(ctx, edges[2 * N - 1], row_time);
    next[2 * N - 1] = std::move(out.top);
  } else {
    out = step_interior(ctx, edges[2 * k - 1], edges[2 * k]);
    next[2 * k] = std::move(out.right);
    next[2 * k - 1] = std::move(out.top);
  }
  if (tally) tally->add(out.stats);
}

namespace {

std::string where(int k, long step) {
  std::ostringstream os;
  os << " [diamond " << k << ", half-step " << step << "]";
  return os.str();
}

}  // namespace

ZigZagState half_step(const SchemeContext& ctx, const ZigZagState& state, long step,
                      NewtonTally* tally) {
  ZigZagState next;
  next.edges.resize(state.edges.size());
  next.phase = state.phase == Phase::ValleyAtLeft ? Phase::PeakAtLeft : Phase::ValleyAtLeft;
  next.row_time = state.row_time + 0.5 * ctx.mesh.dt;
  std::optional<EdgeData> wrap;
  if (state.phase == Phase::ValleyAtLeft && ctx.bc.periodic()) {
    wrap = periodic_wrap(state, ctx.bc);
  }
  const int count = diamonds_in_row(ctx, state.phase);
  for (int k = 0; k < count; ++k) {
    try {
      solve_row_diamond(ctx, state.phase, state.row_time, state.edges,
                        wrap ? &*wrap : nullptr, k, next.edges, tally);
    } catch (const SolverDivergence& e) {
      throw SolverDivergence(e.what() + where(k, step), e.last_residual());
    } catch (const SingularSystem& e) {
      throw SingularSystem(e.what() + where(k, step));
    }
  }
  return next;
}

long half_steps_for(const MeshConfig& mesh) {
  if (!(mesh.t_final >= mesh.dt)) {
    throw InvalidArgument("t_final must be at least dt");
  }
  const double h = 2.0 * mesh.t_final / mesh.dt;
  const double rounded = std::round(h);
  if (std::abs(h - rounded) > 1e-9 * std::max(1.0, h)) {
    std::ostringstream os;
    os << "t_final = " << mesh.t_final << " is not a multiple of dt/2 = " << 0.5 * mesh.dt;
    throw InvalidArgument(os.str());
  }
  return static_cast<long>(rounded);
}

Snapshot take_snapshot(const ZigZagState& state, const MeshConfig& mesh, const RKTableau& tab,
                       long half_step, int edge_begin, int edge_end) {
  if (edge_end < 0) edge_end = static_cast<int>(state.edges.size());
  std::vector<int> ups;
  for (int e : up_edge_indices(state)) {
    if (e >= edge_begin && e < edge_end) ups.push_back(e);
  }
  Snapshot s;
  s.half_step = half_step;
  const int n = ups.empty() ? 0 : state.edges[ups.front()].n();
  s.rows.resize(static_cast<Eigen::Index>(ups.size()) * tab.r, 2 + n);
  Eigen::Index row = 0;
  for (int e : ups) {
    for (int k = 0; k < tab.r; ++k) {
      const NodePoint q = node_point(mesh, tab, state.phase, state.row_time, e, k);
      s.rows(row, 0) = q.x;
      s.rows(row, 1) = q.t;
      s.rows.row(row).tail(n) = state.edges[e].node(k).transpose();
      ++row;
    }
  }
  return s;
}

RunReport run(const WaveProblem& problem, const MeshConfig& mesh, const RKTableau& tab,
              const BoundarySpec& bc, const SolverConfig& cfg, const RunOptions& opts) {
  const long steps = half_steps_for(mesh);
  const SchemeContext ctx(problem, mesh, tab, bc, cfg);
  RunReport rep;
  rep.problem = problem.name;
  rep.r = tab.r;
  rep.mesh = mesh;
  rep.init = opts.init;
  rep.bc = bc_code(bc.left.kind, bc.right.kind);
  rep.half_steps = steps;

  ZigZagState state = initialize(opts.init, problem, mesh, tab, cfg, &rep.newton);
  rep.initial_max_abs_u = max_abs_u(state);
  rep.max_abs_u = rep.initial_max_abs_u;
  const long every = 2L * opts.snapshot_every;
  if (every > 0) rep.snapshots.push_back(take_snapshot(state, mesh, tab, 0));

  const auto t0 = std::chrono::steady_clock::now();
  for (long s = 0; s < steps; ++s) {
    state = half_step(ctx, state, s, &rep.newton);
    rep.max_abs_u = std::max(rep.max_abs_u, max_abs_u(state));
    if (every > 0 && (s + 1) % every == 0) {
      rep.snapshots.push_back(take_snapshot(state, mesh, tab, s + 1));
    }
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (problem.exact) rep.error = error_norm(state, problem, mesh, tab);
  rep.final_state = std::move(state);
  return rep;
}

}  // namespace diamond
