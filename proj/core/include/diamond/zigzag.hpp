#pragma once

#include <vector>

#include "diamond/diamond_solver.hpp"
#include "diamond/pde.hpp"
#include "diamond/tableau.hpp"

namespace diamond {

/// Which way the zig-zag starts at x = a.
///  ValleyAtLeft: valleys at a + k dx (k = 0..N), edges up_0, down_1, up_1, ..., down_N.
///  PeakAtLeft:   valleys at a + (k + 1/2) dx,     edges down_0, up_0, ..., up_{N-1}.
/// A half-step always flips the phase.
enum class Phase { ValleyAtLeft, PeakAtLeft };

enum class EdgeKind { Up, Down };

/// The lower boundary of the next row of diamonds: 2N edges ordered left to
/// right across [a, b].  Each edge's nodes run from its valley upwards at
/// parameters c_k, so an up-edge of the valley (xv, tv) has node k at
/// (xv + c_k dx/2, tv + c_k dt/2) and a down-edge at (xv - c_k dx/2, tv + c_k dt/2).
struct ZigZagState {
  double row_time = 0.0;  ///< time of the valleys
  Phase phase = Phase::ValleyAtLeft;
  std::vector<EdgeData> edges;
};

struct NodePoint {
  double x;
  double t;
};

EdgeKind edge_kind(Phase phase, int e);

/// x coordinate of the valley that edge e hangs from.
double valley_x(const MeshConfig& mesh, Phase phase, int e);

NodePoint node_point(const MeshConfig& mesh, const RKTableau& tab, Phase phase,
                     double row_time, int e, int k);

/// Indices of the N up-edges, left to right.
std::vector<int> up_edge_indices(const ZigZagState& state);

/// Checks 2N edges of r nodes with n components, all finite.
void validate_state(const ZigZagState& state, const MeshConfig& mesh, int r, int n);

/// max |u| (component 0) over all nodes.
double max_abs_u(const ZigZagState& state);

}  // namespace diamond
