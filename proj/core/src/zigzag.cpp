#include "diamond/zigzag.hpp"

#include <algorithm>
#include <cmath>

#include "diamond/errors.hpp"

namespace diamond {

EdgeKind edge_kind(Phase phase, int e) {
  const bool even = e % 2 == 0;
  if (phase == Phase::ValleyAtLeft) return even ? EdgeKind::Up : EdgeKind::Down;
  return even ? EdgeKind::Down : EdgeKind::Up;
}

double valley_x(const MeshConfig& mesh, Phase phase, int e) {
  if (phase == Phase::ValleyAtLeft) {
    // up_k at 2k, down_k at 2k - 1
    const int k = (e % 2 == 0) ? e / 2 : (e + 1) / 2;
    return mesh.a + k * mesh.dx;
  }
  // down_k at 2k, up_k at 2k + 1
  const int k = e / 2;
  return mesh.a + (k + 0.5) * mesh.dx;
}

NodePoint node_point(const MeshConfig& mesh, const RKTableau& tab, Phase phase,
                     double row_time, int e, int k) {
  const double xv = valley_x(mesh, phase, e);
  const double s = tab.c(k);
  const double sign = edge_kind(phase, e) == EdgeKind::Up ? 1.0 : -1.0;
  return {xv + sign * s * 0.5 * mesh.dx, row_time + s * 0.5 * mesh.dt};
}

std::vector<int> up_edge_indices(const ZigZagState& state) {
  std::vector<int> out;
  const int first = state.phase == Phase::ValleyAtLeft ? 0 : 1;
  for (int e = first; e < static_cast<int>(state.edges.size()); e += 2) out.push_back(e);
  return out;
}

void validate_state(const ZigZagState& state, const MeshConfig& mesh, int r, int n) {
  if (static_cast<int>(state.edges.size()) != 2 * mesh.N) {
    throw InvalidState("zig-zag must hold 2N edges");
  }
  for (const auto& e : state.edges) {
    if (e.r() != r || e.n() != n) throw InvalidState("zig-zag edge has the wrong shape");
    if (!e.all_finite()) throw InvalidState("zig-zag edge holds non-finite values");
  }
}

double max_abs_u(const ZigZagState& state) {
  double m = 0.0;
  for (const auto& e : state.edges) m = std::max(m, e.values.row(0).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace diamond
