#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "diamond/diamond_solver.hpp"
#include "diamond/problems.hpp"
#include "diamond/zigzag.hpp"

namespace diamond {

/// sqrt((b - a)/(N r) * sum (u_node - u_exact)^2) over the r nodes of each of
/// the N up-edges of the zig-zag, at their true (x, t).  Throws
/// UnsupportedOperation without an exact solution.
double error_norm(const ZigZagState& state, const WaveProblem& p, const MeshConfig& mesh,
                  const RKTableau& tab);

struct ErrorRow {
  int N = 0;
  double dx = 0.0;
  double dt = 0.0;
  double error = 0.0;
};

struct ErrorTable {
  std::string problem;
  std::string method;
  int r = 0;
  std::vector<ErrorRow> rows;

  /// Sorts rows by N ascending.
  void sort();
};

struct OrderFit {
  double order = 0.0;            ///< least-squares slope of log E against log dt
  std::vector<double> pairwise;  ///< slopes between consecutive usable rows
  int used_rows = 0;
  std::vector<std::string> warnings;
};

/// Rows with E == 0 or non-finite E are dropped with a warning; fewer than
/// two usable rows throws InvalidArgument.
OrderFit fit_order(const ErrorTable& table);

/// A variation on the four edges of one diamond (nodal values, same layout
/// as EdgeData).
struct EdgeVariationSet {
  EdgeData left;
  EdgeData bottom;
  EdgeData right;
  EdgeData top;
};

/// Left side of the discrete symplectic conservation law for one diamond,
///   (1/dt) sum b_i (w_t + w_r - w_l - w_b) + (1/dx) sum b_i (k_r + k_b - k_t - k_l),
/// with w = d1^T K d2 and k = d1^T L d2 at each edge node.  Returns its
/// absolute value.
double conservation_residual(const EdgeVariationSet& d1, const EdgeVariationSet& d2,
                             const PDESystem& pde, const RKTableau& tab, double dx, double dt);

/// Solves one diamond from (z_left, z_bottom), pushes the lower-edge
/// variations (d1_left, d1_bottom) and (d2_left, d2_bottom) through its
/// linearisation and returns conservation_residual of the two results.
double diamond_conservation_residual(const PDESystem& pde, const RKTableau& tab, double dx,
                                     double dt, const EdgeData& z_left, const EdgeData& z_bottom,
                                     const EdgeData& d1_left, const EdgeData& d1_bottom,
                                     const EdgeData& d2_left, const EdgeData& d2_bottom,
                                     const SolverConfig& cfg);

/// Formats with 17 significant digits.
std::string format_double(double v);

/// Columns: N, dx, dt, error, pairwise_order (empty on the first row).
void write_error_table_csv(std::ostream& os, const ErrorTable& table);

}  // namespace diamond
