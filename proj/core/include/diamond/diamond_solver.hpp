#pragma once

#include <vector>

#include <Eigen/Dense>

#include "diamond/pde.hpp"
#include "diamond/tableau.hpp"

namespace diamond {

/// Solution values at the r Gauss nodes of one diamond edge, stored as an
/// n x r matrix (column k is node k).  Nodes are ordered from the lower end
/// of the edge upwards.
struct EdgeData {
  Eigen::MatrixXd values;

  EdgeData() = default;
  explicit EdgeData(Eigen::MatrixXd v) : values(std::move(v)) {}
  static EdgeData constant(const Eigen::VectorXd& z, int r);

  int r() const { return static_cast<int>(values.cols()); }
  int n() const { return static_cast<int>(values.rows()); }
  auto node(int k) { return values.col(k); }
  auto node(int k) const { return values.col(k); }
  bool all_finite() const { return values.allFinite(); }
};

/// Internal stages of one diamond on the unit square.  Stage (i, j) sits at
/// (x~, t~) = (c_i, c_j) and is stored in column i + r*j.
struct StageBlock {
  int r = 0;
  Eigen::MatrixXd Z;
  Eigen::MatrixXd X;
  Eigen::MatrixXd T;

  static int index(int r, int i, int j) { return i + r * j; }
  auto Zs(int i, int j) const { return Z.col(index(r, i, j)); }
  auto Xs(int i, int j) const { return X.col(index(r, i, j)); }
  auto Ts(int i, int j) const { return T.col(index(r, i, j)); }
};

enum class JacobianMode { Analytic, FiniteDifference };

struct SolverConfig {
  double tol = 1e-12;
  int max_iter = 50;
  JacobianMode jacobian_mode = JacobianMode::Analytic;
  /// Retry once with a finite-difference Jacobian when analytic Newton fails.
  bool fd_fallback = true;
  int max_backtracks = 8;

  void validate() const;
};

struct SolveStats {
  int iterations = 0;
  bool used_fallback = false;
  double residual = 0.0;
};

/// Running totals over many local solves.
struct NewtonTally {
  long solves = 0;
  long iterations = 0;
  int max_iterations = 0;
  long fallbacks = 0;
  double max_residual = 0.0;

  void add(const SolveStats& s);
  void merge(const NewtonTally& o);
};

/// K~, L~ per internal stage.  A single entry means the coefficients are
/// the same at every stage (the usual diamond); r*r entries carry the
/// position-dependent coefficients of a mapped triangle.
struct StageCoefficients {
  std::vector<Eigen::MatrixXd> K_tilde;
  std::vector<Eigen::MatrixXd> L_tilde;

  static StageCoefficients uniform(const TransformedCoeffs& c);
  bool is_uniform() const { return K_tilde.size() == 1; }
  const Eigen::MatrixXd& K(int s) const { return is_uniform() ? K_tilde[0] : K_tilde[s]; }
  const Eigen::MatrixXd& L(int s) const { return is_uniform() ? L_tilde[0] : L_tilde[s]; }
};

/// Linear condition  wz.Z_ij + wx.X_ij + wt.T_ij = value  on one stage.
struct StageConstraint {
  int i = 0;
  int j = 0;
  Eigen::VectorXd wz;
  Eigen::VectorXd wx;
  Eigen::VectorXd wt;
  double value = 0.0;
};

/// One square of the scheme.  Edges flagged free become unknowns (their
/// stored values are the Newton starting guess) and must be balanced by
/// the same number of scalar constraints.
struct LocalSystem {
  EdgeData left;
  EdgeData bottom;
  bool left_free = false;
  bool bottom_free = false;
  StageCoefficients coeffs;
  std::vector<StageConstraint> constraints;
};

struct LocalSolution {
  EdgeData left;
  EdgeData bottom;
  EdgeData right;
  EdgeData top;
  StageBlock stages;
  SolveStats stats;
};

/// Residual and Jacobian of the reduced stage system.  The unknowns are
/// the r*r*n stage values Z followed by any free edge values; X and T are
/// eliminated through X = A^{-1}(Z - z_left) along rows and
/// T = A^{-1}(Z - z_bottom) along columns.  Stage rows are divided by
/// max(1, |K~|, |L~|) so that the tolerance is independent of the mesh size.
class LocalResidual {
 public:
  LocalResidual(const PDESystem& pde, const RKTableau& tab, const LocalSystem& sys);

  int unknowns() const { return unknowns_; }
  int equations() const { return equations_; }
  int stage_unknowns() const { return r_ * r_ * n_; }

  Eigen::VectorXd initial_guess() const;
  void evaluate(const Eigen::VectorXd& y, Eigen::VectorXd& F) const;
  void jacobian(const Eigen::VectorXd& y, Eigen::MatrixXd& J) const;
  void fd_jacobian(const Eigen::VectorXd& y, Eigen::MatrixXd& J) const;
  /// Rebuilds edges and stages from an unknown vector and applies the
  /// update equations.
  LocalSolution unpack(const Eigen::VectorXd& y) const;

 private:
  void stages_from(const Eigen::VectorXd& y, Eigen::MatrixXd& X, Eigen::MatrixXd& T,
                   Eigen::MatrixXd& zl, Eigen::MatrixXd& zb) const;

  const PDESystem& pde_;
  const RKTableau& tab_;
  const LocalSystem& sys_;
  int r_;
  int n_;
  int unknowns_;
  int equations_;
  int left_offset_ = -1;
  int bottom_offset_ = -1;
  std::vector<double> row_scale_;
};

/// Newton solve of a local system (analytic or finite-difference Jacobian,
/// backtracking on the max-norm residual).
LocalSolution solve_local(const PDESystem& pde, const RKTableau& tab, const LocalSystem& sys,
                          const SolverConfig& cfg);

struct DiamondSolution {
  EdgeData right;
  EdgeData top;
  StageBlock stages;
  SolveStats stats;
};

/// Fills one interior diamond from its lower-left and lower-right edges.
DiamondSolution solve_diamond(const EdgeData& z_left, const EdgeData& z_bottom,
                              const PDESystem& pde, const RKTableau& tab,
                              const TransformedCoeffs& coeffs, const SolverConfig& cfg);

/// Max-norm residual of the stage equations for given edges and stages,
/// with the same row scaling the solver uses.
double stage_residual(const PDESystem& pde, const RKTableau& tab,
                      const StageCoefficients& coeffs, const EdgeData& z_left,
                      const EdgeData& z_bottom, const StageBlock& stages);

/// Number of scalar unknowns in the reduced interior system.
constexpr int reduced_unknowns(int r, int n) { return r * r * n; }

struct CornerValues {
  Eigen::VectorXd bottom;
  Eigen::VectorXd right;
  Eigen::VectorXd top;
  Eigen::VectorXd left;
};

/// Corner reconstruction for output.  Each edge's nodal values are
/// extrapolated to its end points by the degree r-1 interpolant and the
/// two estimates meeting at a corner are averaged.  The scheme itself never
/// reads corner values.
CornerValues corner_values(const EdgeData& left, const EdgeData& bottom, const EdgeData& right,
                           const EdgeData& top, const RKTableau& tab);

/// Corner values for the z = (u, u_t, u_x) wave formulation.  As
/// corner_values, except that u is carried to each corner along both edges
/// by the degree 2r-1 Hermite interpolant of u and its derivative along the
/// edge, d u/ds = (dt v -/+ dx w)/2 (minus on the left and right edges,
/// plus on the bottom and top), and the two results are averaged.
CornerValues wave_corner_values(const EdgeData& left, const EdgeData& bottom,
                                const EdgeData& right, const EdgeData& top, const RKTableau& tab,
                                double dx, double dt);

/// Lagrange extrapolation of edge data to edge parameter s in [0, 1].
Eigen::VectorXd edge_value_at(const EdgeData& e, const RKTableau& tab, double s);

struct EdgeVariation {
  EdgeData right;
  EdgeData top;
};

/// Propagates a variation (d_left, d_bottom) through the linearisation of
/// an already solved diamond, with S'' frozen at the computed stages.
EdgeVariation linearized_diamond(const PDESystem& pde, const RKTableau& tab,
                                 const StageCoefficients& coeffs, const EdgeData& z_left,
                                 const EdgeData& z_bottom, const StageBlock& stages,
                                 const EdgeData& d_left, const EdgeData& d_bottom);

}  // namespace diamond
