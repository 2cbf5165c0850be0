#include "diamond/diamond_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diamond/errors.hpp"

namespace diamond {

EdgeData EdgeData::constant(const Eigen::VectorXd& z, int r) {
  return EdgeData(z.replicate(1, r));
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidArgument("SolverConfig: tol must be positive");
  if (max_iter < 1) throw InvalidArgument("SolverConfig: max_iter must be >= 1");
  if (max_backtracks < 0) throw InvalidArgument("SolverConfig: max_backtracks must be >= 0");
}

void NewtonTally::add(const SolveStats& s) {
  solves += 1;
  iterations += s.iterations;
  max_iterations = std::max(max_iterations, s.iterations);
  fallbacks += s.used_fallback ? 1 : 0;
  max_residual = std::max(max_residual, s.residual);
}

void NewtonTally::merge(const NewtonTally& o) {
  solves += o.solves;
  iterations += o.iterations;
  max_iterations = std::max(max_iterations, o.max_iterations);
  fallbacks += o.fallbacks;
  max_residual = std::max(max_residual, o.max_residual);
}

StageCoefficients StageCoefficients::uniform(const TransformedCoeffs& c) {
  StageCoefficients s;
  s.K_tilde.push_back(c.K_tilde);
  s.L_tilde.push_back(c.L_tilde);
  return s;
}

namespace {

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double coefficient_scale(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L) {
  return 1.0 / std::max({1.0, K.cwiseAbs().maxCoeff(), L.cwiseAbs().maxCoeff()});
}

}  // namespace

LocalResidual::LocalResidual(const PDESystem& pde, const RKTableau& tab, const LocalSystem& sys)
    : pde_(pde), tab_(tab), sys_(sys), r_(tab.r), n_(pde.n()) {
  if (sys.left.r() != r_ || sys.bottom.r() != r_) {
    throw InvalidArgument("LocalResidual: edge length does not match tableau stage count");
  }
  if (sys.left.n() != n_ || sys.bottom.n() != n_) {
    throw InvalidArgument("LocalResidual: edge dimension does not match PDE dimension");
  }
  const auto ncoef = sys.coeffs.K_tilde.size();
  if (ncoef != sys.coeffs.L_tilde.size() ||
      (ncoef != 1 && ncoef != static_cast<std::size_t>(r_ * r_))) {
    throw InvalidArgument("LocalResidual: stage coefficient count must be 1 or r*r");
  }
  for (std::size_t k = 0; k < ncoef; ++k) {
    if (sys.coeffs.K_tilde[k].rows() != n_ || sys.coeffs.L_tilde[k].rows() != n_) {
      throw InvalidArgument("LocalResidual: coefficient matrix dimension mismatch");
    }
  }
  for (const auto& c : sys.constraints) {
    if (c.i < 0 || c.i >= r_ || c.j < 0 || c.j >= r_ || c.wz.size() != n_ ||
        c.wx.size() != n_ || c.wt.size() != n_) {
      throw InvalidArgument("LocalResidual: malformed stage constraint");
    }
  }
  unknowns_ = r_ * r_ * n_;
  if (sys.left_free) {
    left_offset_ = unknowns_;
    unknowns_ += r_ * n_;
  }
  if (sys.bottom_free) {
    bottom_offset_ = unknowns_;
    unknowns_ += r_ * n_;
  }
  equations_ = r_ * r_ * n_ + static_cast<int>(sys.constraints.size());
  row_scale_.resize(r_ * r_);
  for (int s = 0; s < r_ * r_; ++s) {
    row_scale_[s] = coefficient_scale(sys.coeffs.K(s), sys.coeffs.L(s));
  }
}

Eigen::VectorXd LocalResidual::initial_guess() const {
  Eigen::VectorXd y(unknowns_);
  for (int j = 0; j < r_; ++j) {
    for (int i = 0; i < r_; ++i) {
      const int s = StageBlock::index(r_, i, j);
      y.segment(s * n_, n_) = 0.5 * (sys_.left.node(j) + sys_.bottom.node(i));
    }
  }
  if (left_offset_ >= 0) {
    y.segment(left_offset_, r_ * n_) = Eigen::Map<const Eigen::VectorXd>(
        sys_.left.values.data(), r_ * n_);
  }
  if (bottom_offset_ >= 0) {
    y.segment(bottom_offset_, r_ * n_) = Eigen::Map<const Eigen::VectorXd>(
        sys_.bottom.values.data(), r_ * n_);
  }
  return y;
}

void LocalResidual::stages_from(const Eigen::VectorXd& y, Eigen::MatrixXd& X, Eigen::MatrixXd& T,
                                Eigen::MatrixXd& zl, Eigen::MatrixXd& zb) const {
  const Eigen::Map<const Eigen::MatrixXd> Z(y.data(), n_, r_ * r_);
  zl = left_offset_ >= 0 ? Eigen::Map<const Eigen::MatrixXd>(y.data() + left_offset_, n_, r_)
                         : sys_.left.values;
  zb = bottom_offset_ >= 0
           ? Eigen::Map<const Eigen::MatrixXd>(y.data() + bottom_offset_, n_, r_)
           : sys_.bottom.values;
  const Eigen::MatrixXd& Ai = tab_.A_inv;
  X.resize(n_, r_ * r_);
  T.resize(n_, r_ * r_);
  X.setZero();
  T.setZero();
  for (int j = 0; j < r_; ++j) {
    for (int i = 0; i < r_; ++i) {
      auto x = X.col(StageBlock::index(r_, i, j));
      auto t = T.col(StageBlock::index(r_, i, j));
      for (int m = 0; m < r_; ++m) {
        x.noalias() += Ai(i, m) * (Z.col(StageBlock::index(r_, m, j)) - zl.col(j));
        t.noalias() += Ai(j, m) * (Z.col(StageBlock::index(r_, i, m)) - zb.col(i));
      }
    }
  }
}

void LocalResidual::evaluate(const Eigen::VectorXd& y, Eigen::VectorXd& F) const {
  Eigen::MatrixXd X, T, zl, zb;
  stages_from(y, X, T, zl, zb);
  const Eigen::Map<const Eigen::MatrixXd> Z(y.data(), n_, r_ * r_);
  F.resize(equations_);
  for (int s = 0; s < r_ * r_; ++s) {
    F.segment(s * n_, n_) = row_scale_[s] * (sys_.coeffs.K(s) * T.col(s) +
                                             sys_.coeffs.L(s) * X.col(s) -
                                             pde_.grad_S(Z.col(s)));
  }
  int row = r_ * r_ * n_;
  for (const auto& c : sys_.constraints) {
    const int s = StageBlock::index(r_, c.i, c.j);
    F(row++) = c.wz.dot(Z.col(s)) + c.wx.dot(X.col(s)) + c.wt.dot(T.col(s)) - c.value;
  }
}

void LocalResidual::jacobian(const Eigen::VectorXd& y, Eigen::MatrixXd& J) const {
  const Eigen::Map<const Eigen::MatrixXd> Z(y.data(), n_, r_ * r_);
  const Eigen::MatrixXd& Ai = tab_.A_inv;
  const Eigen::VectorXd& rs = tab_.A_inv_rowsum;
  J.setZero(equations_, unknowns_);
  for (int j = 0; j < r_; ++j) {
    for (int i = 0; i < r_; ++i) {
      const int s = StageBlock::index(r_, i, j);
      const double sc = row_scale_[s];
      const Eigen::MatrixXd& K = sys_.coeffs.K(s);
      const Eigen::MatrixXd& L = sys_.coeffs.L(s);
      auto rows = J.middleRows(s * n_, n_);
      for (int m = 0; m < r_; ++m) {
        rows.middleCols(StageBlock::index(r_, m, j) * n_, n_) += (sc * Ai(i, m)) * L;
        rows.middleCols(StageBlock::index(r_, i, m) * n_, n_) += (sc * Ai(j, m)) * K;
      }
      rows.middleCols(s * n_, n_) -= sc * pde_.hess_S(Z.col(s));
      if (left_offset_ >= 0) rows.middleCols(left_offset_ + j * n_, n_) -= (sc * rs(i)) * L;
      if (bottom_offset_ >= 0) rows.middleCols(bottom_offset_ + i * n_, n_) -= (sc * rs(j)) * K;
    }
  }
  int row = r_ * r_ * n_;
  for (const auto& c : sys_.constraints) {
    const int s = StageBlock::index(r_, c.i, c.j);
    auto jr = J.row(row++);
    jr.segment(s * n_, n_) += c.wz.transpose();
    for (int m = 0; m < r_; ++m) {
      jr.segment(StageBlock::index(r_, m, c.j) * n_, n_) += Ai(c.i, m) * c.wx.transpose();
      jr.segment(StageBlock::index(r_, c.i, m) * n_, n_) += Ai(c.j, m) * c.wt.transpose();
    }
    if (left_offset_ >= 0) jr.segment(left_offset_ + c.j * n_, n_) -= rs(c.i) * c.wx.transpose();
    if (bottom_offset_ >= 0) {
      jr.segment(bottom_offset_ + c.i * n_, n_) -= rs(c.j) * c.wt.transpose();
    }
  }
}

void LocalResidual::fd_jacobian(const Eigen::VectorXd& y, Eigen::MatrixXd& J) const {
  J.resize(equations_, unknowns_);
  Eigen::VectorXd F0, F1;
  evaluate(y, F0);
  Eigen::VectorXd yp = y;
  const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  for (int k = 0; k < unknowns_; ++k) {
    const double h = root_eps * std::max(1.0, std::abs(y(k)));
    yp(k) = y(k) + h;
    evaluate(yp, F1);
    J.col(k) = (F1 - F0) / h;
    yp(k) = y(k);
  }
}

LocalSolution LocalResidual::unpack(const Eigen::VectorXd& y) const {
  LocalSolution out;
  Eigen::MatrixXd X, T, zl, zb;
  stages_from(y, X, T, zl, zb);
  out.stages.r = r_;
  out.stages.Z = Eigen::Map<const Eigen::MatrixXd>(y.data(), n_, r_ * r_);
  out.stages.X = std::move(X);
  out.stages.T = std::move(T);
  Eigen::MatrixXd right = zl;
  Eigen::MatrixXd top = zb;
  for (int j = 0; j < r_; ++j) {
    for (int k = 0; k < r_; ++k) {
      right.col(j).noalias() += tab_.b(k) * out.stages.X.col(StageBlock::index(r_, k, j));
      top.col(j).noalias() += tab_.b(k) * out.stages.T.col(StageBlock::index(r_, j, k));
    }
  }
  out.left = EdgeData(std::move(zl));
  out.bottom = EdgeData(std::move(zb));
  out.right = EdgeData(std::move(right));
  out.top = EdgeData(std::move(top));
  return out;
}

namespace {

// Cheaper than an rcond estimate and enough to catch a structurally
// singular system (zero pivot relative to the largest one).
void check_pivots(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
  const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
  const double ratio = piv.minCoeff() / piv.maxCoeff();
  if (!(ratio > 1e3 * std::numeric_limits<double>::epsilon())) {
    std::ostringstream msg;
    msg << "local Newton matrix is singular (pivot ratio " << ratio << ")";
    throw SingularSystem(msg.str());
  }
}

bool newton(const LocalResidual& res, JacobianMode mode, const SolverConfig& cfg,
            Eigen::VectorXd& y, SolveStats& stats) {
  Eigen::VectorXd F, Ftry, ytry;
  Eigen::MatrixXd J;
  res.evaluate(y, F);
  double norm = max_abs(F);
  stats.residual = norm;
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (norm <= cfg.tol) return true;
    if (!std::isfinite(norm)) return false;
    if (mode == JacobianMode::Analytic) {
      res.jacobian(y, J);
    } else {
      res.fd_jacobian(y, J);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    check_pivots(lu);
    const Eigen::VectorXd delta = lu.solve(F);
    double alpha = 1.0;
    double trial = 0.0;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      ytry = y - alpha * delta;
      res.evaluate(ytry, Ftry);
      trial = max_abs(Ftry);
      if (trial < norm || bt == cfg.max_backtracks) break;
      alpha *= 0.5;
    }
    y.swap(ytry);
    F.swap(Ftry);
    norm = trial;
    stats.iterations += 1;
    stats.residual = norm;
  }
  return norm <= cfg.tol;
}

}  // namespace

LocalSolution solve_local(const PDESystem& pde, const RKTableau& tab, const LocalSystem& sys,
                          const SolverConfig& cfg) {
  cfg.validate();
  const LocalResidual res(pde, tab, sys);
  if (res.unknowns() != res.equations()) {
    std::ostringstream msg;
    msg << "solve_local: " << res.equations() << " equations for " << res.unknowns()
        << " unknowns";
    throw InvalidArgument(msg.str());
  }
  SolveStats stats;
  Eigen::VectorXd y = res.initial_guess();
  bool ok = newton(res, cfg.jacobian_mode, cfg, y, stats);
  if (!ok && cfg.fd_fallback && cfg.jacobian_mode == JacobianMode::Analytic) {
    const int first = stats.iterations;
    stats = SolveStats{};
    stats.used_fallback = true;
    y = res.initial_guess();
    ok = newton(res, JacobianMode::FiniteDifference, cfg, y, stats);
    stats.iterations += first;
  }
  if (!ok) {
    std::ostringstream msg;
    msg << "local Newton did not converge in " << cfg.max_iter
        << " iterations (residual " << stats.residual << ", tol " << cfg.tol << ")";
    throw SolverDivergence(msg.str(), stats.residual);
  }
  LocalSolution out = res.unpack(y);
  out.stats = stats;
  return out;
}

DiamondSolution solve_diamond(const EdgeData& z_left, const EdgeData& z_bottom,
                              const PDESystem& pde, const RKTableau& tab,
                              const TransformedCoeffs& coeffs, const SolverConfig& cfg) {
  LocalSystem sys;
  sys.left = z_left;
  sys.bottom = z_bottom;
  sys.coeffs = StageCoefficients::uniform(coeffs);
  LocalSolution sol = solve_local(pde, tab, sys, cfg);
  return {std::move(sol.right), std::move(sol.top), std::move(sol.stages), sol.stats};
}

double stage_residual(const PDESystem& pde, const RKTableau& tab,
                      const StageCoefficients& coeffs, const EdgeData& z_left,
                      const EdgeData& z_bottom, const StageBlock& stages) {
  const int r = tab.r;
  double worst = 0.0;
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < r; ++i) {
      const int s = StageBlock::index(r, i, j);
      Eigen::VectorXd row = z_left.node(j) - stages.Z.col(s);
      Eigen::VectorXd col = z_bottom.node(i) - stages.Z.col(s);
      for (int k = 0; k < r; ++k) {
        row += tab.A(i, k) * stages.X.col(StageBlock::index(r, k, j));
        col += tab.A(j, k) * stages.T.col(StageBlock::index(r, i, k));
      }
      const Eigen::VectorXd pde_row =
          coefficient_scale(coeffs.K(s), coeffs.L(s)) *
          (coeffs.K(s) * stages.T.col(s) + coeffs.L(s) * stages.X.col(s) -
           pde.grad_S(stages.Z.col(s)));
      worst = std::max({worst, max_abs(row), max_abs(col), max_abs(pde_row)});
    }
  }
  return worst;
}

Eigen::VectorXd edge_value_at(const EdgeData& e, const RKTableau& tab, double s) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(e.n());
  for (int k = 0; k < tab.r; ++k) {
    double w = 1.0;
    for (int m = 0; m < tab.r; ++m) {
      if (m != k) w *= (s - tab.c(m)) / (tab.c(k) - tab.c(m));
    }
    v += w * e.node(k);
  }
  return v;
}

CornerValues corner_values(const EdgeData& left, const EdgeData& bottom, const EdgeData& right,
                           const EdgeData& top, const RKTableau& tab) {
  auto avg = [&](const EdgeData& e1, double s1, const EdgeData& e2, double s2) {
    return Eigen::VectorXd(0.5 * (edge_value_at(e1, tab, s1) + edge_value_at(e2, tab, s2)));
  };
  CornerValues c;
  c.bottom = avg(left, 0.0, bottom, 0.0);
  c.right = avg(bottom, 1.0, right, 0.0);
  c.top = avg(right, 1.0, top, 1.0);
  c.left = avg(left, 1.0, top, 0.0);
  return c;
}

namespace {

// Value at s of the polynomial of degree 2r-1 matching f and f' at the nodes.
double hermite_at(const RKTableau& tab, const Eigen::VectorXd& f, const Eigen::VectorXd& df,
                  double s) {
  const int r = tab.r;
  const int m = 2 * r;
  Eigen::MatrixXd V(m, m);
  Eigen::VectorXd rhs(m);
  for (int k = 0; k < r; ++k) {
    const double y = tab.c(k) - 0.5;
    for (int q = 0; q < m; ++q) {
      V(k, q) = std::pow(y, q);
      V(r + k, q) = q == 0 ? 0.0 : q * std::pow(y, q - 1);
    }
    rhs(k) = f(k);
    rhs(r + k) = df(k);
  }
  const Eigen::VectorXd coef = V.fullPivLu().solve(rhs);
  double v = 0.0;
  for (int q = m - 1; q >= 0; --q) v = v * (s - 0.5) + coef(q);
  return v;
}

}  // namespace

CornerValues wave_corner_values(const EdgeData& left, const EdgeData& bottom,
                                const EdgeData& right, const EdgeData& top, const RKTableau& tab,
                                double dx, double dt) {
  for (const EdgeData* e : {&left, &bottom, &right, &top}) {
    if (e->n() != 3 || e->r() != tab.r) {
      throw InvalidArgument("wave_corner_values: edges must be 3 x r");
    }
  }
  CornerValues c = corner_values(left, bottom, right, top, tab);
  // +1: edge runs up and right (bottom, top); -1: up and left (left, right).
  auto u_at = [&](const EdgeData& e, double dir, double s) {
    const Eigen::VectorXd f = e.values.row(0).transpose();
    const Eigen::VectorXd df =
        (0.5 * dt * e.values.row(1) + dir * 0.5 * dx * e.values.row(2)).transpose();
    return hermite_at(tab, f, df, s);
  };
  c.bottom(0) = 0.5 * (u_at(left, -1, 0.0) + u_at(bottom, 1, 0.0));
  c.right(0) = 0.5 * (u_at(bottom, 1, 1.0) + u_at(right, -1, 0.0));
  c.top(0) = 0.5 * (u_at(right, -1, 1.0) + u_at(top, 1, 1.0));
  c.left(0) = 0.5 * (u_at(left, -1, 1.0) + u_at(top, 1, 0.0));
  return c;
}

EdgeVariation linearized_diamond(const PDESystem& pde, const RKTableau& tab,
                                 const StageCoefficients& coeffs, const EdgeData& z_left,
                                 const EdgeData& z_bottom, const StageBlock& stages,
                                 const EdgeData& d_left, const EdgeData& d_bottom) {
  const int r = tab.r;
  const int n = pde.n();
  LocalSystem sys;
  sys.left = z_left;
  sys.bottom = z_bottom;
  sys.left_free = true;
  sys.bottom_free = true;
  sys.coeffs = coeffs;
  const LocalResidual res(pde, tab, sys);
  Eigen::VectorXd y(res.unknowns());
  const int nz = res.stage_unknowns();
  y.head(nz) = Eigen::Map<const Eigen::VectorXd>(stages.Z.data(), nz);
  y.segment(nz, r * n) = Eigen::Map<const Eigen::VectorXd>(z_left.values.data(), r * n);
  y.segment(nz + r * n, r * n) = Eigen::Map<const Eigen::VectorXd>(z_bottom.values.data(), r * n);
  Eigen::MatrixXd J;
  res.jacobian(y, J);
  Eigen::VectorXd d_edges(2 * r * n);
  d_edges.head(r * n) = Eigen::Map<const Eigen::VectorXd>(d_left.values.data(), r * n);
  d_edges.tail(r * n) = Eigen::Map<const Eigen::VectorXd>(d_bottom.values.data(), r * n);
  const Eigen::VectorXd rhs = -J.rightCols(2 * r * n) * d_edges;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(J.leftCols(nz));
  Eigen::VectorXd dy(res.unknowns());
  dy.head(nz) = lu.solve(rhs);
  dy.tail(2 * r * n) = d_edges;

  // Both edges are free in `res`, so unpack reads the variation edges from dy;
  // X, T and the update equations are linear in (Z, edges).
  LocalSolution sol = res.unpack(dy);
  return {std::move(sol.right), std::move(sol.top)};
}

}  // namespace diamond
