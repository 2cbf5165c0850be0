#include "diamond/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "diamond/errors.hpp"

namespace diamond {

double error_norm(const ZigZagState& state, const WaveProblem& p, const MeshConfig& mesh,
                  const RKTableau& tab) {
  const ExactWave& e = p.require_exact();
  const std::vector<int> ups = up_edge_indices(state);
  if (ups.empty()) throw InvalidState("error_norm: empty zig-zag");
  double sum = 0.0;
  for (int idx : ups) {
    const EdgeData& edge = state.edges[idx];
    if (edge.r() != tab.r) throw InvalidState("error_norm: edge/tableau size mismatch");
    for (int k = 0; k < tab.r; ++k) {
      const NodePoint q = node_point(mesh, tab, state.phase, state.row_time, idx, k);
      const double d = edge.values(0, k) - e.u(q.x, q.t);
      sum += d * d;
    }
  }
  const double count = static_cast<double>(ups.size()) * tab.r;
  return std::sqrt((mesh.b - mesh.a) / count * sum);
}

void ErrorTable::sort() {
  std::sort(rows.begin(), rows.end(), [](const ErrorRow& x, const ErrorRow& y) { return x.N < y.N; });
}

OrderFit fit_order(const ErrorTable& table) {
  OrderFit fit;
  std::vector<double> lx, ly;
  for (const auto& row : table.rows) {
    if (!(row.error > 0.0) || !std::isfinite(row.error)) {
      std::ostringstream os;
      os << "N = " << row.N << ": error " << row.error << " excluded from the fit";
      fit.warnings.push_back(os.str());
      continue;
    }
    if (!(row.dt > 0.0)) throw InvalidArgument("fit_order: dt must be positive");
    lx.push_back(std::log(row.dt));
    ly.push_back(std::log(row.error));
  }
  const int m = static_cast<int>(lx.size());
  if (m < 2) throw InvalidArgument("fit_order: need at least two rows with positive error");
  fit.used_rows = m;
  for (int i = 1; i < m; ++i) fit.pairwise.push_back((ly[i] - ly[i - 1]) / (lx[i] - lx[i - 1]));
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < m; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_order: all dt are equal");
  fit.order = sxy / sxx;
  return fit;
}

namespace {

void check_shape(const EdgeData& e, int r, int n) {
  if (e.r() != r || e.n() != n) throw InvalidArgument("conservation_residual: edge shape mismatch");
}

// sum_i b_i u1_i^T M u2_i
double weighted_form(const EdgeData& u1, const EdgeData& u2, const Eigen::MatrixXd& M,
                     const RKTableau& tab) {
  double s = 0.0;
  for (int i = 0; i < tab.r; ++i) s += tab.b(i) * u1.node(i).dot(M * u2.node(i));
  return s;
}

}  // namespace

double conservation_residual(const EdgeVariationSet& d1, const EdgeVariationSet& d2,
                             const PDESystem& pde, const RKTableau& tab, double dx, double dt) {
  const int r = tab.r;
  const int n = pde.n();
  for (const EdgeVariationSet* d : {&d1, &d2}) {
    check_shape(d->left, r, n);
    check_shape(d->bottom, r, n);
    check_shape(d->right, r, n);
    check_shape(d->top, r, n);
  }
  if (!(dx > 0.0) || !(dt > 0.0)) throw InvalidArgument("conservation_residual: dx, dt > 0");
  const auto& K = pde.K();
  const auto& L = pde.L();
  auto w = [&](const EdgeData EdgeVariationSet::*edge) {
    return weighted_form(d1.*edge, d2.*edge, K, tab);
  };
  auto k = [&](const EdgeData EdgeVariationSet::*edge) {
    return weighted_form(d1.*edge, d2.*edge, L, tab);
  };
  using E = EdgeVariationSet;
  const double time_part = w(&E::top) + w(&E::right) - w(&E::left) - w(&E::bottom);
  const double space_part = k(&E::right) + k(&E::bottom) - k(&E::top) - k(&E::left);
  return std::abs(time_part / dt + space_part / dx);
}

double diamond_conservation_residual(const PDESystem& pde, const RKTableau& tab, double dx,
                                     double dt, const EdgeData& z_left, const EdgeData& z_bottom,
                                     const EdgeData& d1_left, const EdgeData& d1_bottom,
                                     const EdgeData& d2_left, const EdgeData& d2_bottom,
                                     const SolverConfig& cfg) {
  const TransformedCoeffs coeffs = transform_coeffs(pde, dx, dt);
  const DiamondSolution sol = solve_diamond(z_left, z_bottom, pde, tab, coeffs, cfg);
  const StageCoefficients sc = StageCoefficients::uniform(coeffs);
  EdgeVariation v1 =
      linearized_diamond(pde, tab, sc, z_left, z_bottom, sol.stages, d1_left, d1_bottom);
  EdgeVariation v2 =
      linearized_diamond(pde, tab, sc, z_left, z_bottom, sol.stages, d2_left, d2_bottom);
  const EdgeVariationSet s1{d1_left, d1_bottom, std::move(v1.right), std::move(v1.top)};
  const EdgeVariationSet s2{d2_left, d2_bottom, std::move(v2.right), std::move(v2.top)};
  return conservation_residual(s1, s2, pde, tab, dx, dt);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

void write_error_table_csv(std::ostream& os, const ErrorTable& table) {
  os << "N,dx,dt,error,pairwise_order\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const ErrorRow& row = table.rows[i];
    os << row.N << ',' << format_double(row.dx) << ',' << format_double(row.dt) << ','
       << format_double(row.error) << ',';
    if (i > 0) {
      const ErrorRow& prev = table.rows[i - 1];
      if (row.error > 0.0 && prev.error > 0.0) {
        os << format_double(std::log(row.error / prev.error) / std::log(row.dt / prev.dt));
      }
    }
    os << '\n';
  }
}

}  // namespace diamond
