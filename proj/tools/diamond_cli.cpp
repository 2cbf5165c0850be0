// diamond: command-line front end for the diamond scheme.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diamond/diagnostics.hpp"
#include "diamond/errors.hpp"
#include "diamond/parallel.hpp"
#include "diamond/timeloop.hpp"

namespace fs = std::filesystem;
using namespace diamond;

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct Options {
  std::string problem = "SineGordon";
  std::vector<int> r{1};
  std::vector<int> cells{40};
  int levels = 0;
  double courant = 0.5;
  std::optional<double> t_final;
  std::string init = "exact";
  std::string bc;
  std::vector<int> threads{1};
  double tol = 1e-12;
  int max_iter = 50;
  std::string out = ".";
  int snapshots = 0;
  std::uint64_t seed = 1;
  int samples = 100;
  bool svg = false;
};

// Resolved pieces shared by the subcommands.
struct Setup {
  WaveProblem problem;
  BoundarySpec bc;
  SolverConfig cfg;
  InitMethod init = InitMethod::Exact;
};

Setup resolve(const Options& o) {
  Setup s{sample_problem(o.problem), {}, {}, parse_init(o.init)};
  if (o.bc.empty()) {
    s.bc = boundary_from_problem(s.problem);
  } else {
    const auto [left, right] = parse_bc(o.bc);
    s.bc = boundary_from_problem(s.problem, left, right);
  }
  s.cfg.tol = o.tol;
  s.cfg.max_iter = o.max_iter;
  s.cfg.validate();
  if (!(o.courant > 0.0)) throw InvalidArgument("--courant must be positive");
  if (o.courant > 1.0) {
    std::cerr << "warning: Courant number lambda = " << o.courant
              << " exceeds 1; the scheme is linearly stable only for lambda <= 1\n";
  }
  return s;
}

int single(const std::vector<int>& v, const char* flag) {
  if (v.size() != 1) throw InvalidArgument(std::string(flag) + " takes one value here");
  return v.front();
}

MeshConfig make_mesh(const WaveProblem& p, int N, double courant, double t_final) {
  return MeshConfig::make(p.a, p.b, N, courant, t_final);
}

double default_dt(const WaveProblem& p, int N, double courant) {
  if (N < 1) throw InvalidArgument("--cells must be positive");
  return courant * (p.b - p.a) / N;
}

// Rounds T to the nearest multiple of dt/2 (at least dt) so every
// half-step lands on the grid.
double snap_t_final(double T, double dt) {
  if (!(T > 0.0)) throw InvalidArgument("--t-final must be positive");
  const double h = std::max(2.0, std::round(2.0 * T / dt));
  const double snapped = 0.5 * dt * h;
  if (std::abs(snapped - T) > 1e-9 * std::max(1.0, T)) {
    std::cerr << "warning: t_final " << T << " rounded to " << snapped << " (" << h
              << " half-steps of dt/2 = " << 0.5 * dt << ")\n";
  }
  return snapped;
}

double final_time(const Options& o, double dt_coarse, double fallback) {
  return o.t_final ? snap_t_final(*o.t_final, dt_coarse) : fallback;
}

RunReport execute(const Setup& s, const MeshConfig& mesh, const RKTableau& tab,
                  const RunOptions& ro, int threads) {
  if (threads < 1) throw InvalidArgument("--threads must be at least 1");
  if (threads == 1) return run(s.problem, mesh, tab, s.bc, s.cfg, ro);
  return parallel_run(s.problem, mesh, tab, s.bc, s.cfg, ro, threads);
}

std::ofstream open_out(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / name;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

void write_snapshot_rows(std::ostream& os, const Snapshot& snap) {
  for (Eigen::Index i = 0; i < snap.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < snap.rows.cols(); ++j) {
      if (j) os << ',';
      os << format_double(snap.rows(i, j));
    }
    os << '\n';
  }
}

int cmd_run(const Options& o) {
  const Setup s = resolve(o);
  const int r = single(o.r, "--r");
  const int N = single(o.cells, "--cells");
  const int threads = single(o.threads, "--threads");
  const double dt = default_dt(s.problem, N, o.courant);
  const MeshConfig mesh = make_mesh(s.problem, N, o.courant, final_time(o, dt, 2.0 * dt));
  const RKTableau tab = gauss_tableau(r);
  RunOptions ro{s.init, o.snapshots};
  RunReport rep = execute(s, mesh, tab, ro, threads);

  std::vector<Snapshot> snaps = std::move(rep.snapshots);
  if (snaps.empty() || snaps.back().half_step != rep.half_steps) {
    snaps.push_back(take_snapshot(rep.final_state, mesh, tab, rep.half_steps));
  }
  {
    std::ofstream os = open_out(o, "snapshots.csv");
    os << "x,t,u,v,w\n";
    for (const Snapshot& snap : snaps) write_snapshot_rows(os, snap);
  }
  {
    std::ofstream os = open_out(o, "summary.csv");
    os << "problem,r,N,dx,dt,courant,t_final,init,bc,workers,half_steps,error,"
          "newton_solves,newton_iterations,newton_max_iterations,newton_fallbacks,"
          "newton_max_residual,initial_max_abs_u,max_abs_u,messages,wall_seconds\n";
    const NewtonTally& nt = rep.newton;
    os << rep.problem << ',' << rep.r << ',' << mesh.N << ',' << format_double(mesh.dx) << ','
       << format_double(mesh.dt) << ',' << format_double(mesh.lambda) << ','
       << format_double(mesh.t_final) << ',' << init_name(rep.init) << ',' << rep.bc << ','
       << rep.workers << ',' << rep.half_steps << ','
       << (rep.error ? format_double(*rep.error) : std::string()) << ',' << nt.solves << ','
       << nt.iterations << ',' << nt.max_iterations << ',' << nt.fallbacks << ','
       << format_double(nt.max_residual) << ',' << format_double(rep.initial_max_abs_u) << ','
       << format_double(rep.max_abs_u) << ',' << rep.messages << ','
       << format_double(rep.wall_seconds) << '\n';
  }
  std::cout << rep.problem << " r=" << rep.r << " N=" << mesh.N << " half-steps "
            << rep.half_steps << " (" << rep.wall_seconds << " s)";
  if (rep.error) std::cout << " error " << *rep.error;
  std::cout << "\n";
  return 0;
}

std::vector<int> sweep_cells(const Options& o) {
  std::vector<int> cells = o.cells;
  if (cells.size() == 1) {
    const int levels = o.levels > 0 ? o.levels : 4;
    for (int i = 1; i < levels; ++i) cells.push_back(cells.back() * 2);
  } else if (o.levels > 0) {
    throw InvalidArgument("--levels needs a single --cells value");
  }
  if (cells.size() < 2) throw InvalidArgument("converge needs at least two mesh sizes");
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (cells[i] != 2 * cells[i - 1]) {
      throw InvalidArgument("converge: --cells must be a doubling sequence");
    }
  }
  return cells;
}

void write_svg(const Options& o, const std::vector<ErrorTable>& tables) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& t : tables) {
    for (const auto& row : t.rows) {
      if (!(row.error > 0.0)) continue;
      xmin = std::min(xmin, std::log10(row.dt));
      xmax = std::max(xmax, std::log10(row.dt));
      ymin = std::min(ymin, std::log10(row.error));
      ymax = std::max(ymax, std::log10(row.error));
    }
  }
  if (!(xmax > xmin) || !(ymax >= ymin)) return;
  if (ymax == ymin) ymax = ymin + 1.0;
  const double W = 640, H = 480, m = 60;
  auto px = [&](double lx) { return m + (lx - xmin) / (xmax - xmin) * (W - 2 * m); };
  auto py = [&](double ly) { return H - m - (ly - ymin) / (ymax - ymin) * (H - 2 * m); };
  const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ofstream os = open_out(o, "convergence.svg");
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\""
     << H - 2 * m << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(xmin)); d <= std::floor(xmax); ++d) {
    os << "<text x=\"" << px(d) << "\" y=\"" << H - m + 18 << "\" text-anchor=\"middle\">1e"
       << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ymin)); d <= std::floor(ymax); ++d) {
    os << "<text x=\"" << m - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << d
       << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">dt</text>\n";
  os << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2
     << ")\" text-anchor=\"middle\">error</text>\n";
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const char* c = colours[i % 6];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& row : tables[i].rows) {
      if (row.error > 0.0) os << px(std::log10(row.dt)) << ',' << py(std::log10(row.error)) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << m + 10 << "\" y=\"" << m + 18 + 16 * i << "\" fill=\"" << c
       << "\">r = " << tables[i].r << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << m - 20 << "\" text-anchor=\"middle\">"
     << tables.front().problem << ", " << tables.front().method << " init</text>\n";
  os << "</svg>\n";
}

int cmd_converge(const Options& o) {
  const Setup s = resolve(o);
  s.problem.require_exact();
  const std::vector<int> cells = sweep_cells(o);
  const int threads = single(o.threads, "--threads");
  const double dt0 = default_dt(s.problem, cells.front(), o.courant);
  const double T = final_time(o, dt0, 2.0 * dt0);
  const std::string bc = bc_code(s.bc.left.kind, s.bc.right.kind);

  std::vector<ErrorTable> tables;
  std::ofstream orders = open_out(o, "orders.csv");
  orders << "problem,init,bc,r,order,used_rows\n";
  for (int r : o.r) {
    const RKTableau tab = gauss_tableau(r);
    ErrorTable table{s.problem.name, init_name(s.init), r, {}};
    for (int N : cells) {
      const MeshConfig mesh = make_mesh(s.problem, N, o.courant, T);
      const RunReport rep = execute(s, mesh, tab, RunOptions{s.init, 0}, std::min(threads, N));
      table.rows.push_back({N, mesh.dx, mesh.dt, *rep.error});
    }
    table.sort();
    {
      std::ofstream os = open_out(o, "errors_r" + std::to_string(r) + ".csv");
      write_error_table_csv(os, table);
    }
    const OrderFit fit = fit_order(table);
    for (const auto& w : fit.warnings) std::cerr << "warning: r=" << r << ": " << w << "\n";
    orders << table.problem << ',' << table.method << ',' << bc << ',' << r << ','
           << format_double(fit.order) << ',' << fit.used_rows << '\n';
    std::cout << table.problem << " " << table.method << " r=" << r << " order "
              << fit.order << "\n";
    tables.push_back(std::move(table));
  }
  if (o.svg) write_svg(o, tables);
  return 0;
}

int cmd_bench(const Options& o) {
  const Setup s = resolve(o);
  const int r = single(o.r, "--r");
  const int N = single(o.cells, "--cells");
  if (std::find(o.threads.begin(), o.threads.end(), 1) == o.threads.end()) {
    throw InvalidArgument("bench: --threads must include 1");
  }
  const double dt = default_dt(s.problem, N, o.courant);
  const MeshConfig mesh = make_mesh(s.problem, N, o.courant, final_time(o, dt, 10.0 * dt));
  const RKTableau tab = gauss_tableau(r);

  std::vector<std::pair<int, double>> timings;
  for (int p : o.threads) {
    const RunReport rep = parallel_run(s.problem, mesh, tab, s.bc, s.cfg, {s.init, 0}, p);
    timings.emplace_back(p, rep.wall_seconds);
    std::cout << "workers " << p << ": " << rep.wall_seconds << " s\n";
  }
  const SpeedupModel model = fit_serial_fraction(timings);
  std::ofstream os = open_out(o, "bench.csv");
  os << "workers,wall_seconds,speedup,fitted_B\n";
  for (const auto& [p, t] : timings) {
    os << p << ',' << format_double(t) << ',' << format_double(model.T1 / t) << ','
       << format_double(model.B) << '\n';
  }
  std::cout << "fitted B = " << model.B << "\n";
  return 0;
}

EdgeData random_edge(std::mt19937_64& rng, int n, int r, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(n, r);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return EdgeData(std::move(m));
}

int cmd_conserve(const Options& o) {
  const Setup s = resolve(o);
  const int N = single(o.cells, "--cells");
  if (o.samples < 1) throw InvalidArgument("--samples must be positive");
  const double dx = (s.problem.b - s.problem.a) / N;
  const double dt = o.courant * dx;
  const PDESystem pde = wave_system(s.problem);
  const int n = pde.n();
  std::mt19937_64 rng(o.seed);

  std::ofstream os = open_out(o, "conserve.csv");
  os << "r,sample,scheme_residual,random_residual\n";
  for (int r : o.r) {
    const RKTableau tab = gauss_tableau(r);
    double worst = 0.0;
    int powered = 0;
    for (int k = 0; k < o.samples; ++k) {
      const EdgeData zl = random_edge(rng, n, r, 0.5), zb = random_edge(rng, n, r, 0.5);
      const EdgeData d1l = random_edge(rng, n, r, 1.0), d1b = random_edge(rng, n, r, 1.0);
      const EdgeData d2l = random_edge(rng, n, r, 1.0), d2b = random_edge(rng, n, r, 1.0);
      const double res =
          diamond_conservation_residual(pde, tab, dx, dt, zl, zb, d1l, d1b, d2l, d2b, s.cfg);
      EdgeVariationSet e1{d1l, d1b, random_edge(rng, n, r, 1.0), random_edge(rng, n, r, 1.0)};
      EdgeVariationSet e2{d2l, d2b, random_edge(rng, n, r, 1.0), random_edge(rng, n, r, 1.0)};
      const double noise = conservation_residual(e1, e2, pde, tab, dx, dt);
      worst = std::max(worst, res);
      if (noise > 1e-3) ++powered;
      os << r << ',' << k << ',' << format_double(res) << ',' << format_double(noise) << '\n';
    }
    std::cout << s.problem.name << " r=" << r << ": max scheme residual " << worst << ", "
              << powered << "/" << o.samples << " random samples above 1e-3\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diamond scheme multisymplectic integrator for u_tt - u_xx = f(u)"};
  app.set_config("--config", "", "key=value configuration file (flags override it)");
  app.require_subcommand(1);
  Options o;

  std::vector<std::string> problems = sample_problem_names();
  app.add_option("--problem", o.problem, "Sample problem")
      ->transform(CLI::IsMember(problems, CLI::ignore_case))
      ->capture_default_str();
  app.add_option("--r", o.r, "Gauss stages (list for converge/conserve)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--cells", o.cells, "Diamonds per row N (list, or N0 with --levels)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--levels", o.levels, "converge: number of doublings from a single --cells")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--courant", o.courant, "lambda = dt/dx")->capture_default_str();
  app.add_option("--t-final", o.t_final, "Final time, rounded to a multiple of dt/2 (default 2 dt at the coarsest mesh)");
  app.add_option("--init", o.init, "Initialization")
      ->check(CLI::IsMember({"exact", "diamond", "phantom"}, CLI::ignore_case))
      ->capture_default_str();
  app.add_option("--bc", o.bc, "Boundary conditions (default: the problem's own)")
      ->check(CLI::IsMember({"periodic", "dd", "dn", "nd", "nn"}, CLI::ignore_case));
  app.add_option("--threads", o.threads, "Worker threads (list for bench)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--tol", o.tol, "Newton residual tolerance")->capture_default_str();
  app.add_option("--max-iter", o.max_iter, "Newton iteration limit")->capture_default_str();
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--snapshots", o.snapshots, "run: snapshot every K full steps (0: final only)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "conserve: random seed")->capture_default_str();
  app.add_option("--samples", o.samples, "conserve: samples per r")->capture_default_str();
  app.add_flag("--svg", o.svg, "converge: also write convergence.svg");

  auto* run_cmd = app.add_subcommand("run", "Single simulation; writes snapshots.csv, summary.csv");
  auto* conv_cmd = app.add_subcommand("converge", "Convergence sweep; writes error tables");
  auto* bench_cmd = app.add_subcommand("bench", "Parallel timing; writes bench.csv");
  auto* cons_cmd = app.add_subcommand("conserve", "Symplectic conservation residual sweep");
  for (auto* sub : {run_cmd, conv_cmd, bench_cmd, cons_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*run_cmd) return cmd_run(o);
    if (*conv_cmd) return cmd_converge(o);
    if (*bench_cmd) return cmd_bench(o);
    return cmd_conserve(o);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const UnsupportedOperation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
