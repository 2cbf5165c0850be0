#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "diamond/pde.hpp"

namespace diamond {

enum class BoundaryKind { Periodic, Dirichlet, Neumann };

/// Closed-form exact solution of a wave equation and the derivatives the
/// initial and boundary treatments consume.
struct ExactWave {
  using Fn = std::function<double(double x, double t)>;
  Fn u, u_t, u_x, u_tt, u_tx, u_xx;
};

/// u_tt - u_xx = f(u) on [a, b], with potential V (V' = f).
struct WaveProblem {
  std::string name;
  std::function<double(double)> V;
  std::function<double(double)> f;
  std::function<double(double)> fprime;
  double a = 0.0;
  double b = 1.0;
  std::optional<ExactWave> exact;
  BoundaryKind left_bc = BoundaryKind::Periodic;
  BoundaryKind right_bc = BoundaryKind::Periodic;

  /// Throws UnsupportedOperation when no exact solution is attached.
  const ExactWave& require_exact() const;
};

/// z = (u, u_t, u_x) formulation:  grad S = (-f(u), v, -w),
/// S'' = diag(-f'(u), 1, -1).
PDESystem wave_system(const WaveProblem& p);

/// Named sample problems: Esin, Sincos, Coscos, SineGordon (periodic) and
/// EsinDD, SincosDD, SincosDN, CoscosDD, CoscosDN, SineGordonDD.  Names
/// are matched case-insensitively; unknown names throw InvalidArgument.
WaveProblem sample_problem(std::string_view name);

std::vector<std::string> sample_problem_names();

/// |u_tt - u_xx - f(u)| at (x, t) from extrapolated central differences of
/// the exact u.
double wave_equation_residual(const WaveProblem& p, double x, double t, double h = 1e-2);

/// Sine-Gordon breather 4 atan(sin(t/sqrt2) / cosh(x/sqrt2)).
double breather(double x, double t);

}  // namespace diamond
