#include "diamond/problems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "diamond/errors.hpp"

namespace diamond {

const ExactWave& WaveProblem::require_exact() const {
  if (!exact) throw UnsupportedOperation("problem '" + name + "' has no exact solution");
  return *exact;
}

PDESystem wave_system(const WaveProblem& p) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(3, 3);
  K(0, 1) = -1.0;
  K(1, 0) = 1.0;
  L(0, 2) = 1.0;
  L(2, 0) = -1.0;
  auto f = p.f;
  auto fprime = p.fprime;
  PDESystem::Gradient grad = [f](const Eigen::VectorXd& z) {
    return Eigen::VectorXd(Eigen::Vector3d(-f(z(0)), z(1), -z(2)));
  };
  PDESystem::Hessian hess = [fprime](const Eigen::VectorXd& z) {
    return Eigen::MatrixXd(Eigen::Vector3d(-fprime(z(0)), 1.0, -1.0).asDiagonal());
  };
  std::optional<PDESystem::Field> exact;
  if (p.exact) {
    const ExactWave e = *p.exact;
    exact = [e](double x, double t) {
      return Eigen::VectorXd(Eigen::Vector3d(e.u(x, t), e.u_t(x, t), e.u_x(x, t)));
    };
  }
  return PDESystem(std::move(K), std::move(L), std::move(grad), std::move(hess),
                   std::move(exact));
}

double breather(double x, double t) {
  const double s = 1.0 / std::numbers::sqrt2;
  return 4.0 * std::atan(std::sin(s * t) / std::cosh(s * x));
}

namespace {

ExactWave esin_exact() {
  // u = exp(2 sin(x - t - 3))
  ExactWave e;
  e.u = [](double x, double t) { return std::exp(2.0 * std::sin(x - t - 3.0)); };
  e.u_x = [](double x, double t) {
    const double p = x - t - 3.0;
    return 2.0 * std::cos(p) * std::exp(2.0 * std::sin(p));
  };
  e.u_t = [](double x, double t) {
    const double p = x - t - 3.0;
    return -2.0 * std::cos(p) * std::exp(2.0 * std::sin(p));
  };
  auto second = [](double x, double t) {
    const double p = x - t - 3.0;
    const double c = std::cos(p);
    return (4.0 * c * c - 2.0 * std::sin(p)) * std::exp(2.0 * std::sin(p));
  };
  e.u_xx = second;
  e.u_tt = second;
  e.u_tx = [second](double x, double t) { return -second(x, t); };
  return e;
}

ExactWave sincos_exact() {
  ExactWave e;
  e.u = [](double x, double t) { return std::sin(x) * std::cos(t); };
  e.u_t = [](double x, double t) { return -std::sin(x) * std::sin(t); };
  e.u_x = [](double x, double t) { return std::cos(x) * std::cos(t); };
  e.u_tt = [](double x, double t) { return -std::sin(x) * std::cos(t); };
  e.u_xx = [](double x, double t) { return -std::sin(x) * std::cos(t); };
  e.u_tx = [](double x, double t) { return -std::cos(x) * std::sin(t); };
  return e;
}

ExactWave coscos_exact() {
  const double w = std::sqrt(5.0);
  ExactWave e;
  e.u = [w](double x, double t) { return std::cos(2 * x) * std::cos(w * t); };
  e.u_t = [w](double x, double t) { return -w * std::cos(2 * x) * std::sin(w * t); };
  e.u_x = [w](double x, double t) { return -2.0 * std::sin(2 * x) * std::cos(w * t); };
  e.u_tt = [w](double x, double t) { return -5.0 * std::cos(2 * x) * std::cos(w * t); };
  e.u_xx = [w](double x, double t) { return -4.0 * std::cos(2 * x) * std::cos(w * t); };
  e.u_tx = [w](double x, double t) { return 2.0 * w * std::sin(2 * x) * std::sin(w * t); };
  return e;
}

// u = 4 atan(q), q = sin(at)/cosh(ax), a = 1/sqrt2.
// u_p = 4 q_p / (1 + q^2);  u_pq = 4 (q_pq / (1 + q^2) - 2 q q_p q_q / (1 + q^2)^2).
ExactWave breather_exact() {
  struct Q {
    double q, qt, qx, qtt, qxx, qtx;
  };
  auto eval = [](double x, double t) {
    const double a = 1.0 / std::numbers::sqrt2;
    const double S = std::sin(a * t), C = std::cos(a * t);
    const double ch = std::cosh(a * x), sh = std::sinh(a * x);
    Q q;
    q.q = S / ch;
    q.qt = a * C / ch;
    q.qtt = -a * a * S / ch;
    q.qx = -a * S * sh / (ch * ch);
    q.qxx = -a * a * S * (ch * ch - 2.0 * sh * sh) / (ch * ch * ch);
    q.qtx = -a * a * C * sh / (ch * ch);
    return q;
  };
  auto first = [](double q, double qp) { return 4.0 * qp / (1.0 + q * q); };
  auto second = [](double q, double qa, double qb, double qab) {
    const double d = 1.0 + q * q;
    return 4.0 * (qab / d - 2.0 * q * qa * qb / (d * d));
  };
  ExactWave e;
  e.u = [](double x, double t) { return breather(x, t); };
  e.u_t = [=](double x, double t) {
    const Q q = eval(x, t);
    return first(q.q, q.qt);
  };
  e.u_x = [=](double x, double t) {
    const Q q = eval(x, t);
    return first(q.q, q.qx);
  };
  e.u_tt = [=](double x, double t) {
    const Q q = eval(x, t);
    return second(q.q, q.qt, q.qt, q.qtt);
  };
  e.u_xx = [=](double x, double t) {
    const Q q = eval(x, t);
    return second(q.q, q.qx, q.qx, q.qxx);
  };
  e.u_tx = [=](double x, double t) {
    const Q q = eval(x, t);
    return second(q.q, q.qt, q.qx, q.qtx);
  };
  return e;
}

WaveProblem linear_free(std::string name, double a, double b, ExactWave e) {
  WaveProblem p;
  p.name = std::move(name);
  p.V = [](double) { return 0.0; };
  p.f = [](double) { return 0.0; };
  p.fprime = [](double) { return 0.0; };
  p.a = a;
  p.b = b;
  p.exact = std::move(e);
  return p;
}

WaveProblem coscos(std::string name, double a, double b) {
  WaveProblem p;
  p.name = std::move(name);
  p.V = [](double u) { return -0.5 * u * u; };
  p.f = [](double u) { return -u; };
  p.fprime = [](double) { return -1.0; };
  p.a = a;
  p.b = b;
  p.exact = coscos_exact();
  return p;
}

WaveProblem sine_gordon(std::string name, double a, double b) {
  WaveProblem p;
  p.name = std::move(name);
  p.V = [](double u) { return std::cos(u); };
  p.f = [](double u) { return -std::sin(u); };
  p.fprime = [](double u) { return -std::cos(u); };
  p.a = a;
  p.b = b;
  p.exact = breather_exact();
  return p;
}

WaveProblem with_bc(WaveProblem p, BoundaryKind left, BoundaryKind right) {
  p.left_bc = left;
  p.right_bc = right;
  return p;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

std::vector<std::string> sample_problem_names() {
  return {"Esin",   "Sincos",   "Coscos",   "SineGordon", "EsinDD",
          "SincosDD", "SincosDN", "CoscosDD", "CoscosDN",   "SineGordonDD"};
}

WaveProblem sample_problem(std::string_view name) {
  constexpr double pi = std::numbers::pi;
  constexpr auto D = BoundaryKind::Dirichlet;
  constexpr auto Nm = BoundaryKind::Neumann;
  const std::string key = lower(name);
  if (key == "esin") return linear_free("Esin", 0.0, 2 * pi, esin_exact());
  if (key == "sincos") return linear_free("Sincos", 0.0, 2 * pi, sincos_exact());
  if (key == "coscos") return coscos("Coscos", 0.0, pi);
  if (key == "sinegordon") return sine_gordon("SineGordon", -30.0, 30.0);
  if (key == "esindd") return with_bc(linear_free("EsinDD", 0.2, pi / 3, esin_exact()), D, D);
  if (key == "sincosdd") {
    return with_bc(linear_free("SincosDD", 0.2, pi / 3, sincos_exact()), D, D);
  }
  if (key == "sincosdn") {
    return with_bc(linear_free("SincosDN", 0.2, pi / 3, sincos_exact()), D, Nm);
  }
  if (key == "coscosdd") return with_bc(coscos("CoscosDD", 0.2, pi / 3), D, D);
  if (key == "coscosdn") return with_bc(coscos("CoscosDN", 0.2, pi / 3), D, Nm);
  if (key == "sinegordondd") return with_bc(sine_gordon("SineGordonDD", -2.0, 2.0), D, D);
  throw InvalidArgument("unknown problem '" + std::string(name) + "'");
}

double wave_equation_residual(const WaveProblem& p, double x, double t, double h) {
  const ExactWave& e = p.require_exact();
  const double u0 = e.u(x, t);
  // Richardson-extrapolated central second differences, O(h^4).
  auto d2 = [&](double hh, bool in_time) {
    const double up = in_time ? e.u(x, t + hh) : e.u(x + hh, t);
    const double um = in_time ? e.u(x, t - hh) : e.u(x - hh, t);
    return (up - 2.0 * u0 + um) / (hh * hh);
  };
  const double utt = (4.0 * d2(h / 2, true) - d2(h, true)) / 3.0;
  const double uxx = (4.0 * d2(h / 2, false) - d2(h, false)) / 3.0;
  return std::abs(utt - uxx - p.f(u0));
}

}  // namespace diamond
