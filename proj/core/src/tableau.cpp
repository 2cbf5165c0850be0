#include "diamond/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "diamond/errors.hpp"

namespace diamond {
namespace {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// P_r(x) and P_r'(x) by the three-term recurrence.
std::pair<long double, long double> legendre(int r, long double x) {
  long double p0 = 1.0L;
  long double p1 = x;
  if (r == 0) return {1.0L, 0.0L};
  for (int k = 2; k <= r; ++k) {
    const long double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  const long double dp = r * (x * p1 - p0) / (x * x - 1.0L);
  return {p1, dp};
}

// Roots of P_r on (-1, 1) in decreasing order, Newton from Chebyshev-like guesses.
std::vector<long double> legendre_roots(int r) {
  std::vector<long double> roots(r);
  const long double pi = std::numbers::pi_v<long double>;
  for (int k = 0; k < r; ++k) {
    long double x = std::cos(pi * (k + 0.75L) / (r + 0.5L));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(r, x);
      const long double dx = p / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    roots[k] = x;
  }
  return roots;
}

}  // namespace

RKTableau gauss_tableau(int r) {
  if (r < 1) {
    throw InvalidArgument("gauss_tableau: stage count must be >= 1, got " +
                          std::to_string(r));
  }
  const auto roots = legendre_roots(r);

  // Shift to (0,1): c = (1 - x)/2 gives increasing abscissae for decreasing roots.
  LVector c(r), b(r);
  for (int k = 0; k < r; ++k) {
    const long double x = roots[k];
    const auto [p, dp] = legendre(r, x);
    c(k) = (1.0L - x) / 2.0L;
    b(k) = 1.0L / ((1.0L - x * x) * dp * dp);  // half the Gauss weight on [-1,1]
  }
  // Enforce exact symmetry c_i + c_{r+1-i} = 1 and b_i = b_{r+1-i}.
  for (int k = 0; k < r / 2; ++k) {
    const long double cc = (c(k) + 1.0L - c(r - 1 - k)) / 2.0L;
    c(k) = cc;
    c(r - 1 - k) = 1.0L - cc;
    const long double bb = (b(k) + b(r - 1 - k)) / 2.0L;
    b(k) = bb;
    b(r - 1 - k) = bb;
  }
  if (r % 2 == 1) c(r / 2) = 0.5L;

  // Collocation conditions sum_k a_ik c_k^{q-1} = c_i^q / q, q = 1..r:
  // V a_i = rhs_i with V(q, k) = c_k^{q-1}.
  LMatrix V(r, r), rhs(r, r);
  for (int q = 0; q < r; ++q) {
    for (int k = 0; k < r; ++k) V(q, k) = std::pow(c(k), static_cast<long double>(q));
    for (int i = 0; i < r; ++i)
      rhs(q, i) = std::pow(c(i), static_cast<long double>(q + 1)) / (q + 1);
  }
  const LMatrix At = V.fullPivLu().solve(rhs);  // column i holds row i of A
  const LMatrix A = At.transpose();
  const LMatrix A_inv = A.fullPivLu().inverse();

  RKTableau tab;
  tab.r = r;
  tab.A = A.cast<double>();
  tab.b = b.cast<double>();
  tab.c = c.cast<double>();
  tab.A_inv = A_inv.cast<double>();
  tab.A_inv_rowsum = A_inv.rowwise().sum().cast<double>();
  return tab;
}

}  // namespace diamond
