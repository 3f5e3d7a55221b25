// Shared fixtures and independent oracles for the unit and acceptance suites.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "slinv/slinv.hpp"

namespace testing_support {

using slinv::cd;
using Potential = std::function<cd(double)>;
constexpr double pi = std::numbers::pi;

struct AnalyticProblem {
  double a = 0.5;
  Potential q1 = [](double) { return cd(0.0); };
  Potential q2 = [](double) { return cd(0.0); };
  cd h = 0.0;
  cd H = 0.0;
  double a1 = 1.0;
  cd a2 = 0.0;

  slinv::ProblemSpec spec(std::size_t n = 257) const {
    slinv::ProblemSpec s;
    s.a = a;
    s.q1 = slinv::ComplexGrid::sample(a, n, q1);
    s.q2 = slinv::ComplexGrid::sample(1.0 - a, n, q2);
    s.h = h;
    s.H = H;
    s.a1 = a1;
    s.a2 = a2;
    return s;
  }
};

/// Smooth complex potentials with a1 = 2 and complex jump and boundary constants.
inline AnalyticProblem generic_problem(double a = 0.5) {
  AnalyticProblem p;
  p.a = a;
  p.q1 = [](double x) { return cd(0.4 * std::cos(2 * pi * x), 0.3 * x); };
  p.q2 = [](double x) { return cd(1.0 + x * x, -0.5); };
  p.h = cd(0.2, -0.1);
  p.H = cd(-0.3, 0.4);
  p.a1 = 2.0;
  p.a2 = cd(0.3, 0.1);
  return p;
}

// ---------------------------------------------------------------------------
// Classical RK4 shooting on analytic potentials (no jets, no grids).

inline std::pair<cd, cd> shoot(const Potential& q, double length, cd lambda, cd y0, cd dy0, int steps) {
  cd y = y0, p = dy0;
  const double h = length / steps;
  auto f = [&](double x, cd yy, cd pp) { return std::pair<cd, cd>{pp, (q(x) - lambda) * yy}; };
  for (int k = 0; k < steps; ++k) {
    const double x = k * h;
    const auto [k1y, k1p] = f(x, y, p);
    const auto [k2y, k2p] = f(x + h / 2, y + h / 2 * k1y, p + h / 2 * k1p);
    const auto [k3y, k3p] = f(x + h / 2, y + h / 2 * k2y, p + h / 2 * k2p);
    const auto [k4y, k4p] = f(x + h, y + h * k3y, p + h * k3p);
    y += h / 6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    p += h / 6 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  }
  return {y, p};
}

inline int rk4_steps(cd lambda, double length) {
  return std::max(400, int(60.0 * length * (std::abs(std::sqrt(lambda)) + 1.0)));
}

/// Characteristic function of B_i by direct shooting from both ends.
inline cd delta_rk4(const AnalyticProblem& p, int i, cd lambda) {
  const double d2 = 1.0 - p.a;
  const auto [ph, dph] = shoot(p.q1, p.a, lambda, 1.0, p.h, rk4_steps(lambda, p.a));
  const auto [ps, dps] = (i == 0) ? shoot(p.q2, d2, lambda, 0.0, 1.0, rk4_steps(lambda, d2))
                                  : shoot(p.q2, d2, lambda, 1.0, p.H, rk4_steps(lambda, d2));
  const cd g0 = -ps / p.a1;
  const cd g1 = p.a1 * dps + p.a2 * ps;
  return ph * g1 - dph * g0;
}

/// Real zeros of a real-valued function on [lo, hi] by a uniform scan plus bisection.
inline std::vector<double> scan_bisect(const std::function<double(double)>& f, double lo, double hi, double step) {
  std::vector<double> roots;
  double x0 = lo, f0 = f(lo);
  for (double x1 = lo + step; x1 <= hi + 1e-12; x1 += step) {
    const double f1 = f(x1);
    if (f0 == 0.0) roots.push_back(x0);
    else if (f0 * f1 < 0.0) {
      double a = x0, b = x1, fa = f0;
      for (int k = 0; k < 200 && b - a > 1e-14 * (1.0 + std::abs(a)); ++k) {
        const double m = 0.5 * (a + b), fm = f(m);
        if (fa * fm <= 0.0) b = m;
        else {
          a = m;
          fa = fm;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

/// Zeros inside a circle by the argument principle with dense uniform sampling.
inline int winding_count(const std::function<cd(cd)>& f, cd center, double radius, int samples = 4000) {
  double total = 0.0;
  cd prev = f(center + radius);
  for (int k = 1; k <= samples; ++k) {
    const cd z = center + std::polar(radius, 2 * pi * k / samples);
    const cd v = f(z);
    total += std::arg(v / prev);
    prev = v;
  }
  return int(std::lround(total / (2 * pi)));
}

/// Composite Simpson on [0, L] for an analytic integrand, used as a quadrature oracle.
template <class F>
auto simpson(F&& f, double L, int n) {
  if (n % 2) ++n;
  const double h = L / n;
  decltype(f(0.0)) acc = f(0.0) + f(L);
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return acc * (h / 3.0);
}

// ---------------------------------------------------------------------------
// A problem with a double eigenvalue of B1.

struct DoubleEigen {
  AnalyticProblem problem;
  cd lambda;
};

/// Delta_1 is affine in H, Delta_1 = A + H B. A double zero at lambda needs
/// W = A B' - A' B = 0 there, with H = -A / B. For q = 0, a1 = 1, a2 = 0 this happens at
/// lambda = 0 when h^2 + 3h + 3 = 0; the potentials are switched on by continuation.
inline DoubleEigen double_eigenvalue_problem(int continuation_steps = 8) {
  AnalyticProblem p;
  p.a = 0.5;
  p.a1 = 1.0;
  p.a2 = 0.0;
  p.h = cd(-1.5, std::sqrt(3.0) / 2);
  const Potential q1 = [](double x) { return cd(0.3 * std::cos(2 * pi * x), 0.2 * x); };
  const Potential q2 = [](double x) { return cd(0.2 + 0.3 * x, -0.1); };
  cd lam = 0.0;
  auto jets = [&](cd l, const AnalyticProblem& pr) {
    slinv::ProblemSpec s = pr.spec();
    s.H = cd(0.0);
    const slinv::Jet A = slinv::delta(s, 1, l, 2);
    s.H = cd(1.0);
    const slinv::Jet B = slinv::delta(s, 1, l, 2) - A;
    return std::pair{A, B};
  };
  for (int step = 1; step <= continuation_steps; ++step) {
    const double s = double(step) / continuation_steps;
    p.q1 = [q1, s](double x) { return s * q1(x); };
    p.q2 = [q2, s](double x) { return s * q2(x); };
    for (int it = 0; it < 30; ++it) {
      const auto [A, B] = jets(lam, p);
      // W = A B' - A' B with W' = A B'' - A'' B (jets store f^(k)/k!).
      const cd W = A[0] * B[1] - A[1] * B[0];
      const cd dW = 2.0 * (A[0] * B[2] - A[2] * B[0]);
      const cd d = W / dW;
      lam -= d;
      if (std::abs(d) < 1e-14 * (1.0 + std::abs(lam))) break;
    }
  }
  const auto [A, B] = jets(lam, p);
  p.H = -A[0] / B[0];
  return {p, lam};
}

}  // namespace testing_support
