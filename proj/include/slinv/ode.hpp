#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "slinv/grid.hpp"
#include "slinv/jet.hpp"

namespace slinv {

struct IntegratorOptions {
  double steps_per_rho = 8.0;    // steps >= steps_per_rho * |rho| * length
  long min_steps = 0;            // lower bound on the total step count
  long max_steps = 4'000'000;    // overflow guard
};

/// Values y<nu>(d), y'<nu>(d) at the right endpoint, nu = 0..order.
struct SolutionJet {
  int order = 0;
  std::vector<cd> y;
  std::vector<cd> yprime;

  Jet y_jet() const { return to_jet(y); }
  Jet yprime_jet() const { return to_jet(yprime); }

private:
  Jet to_jet(const std::vector<cd>& v) const {
    Jet j(order);
    for (int k = 0; k <= order; ++k) j[k] = v[std::size_t(k)];
    return j;
  }
};

/// Step count aligned with the potential grid so each step sees one linear piece.
inline long integration_steps(const ComplexGrid& q, cd lambda, const IntegratorOptions& opt) {
  const double rho = std::abs(std::sqrt(lambda));
  const double want = std::max<double>(double(opt.min_steps), std::ceil(opt.steps_per_rho * rho * q.length()));
  const long cells = long(q.cells());
  const double per_cell = std::max(1.0, std::ceil(want / double(cells)));
  const double total = per_cell * double(cells);
  if (total > double(opt.max_steps))
    throw numerical_error("sl-core", "step-count overflow: |lambda| = " + std::to_string(std::abs(lambda)) +
                                         " needs " + std::to_string(total) + " steps (cap " +
                                         std::to_string(opt.max_steps) + ")");
  return long(total);
}

namespace detail {

/// C(z) = cos sqrt z and S(z) = sin sqrt z / sqrt z as plain values.
inline void cos_sinc(cd z, cd& C, cd& S) {
  if (std::norm(z) <= 0.01) {
    // Horner on the Taylor series; |z| <= 0.1 leaves terms below 1e-17 after k = 7.
    cd c = 0.0, s = 0.0;
    for (int k = 8; k >= 0; --k) {
      c = c * z + ((k % 2 == 0) ? 1.0 : -1.0) / slinv::detail::factorial(2 * k);
      s = s * z + ((k % 2 == 0) ? 1.0 : -1.0) / slinv::detail::factorial(2 * k + 1);
    }
    C = c;
    S = s;
    return;
  }
  const cd w = std::sqrt(z);
  C = std::cos(w);
  S = std::sin(w) / w;
}

}  // namespace detail

/// Solves -u'' + q u = lambda u on (0, d) from (y0, yp0) and returns the normalized
/// lambda-derivatives of u(d), u'(d) up to nu_max.
///
/// Each step applies the fourth-order Magnus exponential with two Gauss points. The
/// exponent is affine in lambda, so carrying every quantity as a truncated Taylor
/// series in lambda differentiates the discrete propagator exactly; for nu >= 1 the
/// result solves the variational chain -u_nu'' + (q - lambda) u_nu = u_{nu-1}.
inline SolutionJet integrate_jet(const ComplexGrid& q, cd lambda, cd y0, cd yp0, int nu_max,
                                 const IntegratorOptions& opt = {}) {
  if (nu_max < 0) throw input_error("sl-core", "nu_max must be non-negative");
  if (nu_max > kMaxJetOrder) throw input_error("sl-core", "nu_max exceeds the supported jet order");
  if (!finite(lambda) || !finite(y0) || !finite(yp0))
    throw input_error("sl-core", "non-finite lambda or initial data");

  const long steps = integration_steps(q, lambda, opt);
  const double h = q.length() / double(steps);
  const double g1 = 0.5 - std::sqrt(3.0) / 6.0, g2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double c3 = std::sqrt(3.0) / 12.0;

  if (nu_max == 0) {
    cd y = y0, yp = yp0, C, S;
    for (long s = 0; s < steps; ++s) {
      const double x = h * double(s);
      const cd q1 = q(x + g1 * h), q2 = q(x + g2 * h);
      const cd qbar = 0.5 * (q1 + q2);
      const cd alpha = c3 * h * h * (q1 - q2);
      detail::cos_sinc(h * h * (lambda - qbar) - alpha * alpha, C, S);
      const cd ny = (C + S * alpha) * y + S * h * yp;
      yp = S * (qbar - lambda) * h * y + (C - S * alpha) * yp;
      y = ny;
    }
    if (!finite(y) || !finite(yp)) throw numerical_error("sl-core", "integration produced non-finite values");
    SolutionJet out;
    out.y = {y};
    out.yprime = {yp};
    return out;
  }

  Jet y(nu_max, y0), yp(nu_max, yp0);
  Jet C, S;
  const Jet lam = Jet::variable(nu_max, lambda);
  for (long s = 0; s < steps; ++s) {
    const double x = h * double(s);
    const cd q1 = q(x + g1 * h), q2 = q(x + g2 * h);
    const cd qbar = 0.5 * (q1 + q2);
    const cd alpha = c3 * h * h * (q1 - q2);
    // exp(Omega) = C(u) I + S(u) Omega with u = h^2 (lambda - qbar) - alpha^2.
    const cd u0 = h * h * (lambda - qbar) - alpha * alpha;
    cos_sinc_jets(u0, nu_max, C, S);
    const Jet Cj = C.rescaled(h * h), Sj = S.rescaled(h * h);
    const Jet lower = (qbar - lam) * h;  // Omega_21
    const Jet e11 = Cj + Sj * alpha;
    const Jet e22 = Cj - Sj * alpha;
    const Jet e12 = Sj * h;
    const Jet e21 = Sj * lower;
    const Jet ny = e11 * y + e12 * yp;
    yp = e21 * y + e22 * yp;
    y = ny;
  }
  SolutionJet out;
  out.order = nu_max;
  out.y.resize(std::size_t(nu_max) + 1);
  out.yprime.resize(std::size_t(nu_max) + 1);
  for (int k = 0; k <= nu_max; ++k) {
    out.y[std::size_t(k)] = y[k];
    out.yprime[std::size_t(k)] = yp[k];
  }
  for (int k = 0; k <= nu_max; ++k)
    if (!finite(out.y[std::size_t(k)]) || !finite(out.yprime[std::size_t(k)]))
      throw numerical_error("sl-core", "integration produced non-finite values");
  return out;
}

}  // namespace slinv
