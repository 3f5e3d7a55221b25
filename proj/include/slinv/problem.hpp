#pragma once

#include <cmath>
#include <optional>

#include "slinv/ode.hpp"

namespace slinv {

/// Full data of the boundary-value problems B0 (y(1) = 0) and B1 (Robin constant H
/// at x = 1) with the jump y1(a) = y2/a1, y1'(a) = -(a1 y2' + a2 y2) at the interface.
/// The right-hand piece is parametrized from x = 1 backwards, so q2 lives on [0, 1 - a].
struct ProblemSpec {
  double a = 0.5;
  ComplexGrid q1;
  ComplexGrid q2;
  cd h = 0.0;
  std::optional<cd> H = cd(0.0);  // empty means H = infinity (only B0 is defined)
  double a1 = 1.0;
  cd a2 = 0.0;

  double d1() const { return a; }
  double d2() const { return 1.0 - a; }

  void validate() const {
    if (!(a > 0.0 && a < 1.0)) throw input_error("spec", "a must lie in (0, 1)");
    if (!(a1 > 0.0) || !std::isfinite(a1)) throw input_error("spec", "a1 must be positive");
    if (std::abs(q1.length() - d1()) > 1e-12) throw input_error("spec", "q1 grid must span [0, a]");
    if (std::abs(q2.length() - d2()) > 1e-12) throw input_error("spec", "q2 grid must span [0, 1 - a]");
    if (!finite(h) || !finite(a2) || (H && !finite(*H))) throw input_error("spec", "non-finite constants");
  }

  /// Zero potentials on grids with `n` samples.
  static ProblemSpec zero(double a, double a1 = 1.0, cd a2 = 0.0, cd h = 0.0, std::optional<cd> H = cd(0.0),
                          std::size_t n = 257) {
    ProblemSpec s;
    s.a = a;
    s.q1 = ComplexGrid::constant(a, n, 0.0);
    s.q2 = ComplexGrid::constant(1.0 - a, n, 0.0);
    s.h = h;
    s.H = H;
    s.a1 = a1;
    s.a2 = a2;
    return s;
  }
};

/// What the inverse problem is given: everything except q1 and h, plus the mean constant.
struct KnownData {
  double a = 0.5;
  ComplexGrid q2;
  std::optional<cd> H = cd(0.0);
  double a1 = 1.0;
  cd a2 = 0.0;
  cd omega1 = 0.0;

  static KnownData from(const ProblemSpec& s) {
    return KnownData{s.a, s.q2, s.H, s.a1, s.a2, s.h + 0.5 * s.q1.integral()};
  }
};

/// Jets of phi(a), phi'(a) with phi(0) = 1, phi'(0) = h.
inline SolutionJet phi_jet(const ProblemSpec& spec, cd lambda, int nu_max, const IntegratorOptions& opt = {}) {
  return integrate_jet(spec.q1, lambda, 1.0, spec.h, nu_max, opt);
}

/// Jets of psi_i(d2), psi_i'(d2); psi_0 starts from (0, 1), psi_1 from (1, H).
inline SolutionJet psi_jet(const ComplexGrid& q2, const std::optional<cd>& H, int i, cd lambda, int nu_max,
                           const IntegratorOptions& opt = {}) {
  if (i == 0) return integrate_jet(q2, lambda, 0.0, 1.0, nu_max, opt);
  if (i != 1) throw input_error("sl-core", "boundary tag must be 0 or 1");
  if (!H) throw input_error("sl-core", "problem B1 needs a finite H");
  return integrate_jet(q2, lambda, 1.0, *H, nu_max, opt);
}

inline SolutionJet psi_jet(const ProblemSpec& spec, int i, cd lambda, int nu_max, const IntegratorOptions& opt = {}) {
  return psi_jet(spec.q2, spec.H, i, lambda, nu_max, opt);
}

}  // namespace slinv
