#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "slinv/main_eq.hpp"

namespace slinv {

// ---------------------------------------------------------------------------
// Closed forms for zero potentials

struct ClosedForms {
  cd u1, u2;  // u_{i,1}, u_{i,2}
  cd v1, v2;
};

/// u_{i,1}, u_{i,2} (the rows for q = 0, H = 0, a2 = 0) and v_1, v_2 at (t, lambda).
inline ClosedForms closed_forms(double t, cd lambda, int i, double a1, double a) {
  if (!(t >= 0.0 && t <= a)) throw input_error("basis-lab", "t must lie in [0, a]");
  if (i != 0 && i != 1) throw input_error("basis-lab", "i must be 0 or 1");
  const double d2 = 1.0 - a;
  auto cs = [&](double x) {  // cos(rho x), sin(rho x)/rho
    cd C, S;
    detail::cos_sinc(lambda * x * x, C, S);
    return std::pair<cd, cd>{C, S * x};
  };
  const auto [cp, sp] = cs(d2 + t);
  const auto [cm, sm] = cs(std::abs(d2 - t));
  const double sg = (d2 - t) < 0 ? -1.0 : 1.0;  // sin is odd, cos even
  ClosedForms r;
  if (i == 1) {
    r.u1 = 0.5 * a1 * (cp - cm);
    r.u2 = -0.5 / a1 * (cm + cp);
  } else {
    r.u1 = 0.5 * a1 * (sp - sg * sm);
    r.u2 = -0.5 / a1 * (sg * sm + sp);
  }
  const auto [vp, _1] = cs(a + t);
  const auto [vm, _2] = cs(a - t);
  r.v1 = 0.5 * (vp - vm);
  r.v2 = 0.5 * (vm + vp);
  return r;
}

// ---------------------------------------------------------------------------
// Cosine systems on (0, L)

struct FrequencySystem {
  std::vector<cd> alphas;
  double interval_length = 1.0;  // 2a
};

namespace detail {

/// int_0^L cos(x t) cos(y t) dt in closed form.
inline cd cos_cos_integral(cd x, cd y, double L) {
  cd C, Sm, Sp;
  cos_sinc((x - y) * (x - y) * L * L, C, Sm);
  cos_sinc((x + y) * (x + y) * L * L, C, Sp);
  return 0.5 * L * (Sm + Sp);
}

inline void check_hypothesis(const std::vector<cd>& al, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t l = 0; l < count; ++l) {
      if (k == l) continue;
      const double tol = 1e-12 * (1.0 + std::abs(al[k]));
      // cos is even, so -alpha names the same function.
      for (cd other : {al[l], -al[l], std::conj(al[l]), -std::conj(al[l])})
        if (std::abs(al[k] - other) < tol)
          throw input_error("basis-lab", "frequencies " + std::to_string(k) + " and " + std::to_string(l) +
                                             " coincide up to sign or conjugation");
    }
}

}  // namespace detail

/// Gram matrix G_jk = int_0^L conj(cos(alpha_j t)) cos(alpha_k t) dt of the first M entries.
inline Eigen::MatrixXcd cosine_gram(const FrequencySystem& fs, int M) {
  Eigen::MatrixXcd G(M, M);
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < M; ++k)
      G(j, k) = detail::cos_cos_integral(std::conj(fs.alphas[std::size_t(j)]), fs.alphas[std::size_t(k)],
                                         fs.interval_length);
  return G;
}

struct RieszReport {
  int M = 0;
  double frame_lower = 0.0;
  double frame_upper = 0.0;
  double condition = 1.0;
  // Smallest eigenvalue of the projection of the first M lattice cosines onto the span of
  // all supplied frequencies; near 1 when the span covers those modes (heuristic).
  double coverage = 0.0;
};

/// Frame-bound proxies from the extreme eigenvalues of the M x M Gram section.
inline RieszReport riesz_diagnostics(const FrequencySystem& fs, int M) {
  if (M < 1 || M > int(fs.alphas.size())) throw input_error("basis-lab", "M must lie in [1, number of alphas]");
  if (!(fs.interval_length > 0.0)) throw input_error("basis-lab", "interval length must be positive");
  detail::check_hypothesis(fs.alphas, fs.alphas.size());
  const double L = fs.interval_length;
  RieszReport r;
  r.M = M;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cosine_gram(fs, M));
  r.frame_lower = es.eigenvalues()(0);
  r.frame_upper = es.eigenvalues()(M - 1);
  r.condition = r.frame_lower > 0.0 ? r.frame_upper / r.frame_lower : std::numeric_limits<double>::infinity();

  const int Na = int(fs.alphas.size());
  const Eigen::MatrixXcd G = cosine_gram(fs, Na);
  Eigen::MatrixXcd C(Na, M);  // <f_n, e_k>
  for (int n = 0; n < Na; ++n)
    for (int k = 0; k < M; ++k) {
      const double norm = (k == 0) ? std::sqrt(1.0 / L) : std::sqrt(2.0 / L);
      C(n, k) = norm * detail::cos_cos_integral(std::conj(fs.alphas[std::size_t(n)]), k * std::numbers::pi / L, L);
    }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(G);
  const Eigen::MatrixXcd P = C.adjoint() * cod.solve(C);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ps(0.5 * (P + P.adjoint()));
  r.coverage = ps.eigenvalues()(0);
  return r;
}

struct PlateauReport {
  std::vector<RieszReport> sections;
  bool plateau = false;  // last two conditions within 10% and coverage above 1/2
};

inline PlateauReport riesz_plateau(const FrequencySystem& fs, const std::vector<int>& Ms = {16, 32, 64, 128}) {
  PlateauReport p;
  for (int M : Ms) p.sections.push_back(riesz_diagnostics(fs, M));
  if (p.sections.size() >= 2) {
    const auto& x = p.sections[p.sections.size() - 2];
    const auto& y = p.sections.back();
    p.plateau = std::isfinite(y.condition) && std::abs(y.condition - x.condition) <= 0.1 * x.condition &&
                y.coverage > 0.5;
  }
  return p;
}

// ---------------------------------------------------------------------------

/// |<v_j, v_k> - (1/2) int_0^{2a} cos(conj(alpha_j) t) cos(alpha_k t) dt|, each side by
/// its own quadrature.
inline double vn_identity_check(cd alpha_j, cd alpha_k, double a) {
  if (!(a > 0.0)) throw input_error("basis-lab", "a must be positive");
  const double freq = std::max(std::abs(alpha_j.real()), std::abs(alpha_k.real()));
  const double grow = std::abs(alpha_j.imag()) + std::abs(alpha_k.imag());
  const int pl = oscillatory_panels(2 * a, 2 * freq, grow, 8);
  const cd lj = alpha_j * alpha_j, lk = alpha_k * alpha_k;
  const cd lhs = integrate(
      [&](double t) {
        const ClosedForms fj = closed_forms(t, lj, 1, 1.0, a);
        const ClosedForms fk = closed_forms(t, lk, 1, 1.0, a);
        return std::conj(fj.v1) * fk.v1 + std::conj(fj.v2) * fk.v2;
      },
      0.0, a, pl, 16);
  const cd rhs = 0.5 * integrate(
                           [&](double t) { return std::cos(std::conj(alpha_j) * t) * std::cos(alpha_k * t); }, 0.0,
                           2 * a, 2 * pl + 1, 20);
  return std::abs(lhs - rhs);
}

struct BesselReport {
  double sum = 0.0;
  double bound_ratio = 0.0;
  std::vector<double> partial_ratios;  // ratio after each term
  double separation = 0.0;             // min |rho_n - rho_m|
  double max_imag = 0.0;
};

/// sum_n |int_{-b}^{b} W(t) e^{i rho_n t} dt|^2 and its ratio to ||W||^2. W is sampled on
/// [0, 2b] and shifted to (-b, b).
inline BesselReport bessel_check(const std::vector<cd>& rhos, const ComplexGrid& W) {
  BesselReport rep;
  const double b = 0.5 * W.length();
  rep.separation = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < rhos.size(); ++n) {
    rep.max_imag = std::max(rep.max_imag, std::abs(rhos[n].imag()));
    for (std::size_t m = n + 1; m < rhos.size(); ++m)
      rep.separation = std::min(rep.separation, std::abs(rhos[n] - rhos[m]));
  }
  if (rhos.size() > 1 && !(rep.separation > 1e-9))
    throw input_error("basis-lab", "frequencies are not separated (min gap " + std::to_string(rep.separation) + ")");
  const double norm2 = W.l2_norm() * W.l2_norm();
  if (!(norm2 > 0.0)) throw input_error("basis-lab", "W must be nonzero");
  for (cd rho : rhos) {
    const int pl = std::max(int(W.cells()), oscillatory_panels(2 * b, std::abs(rho.real()), std::abs(rho.imag())));
    const cd v = integrate([&](double x) { return W(x) * std::exp(cd(0, 1) * rho * (x - b)); }, 0.0, 2 * b, pl, 8);
    rep.sum += std::norm(v);
    rep.partial_ratios.push_back(rep.sum / norm2);
  }
  rep.bound_ratio = rep.sum / norm2;
  return rep;
}

// ---------------------------------------------------------------------------

enum class TestFunction { exp, square, sin, cubic };

inline TestFunction parse_test_function(const std::string& s) {
  if (s == "exp") return TestFunction::exp;
  if (s == "square") return TestFunction::square;
  if (s == "sin") return TestFunction::sin;
  if (s == "cubic") return TestFunction::cubic;
  throw input_error("basis-lab", "unknown test function '" + s + "'");
}

/// Normalized derivative f<d>(z) = f^(d)(z) / d!.
inline cd test_function_jet(TestFunction f, cd z, int d) {
  const double fact = detail::factorial(d);
  switch (f) {
    case TestFunction::exp:
      return std::exp(z) / fact;
    case TestFunction::square:
      return d == 0 ? z * z : d == 1 ? 2.0 * z : d == 2 ? cd(1.0) : cd(0.0);
    case TestFunction::cubic:
      return d == 0 ? z * z * z : d == 1 ? 3.0 * z * z : d == 2 ? 3.0 * z : d == 3 ? cd(1.0) : cd(0.0);
    case TestFunction::sin: {
      const cd v[4] = {std::sin(z), std::cos(z), -std::sin(z), -std::cos(z)};
      return v[d % 4] / fact;
    }
  }
  return 0.0;
}

struct InterpReport {
  std::vector<double> radii;
  std::vector<double> errors;
  double observed_order = 0.0;
  int expected_order = 0;  // m - j
  bool at_node = false;    // j = m: error measured at the node z_m itself
};

/// Error of the Hermite interpolant p of f at nodes z0 + r c_k (|c_k| <= 1): observed
/// exponent of |f<j>(z0) - p<j>(z0)| in r. For j = m the error is measured at the last
/// node, where the interpolation conditions make it vanish.
inline InterpReport interp_error_check(TestFunction f, cd z0, const std::vector<cd>& offsets, int j,
                                       const std::vector<double>& radii = {0.02, 0.05, 0.1, 0.2}) {
  const int m = int(offsets.size());
  if (m < 1) throw input_error("basis-lab", "need at least one node");
  if (j < 0 || j > m) throw input_error("basis-lab", "j must lie in [0, m]");
  if (radii.size() < 3) throw input_error("basis-lab", "degenerate fit: fewer than 3 radii");
  for (cd c : offsets)
    if (std::abs(c) > 1.0) throw input_error("basis-lab", "node offsets must satisfy |c| <= 1");
  InterpReport rep;
  rep.radii = radii;
  rep.expected_order = m - j;
  rep.at_node = (j == m);
  for (double r : radii) {
    if (!(r > 0.0 && r < 0.5)) throw input_error("basis-lab", "radii must lie in (0, 1/2)");
    std::vector<cd> z;
    for (cd c : offsets) z.push_back(z0 + r * c);
    const DividedDifferences dd = divided_differences(z);
    const cd at = rep.at_node ? z.back() : z0;
    const int jj = rep.at_node ? 0 : j;
    const auto rows = interpolation_rows(dd, at);
    cd p = 0.0;
    if (jj < m)
      for (std::size_t s = 0; s < dd.slots.size(); ++s)
        p += rows[std::size_t(jj)][s] * test_function_jet(f, dd.nodes[std::size_t(dd.slots[s].first)], dd.slots[s].second);
    rep.errors.push_back(std::abs(test_function_jet(f, at, jj) - p));
  }
  if (rep.at_node) {
    rep.observed_order = std::numeric_limits<double>::infinity();
    return rep;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double x = std::log(radii[k]), y = std::log(std::max(rep.errors[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.observed_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

// ---------------------------------------------------------------------------

struct NormAsymptotics {
  std::vector<cd> eigenvalues;
  std::vector<double> deviations;  // ||U||^2 |mu|^{1-i} 4 / ((a1^2 + a1^-2) a) - 1
  std::vector<double> predicted;   // +-(a1^-2 - a1^2)/(a1^2 + a1^-2) cos(2 sqrt(mu) (1 - a))
  double bound = 0.0;              // |a1^-2 - a1^2| / (a1^2 + a1^-2)
};

inline NormAsymptotics norm_asymptotics_check(const ProblemSpec& spec, const Subspectrum& sub, int i,
                                              const IntegratorOptions& opt = {}) {
  if (sub.i != i) throw input_error("basis-lab", "subspectrum tag does not match i");
  const KnownData known = KnownData::from(spec);
  const double a1 = spec.a1, a = spec.a;
  const double s = a1 * a1 + 1.0 / (a1 * a1);
  NormAsymptotics out;
  out.bound = std::abs(1.0 / (a1 * a1) - a1 * a1) / s;
  for (const auto& p : sub.points) {
    const cd mu = p.lambda;
    const RowJets j = row_jets(known, i, mu, 0, opt);
    const cd rho = std::sqrt(mu);
    const int pl = oscillatory_panels(a, std::abs(rho.real()), 2 * std::abs(rho.imag()), 8);
    const double n2 = integrate(
        [&](double t) {
          cd C, S;
          detail::cos_sinc(mu * t * t, C, S);
          return std::norm(j.g1[0] * S * t) + std::norm(j.g0[0] * C);
        },
        0.0, a, pl, 16);
    const double scale = (i == 0) ? std::abs(mu) : 1.0;
    out.eigenvalues.push_back(mu);
    out.deviations.push_back(n2 * scale * 4.0 / (s * a) - 1.0);
    const double sign = (i == 1) ? 1.0 : -1.0;
    out.predicted.push_back(sign * (1.0 / (a1 * a1) - a1 * a1) / s * std::cos(2.0 * rho * (1.0 - a)).real());
  }
  return out;
}

// ---------------------------------------------------------------------------

struct DecayReport {
  std::vector<double> rho;
  std::vector<double> scaled0;  // |psi~_0(d2) - psi_0(d2)| rho^2
  std::vector<double> scaled1;  // |psi~_1(d2) - psi_1(d2)| rho
  double sup0 = 0.0;
  double sup1 = 0.0;
};

/// Differences of psi_0, psi_1 at d2 under a mean-preserving change of q2, scaled by the
/// powers of rho that should keep them bounded.
inline DecayReport perturbation_decay_check(const ComplexGrid& q2, const ComplexGrid& q2_tilde, cd H,
                                            const std::vector<double>& rho_samples,
                                            const IntegratorOptions& opt = {}) {
  if (std::abs(q2.length() - q2_tilde.length()) > 1e-14) throw input_error("basis-lab", "grids differ in length");
  const cd m0 = q2.integral(), m1 = q2_tilde.integral();
  if (std::abs(m0 - m1) > 1e-10 * (1.0 + std::abs(m0)))
    throw input_error("basis-lab", "perturbation changes the mean of q2");
  DecayReport rep;
  for (double r : rho_samples) {
    const cd lam = r * r;
    const SolutionJet a0 = psi_jet(q2, H, 0, lam, 0, opt), b0 = psi_jet(q2_tilde, H, 0, lam, 0, opt);
    const SolutionJet a1 = psi_jet(q2, H, 1, lam, 0, opt), b1 = psi_jet(q2_tilde, H, 1, lam, 0, opt);
    rep.rho.push_back(r);
    rep.scaled0.push_back(std::abs(b0.y[0] - a0.y[0]) * r * r);
    rep.scaled1.push_back(std::abs(b1.y[0] - a1.y[0]) * r);
    rep.sup0 = std::max(rep.sup0, rep.scaled0.back());
    rep.sup1 = std::max(rep.sup1, rep.scaled1.back());
  }
  return rep;
}

// ---------------------------------------------------------------------------

/// Condition of the weighted rows as a frame: sqrt(lambda_max / lambda_min) of the Gram
/// matrix w_j w_k <U_j, U_k> by direct quadrature (comparable with the solver's
/// sigma_max / sigma_min when the trial space resolves the rows).
inline double row_frame_condition(const MainSystem& sys) {
  const int R = int(sys.rows());
  if (R == 0) throw input_error("basis-lab", "empty system");
  double fmax = 1.0, gmax = 0.0;
  for (const auto& v : sys.basis) {
    const cd rho = std::sqrt(v.lambda);
    fmax = std::max(fmax, std::abs(rho.real()));
    gmax = std::max(gmax, std::abs(rho.imag()));
  }
  const CompositeRule rule = composite_rule(0.0, sys.a, oscillatory_panels(sys.a, 2 * fmax, 2 * gmax, 8));
  const Eigen::Index Q = Eigen::Index(rule.t.size());
  Eigen::MatrixXcd A(2 * Q, R);
  for (int r = 0; r < R; ++r)
    for (Eigen::Index q = 0; q < Q; ++q) {
      const auto [u1, u2] = sys.basis[std::size_t(r)].eval(rule.t[std::size_t(q)]);
      const double w = std::sqrt(rule.w[std::size_t(q)]) * sys.basis[std::size_t(r)].weight;
      A(q, r) = w * u1;
      A(Q + q, r) = w * u2;
    }
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

}  // namespace slinv
