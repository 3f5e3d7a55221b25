#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "slinv/cauchy.hpp"
#include "slinv/spectra.hpp"

namespace slinv {

/// One term of a main-equation row: c1 * s<r>(t, lambda) in the first component and
/// c2 * c<r>(t, lambda) in the second, with s = sin(rho t)/rho and c = cos(rho t).
struct Atom {
  cd lambda;
  int r = 0;
  cd c1 = 0.0;
  cd c2 = 0.0;
};

/// A row functional U_n^i of the main equations, kept as an exact sum of atoms.
struct BasisVector {
  int n = 0;
  int i = 1;
  cd lambda;   // reference eigenvalue of the row
  int nu = 0;  // derivative order within its cluster
  double weight = 1.0;
  std::vector<Atom> atoms;

  /// Both components at t (unweighted).
  std::pair<cd, cd> eval(double t) const {
    cd u1 = 0.0, u2 = 0.0;
    std::size_t k = 0;
    while (k < atoms.size()) {
      // Atoms sharing a node are evaluated from one trig jet.
      std::size_t e = k;
      int rmax = 0;
      while (e < atoms.size() && atoms[e].lambda == atoms[k].lambda) rmax = std::max(rmax, atoms[e++].r);
      Jet cj, sj;
      trig_jets(atoms[k].lambda, t, rmax, cj, sj);
      for (; k < e; ++k) {
        u1 += atoms[k].c1 * sj[atoms[k].r];
        u2 += atoms[k].c2 * cj[atoms[k].r];
      }
    }
    return {u1, u2};
  }

  std::pair<ComplexGrid, ComplexGrid> components(double a, std::size_t samples) const {
    std::vector<cd> v1(samples), v2(samples);
    for (std::size_t j = 0; j < samples; ++j) {
      const auto [x, y] = eval(a * double(j) / double(samples - 1));
      v1[j] = x;
      v2[j] = y;
    }
    return {ComplexGrid(a, std::move(v1)), ComplexGrid(a, std::move(v2))};
  }
};

struct ClusterMatch {
  int i = 1;
  cd reference;
  std::vector<cd> matched;
};

struct MainSystem {
  double a = 0.5;
  std::vector<BasisVector> basis;
  std::vector<cd> rhs;
  int modes = 0;  // trial modes M per component; 0 picks automatically
  std::vector<ClusterMatch> clusters;

  std::size_t rows() const { return basis.size(); }

  /// Automatic M: 2M ~ rows, capped so the top trial frequency M pi / a stays within the
  /// largest Re sqrt(lambda) among the rows. Modes beyond it are seen only weakly and
  /// drive the Gram condition up without adding resolution.
  int trial_modes() const {
    if (modes > 0) return modes;
    double top = 0.0;
    for (const auto& v : basis) top = std::max(top, std::sqrt(v.lambda).real());
    const int by_rows = (int(basis.size()) + 1) / 2;
    const int by_freq = int(std::floor(a * top / std::numbers::pi));
    return std::max(1, std::min(by_rows, by_freq));
  }
};

// ---------------------------------------------------------------------------
// Row construction

struct RowJets {
  Jet g0, g1, f;
};

/// Jets of g_{i,0}, g_{i,1} and f_i at lambda.
inline RowJets row_jets(const KnownData& k, int i, cd lambda, int order, const IntegratorOptions& opt = {}) {
  const GJet g = g_jet(k, i, lambda, order, opt);
  Jet C, S;
  cos_sinc_jets(lambda * k.a * k.a, order, C, S);
  const Jet ca = C.rescaled(k.a * k.a);
  const Jet sr = S.rescaled(k.a * k.a) * cd(k.a);  // sin(rho a)/rho
  const Jet lam = Jet::variable(order, lambda);
  const Jet f = (ca + sr * k.omega1) * g.g1 - g.g0 * (ca * k.omega1 - lam * sr);
  return {g.g0, g.g1, f};
}

inline double row_weight(int i, cd reference) { return i == 0 ? std::sqrt(std::abs(reference) + 1.0) : 1.0; }

/// Atoms of U_i<nu>(t, lambda) = sum_r (g_{i,1}<nu-r> s<r>, g_{i,0}<nu-r> c<r>), scaled by coef.
inline void append_atoms(std::vector<Atom>& out, const RowJets& j, cd lambda, int nu, cd coef) {
  for (int r = 0; r <= nu; ++r) out.push_back({lambda, r, coef * j.g1[nu - r], coef * j.g0[nu - r]});
}

namespace detail {

inline void check_row(const RowJets& j, cd lambda, int i) {
  const double s = std::abs(j.g0[0]) + std::abs(j.g1[0]);
  if (!(s > 1e-14 * (1.0 + std::abs(lambda))) || !finite(j.g0[0]) || !finite(j.g1[0]))
    throw numerical_error("main-eq", "degenerate row: g_" + std::to_string(i) + ",0 and g_" + std::to_string(i) +
                                         ",1 both vanish at lambda = " + std::to_string(lambda.real()) + "+" +
                                         std::to_string(lambda.imag()) + "i");
}

inline void sort_rows(MainSystem& sys) {
  std::vector<std::size_t> idx(sys.basis.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    const auto& u = sys.basis[x];
    const auto& v = sys.basis[y];
    if (u.i != v.i) return u.i < v.i;
    if (u.lambda != v.lambda) return spectral_less(u.lambda, v.lambda);
    return u.nu < v.nu;
  });
  std::vector<BasisVector> b;
  std::vector<cd> r;
  for (std::size_t k : idx) {
    b.push_back(std::move(sys.basis[k]));
    r.push_back(sys.rhs[k]);
  }
  int counter[2] = {0, 0};
  for (auto& v : b) v.n = counter[v.i]++;
  sys.basis = std::move(b);
  sys.rhs = std::move(r);
}

}  // namespace detail

/// Rows U_{n+nu}^i = U_i<nu>(t, mu_{i,n}) and tau_{n+nu}^i = f_i<nu>(mu_{i,n}) for every
/// distinct eigenvalue and nu below its multiplicity; ordered by i, then |mu|.
inline MainSystem build_basis_and_rhs(const KnownData& known, const Subspectrum& sub0, const Subspectrum& sub1,
                                      const IntegratorOptions& opt = {}) {
  MainSystem sys;
  sys.a = known.a;
  for (const Subspectrum* sub : {&sub0, &sub1}) {
    for (const auto& p : sub->points) {
      if (p.multiplicity < 1 || p.multiplicity > kMaxJetOrder + 1)
        throw input_error("main-eq", "multiplicity " + std::to_string(p.multiplicity) + " not supported");
      const int i = sub->i;
      const RowJets j = row_jets(known, i, p.lambda, p.multiplicity - 1, opt);
      detail::check_row(j, p.lambda, i);
      for (int nu = 0; nu < p.multiplicity; ++nu) {
        BasisVector v;
        v.i = i;
        v.lambda = p.lambda;
        v.nu = nu;
        v.weight = row_weight(i, p.lambda);
        append_atoms(v.atoms, j, p.lambda, nu, 1.0);
        sys.basis.push_back(std::move(v));
        sys.rhs.push_back(j.f[nu]);
      }
    }
  }
  detail::sort_rows(sys);
  return sys;
}

/// <K, U_n> - tau_n for every row, with K given as Cauchy data (quadrature on the
/// cubic interpolants of K1, K2).
inline std::vector<cd> main_equation_residuals(const MainSystem& sys, const CauchyData& c) {
  c.validate();
  if (std::abs(c.a() - sys.a) > 1e-12) throw input_error("main-eq", "Cauchy data interval does not match a");
  std::vector<cd> out;
  out.reserve(sys.rows());
  for (std::size_t r = 0; r < sys.rows(); ++r) {
    const BasisVector& v = sys.basis[r];
    const cd rho = std::sqrt(v.lambda);
    const int pl = std::max(int(c.K1.cells()), oscillatory_panels(sys.a, std::abs(rho.real()), std::abs(rho.imag())));
    const cd val = integrate(
        [&](double t) {
          const auto [u1, u2] = v.eval(t);
          return c.K1.cubic(t) * u1 + c.K2.cubic(t) * u2;
        },
        0.0, sys.a, pl, 8);
    out.push_back(val - sys.rhs[r]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hermite regularization

/// Weights W[k][slot] of the divided differences F[z_0..z_k] in terms of slot values
/// F<d>(node), for nodes grouped so that equal values are contiguous.
struct DividedDifferences {
  std::vector<cd> nodes;                     // distinct nodes
  std::vector<std::pair<int, int>> slots;    // (node index, derivative order)
  std::vector<std::vector<cd>> weights;      // [k][slot]
  std::vector<cd> sequence;                  // z_0..z_{m-1} in grouped order
};

inline DividedDifferences divided_differences(std::vector<cd> z) {
  DividedDifferences dd;
  const int m = int(z.size());
  // Group equal values; the order inside the Newton form is otherwise arbitrary.
  std::vector<cd> seq;
  std::vector<int> node_of;
  for (cd v : z) {
    auto it = std::find(dd.nodes.begin(), dd.nodes.end(), v);
    if (it == dd.nodes.end()) dd.nodes.push_back(v);
  }
  std::map<int, int> slot_index;
  for (int p = 0; p < int(dd.nodes.size()); ++p) {
    int cnt = 0;
    for (cd v : z)
      if (v == dd.nodes[std::size_t(p)]) {
        slot_index[p * 64 + cnt] = int(dd.slots.size());
        dd.slots.push_back({p, cnt});
        seq.push_back(v);
        node_of.push_back(p);
        ++cnt;
      }
  }
  const std::size_t S = dd.slots.size();
  // table[i][j] = F[z_i..z_j] over slots
  const auto mm = static_cast<std::size_t>(m);
  std::vector<std::vector<std::vector<cd>>> table(mm, std::vector<std::vector<cd>>(mm));
  for (int i = m - 1; i >= 0; --i) {
    for (int j = i; j < m; ++j) {
      std::vector<cd> w(S, 0.0);
      if (node_of[std::size_t(i)] == node_of[std::size_t(j)]) {
        w[std::size_t(slot_index[node_of[std::size_t(i)] * 64 + (j - i)])] = 1.0;
      } else {
        const cd den = seq[std::size_t(j)] - seq[std::size_t(i)];
        const auto& a = table[std::size_t(i + 1)][std::size_t(j)];
        const auto& b = table[std::size_t(i)][std::size_t(j - 1)];
        for (std::size_t s = 0; s < S; ++s) w[s] = (a[s] - b[s]) / den;
      }
      table[std::size_t(i)][std::size_t(j)] = std::move(w);
    }
  }
  for (int k = 0; k < m; ++k) dd.weights.push_back(table[0][std::size_t(k)]);
  dd.sequence = seq;
  return dd;
}

/// Coefficients c[nu][slot] with p<nu>(mu) = sum_slot c[nu][slot] F<d>(node) for the
/// interpolating polynomial p of F at the nodes, expanded at mu.
inline std::vector<std::vector<cd>> interpolation_rows(const DividedDifferences& dd, cd mu) {
  const int m = int(dd.sequence.size());
  const int order = m - 1;
  std::vector<std::vector<cd>> c(static_cast<std::size_t>(m), std::vector<cd>(dd.slots.size(), 0.0));
  Jet pi(order, 1.0);
  for (int k = 0; k < m; ++k) {
    for (int nu = 0; nu < m; ++nu)
      for (std::size_t s = 0; s < dd.slots.size(); ++s) c[std::size_t(nu)][s] += pi[nu] * dd.weights[std::size_t(k)][s];
    pi = pi * (Jet::variable(order, mu) - dd.sequence[std::size_t(k)]);
  }
  return c;
}

/// Rows built from perturbed eigenvalues: each perturbed value is matched to the nearest
/// reference eigenvalue (radius: half the smallest gap between distinct reference values),
/// and a cluster of multiplicity m is replaced by the jet at the reference point of the
/// polynomial interpolating U_i and f_i at its perturbed nodes.
inline MainSystem hermite_regularize(const KnownData& known, const Subspectrum& reference,
                                     const std::vector<cd>& perturbed, const IntegratorOptions& opt = {}) {
  const int i = reference.i;
  const auto& ref = reference.points;
  double radius = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < ref.size(); ++x)
    for (std::size_t y = x + 1; y < ref.size(); ++y)
      radius = std::min(radius, 0.5 * std::abs(ref[x].lambda - ref[y].lambda));

  std::vector<std::vector<cd>> groups(ref.size());
  for (cd z : perturbed) {
    if (!finite(z)) throw input_error("main-eq", "non-finite perturbed eigenvalue");
    std::size_t best = ref.size();
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const double d = std::abs(z - ref[k].lambda);
      if (d < bd) {
        bd = d;
        best = k;
      }
    }
    if (best == ref.size() || !(bd < radius))
      throw input_error("main-eq", "unmatched perturbed eigenvalue " + std::to_string(z.real()) + "+" +
                                       std::to_string(z.imag()) + "i (outside every cluster radius)");
    groups[best].push_back(z);
  }

  MainSystem sys;
  sys.a = known.a;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const int m = ref[k].multiplicity;
    if (int(groups[k].size()) != m)
      throw input_error("main-eq", "cluster at " + std::to_string(ref[k].lambda.real()) + "+" +
                                       std::to_string(ref[k].lambda.imag()) + "i has multiplicity " +
                                       std::to_string(m) + " but matched " + std::to_string(groups[k].size()) +
                                       " perturbed values");
    sys.clusters.push_back({i, ref[k].lambda, groups[k]});
    const cd mu = ref[k].lambda;
    const DividedDifferences dd = divided_differences(groups[k]);
    const auto coef = interpolation_rows(dd, mu);
    std::vector<RowJets> jets;
    for (std::size_t p = 0; p < dd.nodes.size(); ++p) {
      int dmax = 0;
      for (const auto& s : dd.slots)
        if (s.first == int(p)) dmax = std::max(dmax, s.second);
      jets.push_back(row_jets(known, i, dd.nodes[p], dmax, opt));
      detail::check_row(jets.back(), dd.nodes[p], i);
    }
    for (int nu = 0; nu < m; ++nu) {
      BasisVector v;
      v.i = i;
      v.lambda = mu;
      v.nu = nu;
      v.weight = row_weight(i, mu);
      cd tau = 0.0;
      for (std::size_t s = 0; s < dd.slots.size(); ++s) {
        const cd c = coef[std::size_t(nu)][s];
        if (c == 0.0) continue;
        const auto [p, d] = dd.slots[s];
        append_atoms(v.atoms, jets[std::size_t(p)], dd.nodes[std::size_t(p)], d, c);
        tau += c * jets[std::size_t(p)].f[d];
      }
      // Keep atoms of one node adjacent so BasisVector::eval shares trig jets.
      std::stable_sort(v.atoms.begin(), v.atoms.end(), [](const Atom& x, const Atom& y) {
        return spectral_less(x.lambda, y.lambda);
      });
      sys.basis.push_back(std::move(v));
      sys.rhs.push_back(tau);
    }
  }
  detail::sort_rows(sys);
  return sys;
}

/// Concatenates two systems (e.g. the i = 0 and i = 1 parts).
inline MainSystem merge(MainSystem x, const MainSystem& y) {
  if (!x.basis.empty() && !y.basis.empty() && std::abs(x.a - y.a) > 1e-14)
    throw input_error("main-eq", "systems on different intervals");
  if (x.basis.empty()) x.a = y.a;
  x.basis.insert(x.basis.end(), y.basis.begin(), y.basis.end());
  x.rhs.insert(x.rhs.end(), y.rhs.begin(), y.rhs.end());
  x.clusters.insert(x.clusters.end(), y.clusters.begin(), y.clusters.end());
  detail::sort_rows(x);
  return x;
}

// ---------------------------------------------------------------------------
// Trial space, assembly and solve

/// Orthonormal trial functions on (0, a): for K1 the normalized line t and M sines,
/// for K2 the constant and M cosines. Column order: [line, sin 1..M, const, cos 1..M].
struct TrialSpace {
  double a = 0.5;
  int M = 1;

  int columns() const { return 2 * M + 2; }

  /// (first component, second component) of column c at t.
  std::pair<double, double> mode(int c, double t) const {
    const double s2 = std::sqrt(2.0 / a);
    if (c == 0) {
      // t minus its projection on the M sines, normalized.
      double v = t, n2 = a * a * a / 3.0;
      for (int k = 1; k <= M; ++k) {
        const double b = s2 * ((k % 2) ? 1.0 : -1.0) * a * a / (k * std::numbers::pi);
        v -= b * s2 * std::sin(k * std::numbers::pi * t / a);
        n2 -= b * b;
      }
      return {v / std::sqrt(n2), 0.0};
    }
    if (c <= M) return {s2 * std::sin(c * std::numbers::pi * t / a), 0.0};
    if (c == M + 1) return {0.0, 1.0 / std::sqrt(a)};
    const int k = c - M - 1;
    return {0.0, s2 * std::cos(k * std::numbers::pi * t / a)};
  }

  /// K1 and K2 on grid_n cells from coefficients.
  std::pair<ComplexGrid, ComplexGrid> synthesize(const Eigen::VectorXcd& x, int grid_n) const {
    std::vector<cd> k1(std::size_t(grid_n) + 1, 0.0), k2(std::size_t(grid_n) + 1, 0.0);
    for (int j = 0; j <= grid_n; ++j) {
      const double t = a * j / grid_n;
      for (int c = 0; c < columns(); ++c) {
        const auto [m1, m2] = mode(c, t);
        k1[std::size_t(j)] += x(c) * m1;
        k2[std::size_t(j)] += x(c) * m2;
      }
    }
    return {ComplexGrid(a, std::move(k1)), ComplexGrid(a, std::move(k2))};
  }
};

struct AssembledSystem {
  Eigen::MatrixXcd gram;  // weighted <trial column, row functional>
  Eigen::VectorXcd rhs;   // weighted tau
  TrialSpace trial;
};

/// Weighted functionals of every row against every trial mode by composite 16-point
/// Gauss-Legendre quadrature.
inline AssembledSystem assemble(const MainSystem& sys) {
  if (sys.basis.size() != sys.rhs.size()) throw input_error("main-eq", "basis and rhs differ in length");
  AssembledSystem out;
  out.trial = TrialSpace{sys.a, sys.trial_modes()};
  const int R = int(sys.basis.size()), C = out.trial.columns();
  double fmax = out.trial.M * std::numbers::pi / sys.a, gmax = 0.0;
  for (const auto& v : sys.basis) {
    const cd rho = std::sqrt(v.lambda);
    fmax = std::max(fmax, std::abs(rho.real()));
    gmax = std::max(gmax, std::abs(rho.imag()));
  }
  const CompositeRule rule = composite_rule(0.0, sys.a, oscillatory_panels(sys.a, fmax, gmax, 8));
  const Eigen::Index Q = Eigen::Index(rule.t.size());
  Eigen::MatrixXcd U1(R, Q), U2(R, Q);
  for (int r = 0; r < R; ++r) {
    const auto& v = sys.basis[std::size_t(r)];
    for (Eigen::Index q = 0; q < Q; ++q) {
      const auto [u1, u2] = v.eval(rule.t[std::size_t(q)]);
      if (!finite(u1) || !finite(u2))
        throw numerical_error("main-eq", "non-finite basis sample in row " + std::to_string(r));
      U1(r, q) = v.weight * rule.w[std::size_t(q)] * u1;
      U2(r, q) = v.weight * rule.w[std::size_t(q)] * u2;
    }
  }
  Eigen::MatrixXd M1(Q, C), M2(Q, C);
  for (Eigen::Index q = 0; q < Q; ++q)
    for (int c = 0; c < C; ++c) {
      const auto [m1, m2] = out.trial.mode(c, rule.t[std::size_t(q)]);
      M1(q, c) = m1;
      M2(q, c) = m2;
    }
  out.gram = U1 * M1.cast<cd>() + U2 * M2.cast<cd>();
  out.rhs.resize(R);
  for (int r = 0; r < R; ++r) out.rhs(r) = sys.basis[std::size_t(r)].weight * sys.rhs[std::size_t(r)];
  return out;
}

struct SolveReport {
  Eigen::VectorXcd coefficients;
  ComplexGrid K1, K2;
  int effective_rank = 0;
  int truncated = 0;
  double sigma_max = 0.0;
  double sigma_min_effective = 0.0;
  double condition = 1.0;
  double residual_norm = 0.0;
  std::vector<std::string> warnings;
};

/// Minimum-norm least squares with singular values below reg * sigma_max dropped.
inline SolveReport solve_K(const AssembledSystem& sys, double reg = 1e-10, int grid_n = 256) {
  if (!(reg >= 0.0)) throw input_error("main-eq", "reg must be non-negative");
  const Eigen::BDCSVD<Eigen::MatrixXcd> svd(sys.gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  SolveReport rep;
  rep.sigma_max = s.size() ? s(0) : 0.0;
  const double cut = reg * rep.sigma_max;
  Eigen::VectorXcd uh = svd.matrixU().adjoint() * sys.rhs;
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > cut && s(k) > 0.0) {
      y(k) = uh(k) / s(k);
      rep.effective_rank++;
      rep.sigma_min_effective = s(k);
    } else {
      rep.truncated++;
    }
  }
  if (rep.effective_rank == 0) {
    rep.coefficients = Eigen::VectorXcd::Zero(sys.gram.cols());
    rep.condition = std::numeric_limits<double>::infinity();
  } else {
    rep.coefficients = svd.matrixV() * y;
    rep.condition = std::max(1.0, rep.sigma_max / rep.sigma_min_effective);
  }
  if (s.size() > 0 && rep.truncated > 0.2 * double(s.size()))
    rep.warnings.push_back("truncation removed " + std::to_string(rep.truncated) + " of " +
                           std::to_string(s.size()) + " singular values");
  rep.residual_norm = (sys.gram * rep.coefficients - sys.rhs).norm();
  auto [k1, k2] = sys.trial.synthesize(rep.coefficients, grid_n);
  rep.K1 = std::move(k1);
  rep.K2 = std::move(k2);
  return rep;
}

// ---------------------------------------------------------------------------
// End-to-end

struct InvertOptions {
  double reg = 1e-10;
  int modes = 0;       // trial modes per component; 0 = automatic
  int grid_n = 256;    // cells of the output grids
  IntegratorOptions integrator{};
  // Reference subspectra for Hermite matching of perturbed data (empty = none).
  const Subspectrum* reference0 = nullptr;
  const Subspectrum* reference1 = nullptr;
};

struct ReconstructionResult {
  ComplexGrid q1;
  cd h;
  double residual_norm = 0.0;
  double gram_condition = 1.0;
  int effective_rank = 0;
  int rows = 0;
  int trial_modes = 0;
  CauchyData cauchy;
  std::vector<ClusterMatch> cluster_report;
  std::vector<std::string> warnings;
};

/// Rows per unit of Re(sqrt mu)/pi, counting multiplicity. A complete B1 spectrum has
/// density close to 1; recovery on (0, a) needs a combined density of at least 2a.
inline double counting_density(const Subspectrum& sub) {
  if (sub.points.empty()) return 0.0;
  double top = 0.0;
  for (const auto& p : sub.points) top = std::max(top, std::sqrt(p.lambda).real());
  const double span = std::max(top / std::numbers::pi, 1.0);
  return double(sub.total()) / span;
}

/// Builds (optionally Hermite-regularized) main equations, solves for the Cauchy data
/// and marches them down to (q1, h).
inline ReconstructionResult invert(const KnownData& known, const Subspectrum& sub0, const Subspectrum& sub1,
                                   const InvertOptions& opt = {}) {
  if (sub0.points.empty() && sub1.points.empty()) throw input_error("main-eq", "both subspectra are empty");
  if (sub0.i != 0 || sub1.i != 1) throw input_error("main-eq", "subspectra must be tagged i = 0 and i = 1");
  if (!sub1.points.empty() && !known.H) throw input_error("main-eq", "B1 rows need a finite H");
  MainSystem sys;
  try {
    auto part = [&](const Subspectrum& sub, const Subspectrum* ref) {
      if (sub.points.empty()) return MainSystem{known.a, {}, {}, 0, {}};
      if (ref) return hermite_regularize(known, *ref, sub.flattened(), opt.integrator);
      Subspectrum empty;
      empty.i = 1 - sub.i;
      return sub.i == 0 ? build_basis_and_rhs(known, sub, empty, opt.integrator)
                        : build_basis_and_rhs(known, empty, sub, opt.integrator);
    };
    sys = merge(part(sub0, opt.reference0), part(sub1, opt.reference1));
    sys.a = known.a;
  } catch (const Error& e) {
    throw restage(e, "invert/build");
  }
  sys.modes = opt.modes;

  ReconstructionResult res;
  SolveReport rep;
  try {
    const AssembledSystem as = assemble(sys);
    rep = solve_K(as, opt.reg, opt.grid_n);
    res.trial_modes = as.trial.M;
  } catch (const Error& e) {
    throw restage(e, "invert/solve");
  }
  res.cauchy = CauchyData{rep.K1, rep.K2, known.omega1};
  try {
    PotentialReconstruction pr = cauchy_to_potential(res.cauchy, opt.grid_n);
    res.q1 = std::move(pr.q1);
    res.h = pr.h;
  } catch (const Error& e) {
    throw restage(e, "invert/cauchy");
  }
  res.residual_norm = rep.residual_norm;
  res.gram_condition = rep.condition;
  res.effective_rank = rep.effective_rank;
  res.rows = int(sys.rows());
  res.cluster_report = sys.clusters;
  res.warnings = rep.warnings;
  const double density = counting_density(sub0) + counting_density(sub1);
  if (density < 0.9 * 2.0 * known.a) {
    std::ostringstream w;
    w << "counting density " << density << " is below 2a = " << 2.0 * known.a
      << "; the rows do not determine K and the solution is a minimum-norm guess";
    res.warnings.push_back(w.str());
  }
  return res;
}

}  // namespace slinv
