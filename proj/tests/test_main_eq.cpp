#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace slinv;
using namespace testing_support;

namespace {

struct Generic {
  ProblemSpec spec;
  KnownData known;
  Subspectrum b0, b1;
};

const Generic& generic_half() {
  static const Generic g = [] {
    Generic x;
    x.spec = generic_problem(0.5).spec();
    x.known = KnownData::from(x.spec);
    x.b0 = find_spectrum(x.spec, 0, 30);
    x.b1 = find_spectrum(x.spec, 1, 30);
    return x;
  }();
  return g;
}

Subspectrum empty(int i) {
  Subspectrum s;
  s.i = i;
  return s;
}

double max_abs(const std::vector<cd>& v) {
  double m = 0.0;
  for (cd z : v) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

TEST(MainEq, ZeroDataRowsHaveClosedForm) {
  const KnownData k = KnownData::from(ProblemSpec::zero(0.5));
  const double d2 = 0.5;
  for (cd lam : {cd(9 * pi * pi), cd(30.0, 5.0), cd(-3.0, 0.0)}) {
    Subspectrum s = empty(1);
    s.points.push_back({lam, 1, 1});
    const MainSystem sys = build_basis_and_rhs(k, empty(0), s);
    const cd rho = std::sqrt(lam);
    for (double t : {0.0, 0.1, 0.37, 0.5}) {
      const auto [u1, u2] = sys.basis[0].eval(t);
      EXPECT_NEAR(std::abs(u1 + std::sin(rho * d2) * std::sin(rho * t)), 0.0, 1e-12) << lam << " t=" << t;
      EXPECT_NEAR(std::abs(u2 + std::cos(rho * d2) * std::cos(rho * t)), 0.0, 1e-12) << lam << " t=" << t;
    }
  }
}

TEST(MainEq, RightHandSideIsTheCharacteristicFunctionOfTheBareProblem) {
  // f_i(lambda) is Delta_i for q1 = 0 and h = omega1.
  const Generic& g = generic_half();
  ProblemSpec bare = g.spec;
  bare.q1 = ComplexGrid::constant(0.5, 257, 0.0);
  bare.h = g.known.omega1;
  for (int i : {0, 1})
    for (cd lam : {cd(2.0, 1.0), cd(150.0, -20.0)}) {
      const cd f = row_jets(g.known, i, lam, 0).f[0];
      const cd d = delta(bare, i, lam, 0)[0];
      EXPECT_NEAR(std::abs(f - d), 0.0, 1e-10 * (1 + std::abs(d))) << "i=" << i << " lambda=" << lam;
    }
}

TEST(MainEq, IdentityHoldsOnExactCauchyData) {
  const Generic& g = generic_half();
  const MainSystem sys = build_basis_and_rhs(g.known, g.b0, g.b1);
  ASSERT_EQ(sys.rows(), 60u);
  const auto res = main_equation_residuals(sys, forward_cauchy(g.spec.q1, g.spec.h));
  EXPECT_LT(max_abs(res), 1e-6);
}

TEST(MainEq, IdentityHoldsAtADoubleEigenvalue) {
  const DoubleEigen d = double_eigenvalue_problem();
  const ProblemSpec s = d.problem.spec();
  Subspectrum sub = empty(1);
  sub.points.push_back({d.lambda, 2, 1});
  const MainSystem sys = build_basis_and_rhs(KnownData::from(s), empty(0), sub);
  ASSERT_EQ(sys.rows(), 2u);
  EXPECT_EQ(sys.basis[1].nu, 1);
  const auto res = main_equation_residuals(sys, forward_cauchy(s.q1, s.h));
  EXPECT_LT(max_abs(res), 1e-6);
}

TEST(MainEq, RowsAreSortedByTagThenModulus) {
  const Generic& g = generic_half();
  const MainSystem sys = build_basis_and_rhs(g.known, g.b0, g.b1);
  for (std::size_t r = 1; r < sys.rows(); ++r) {
    const auto &p = sys.basis[r - 1], &q = sys.basis[r];
    EXPECT_TRUE(p.i < q.i || (p.i == q.i && std::abs(p.lambda) <= std::abs(q.lambda)));
  }
}

TEST(Hermite, CoincidentNodesReproduceTheJetRows) {
  const DoubleEigen d = double_eigenvalue_problem();
  const ProblemSpec s = d.problem.spec();
  const KnownData k = KnownData::from(s);
  Subspectrum ref = find_spectrum(s, 1, 6);
  const MainSystem exact = build_basis_and_rhs(k, empty(0), ref);
  const MainSystem reg = hermite_regularize(k, ref, ref.flattened());
  ASSERT_EQ(exact.rows(), reg.rows());
  for (std::size_t r = 0; r < exact.rows(); ++r) {
    EXPECT_NEAR(std::abs(exact.rhs[r] - reg.rhs[r]), 0.0, 1e-12 * (1 + std::abs(exact.rhs[r])));
    for (double t : {0.05, 0.3, 0.5}) {
      const auto [x1, x2] = exact.basis[r].eval(t);
      const auto [y1, y2] = reg.basis[r].eval(t);
      EXPECT_NEAR(std::abs(x1 - y1) + std::abs(x2 - y2), 0.0, 1e-12 * (1 + std::abs(x1) + std::abs(x2)));
    }
  }
}

TEST(Hermite, SplitClusterRowsMoveLinearlyInTheSplit) {
  const DoubleEigen d = double_eigenvalue_problem();
  const ProblemSpec s = d.problem.spec();
  const KnownData k = KnownData::from(s);
  Subspectrum ref = empty(1);
  ref.points.push_back({d.lambda, 2, 1});
  const MainSystem exact = build_basis_and_rhs(k, empty(0), ref);
  std::vector<double> diffs;
  for (double r : {1e-4, 1e-3, 1e-2}) {
    const MainSystem reg = hermite_regularize(k, ref, {d.lambda - r, d.lambda + r * cd(0.3, 0.8)});
    double diff = 0.0;
    for (std::size_t row = 0; row < 2; ++row) {
      diff = std::max(diff, std::abs(reg.rhs[row] - exact.rhs[row]));
      for (double t : {0.1, 0.25, 0.4}) {
        const auto [x1, x2] = exact.basis[row].eval(t);
        const auto [y1, y2] = reg.basis[row].eval(t);
        diff = std::max(diff, std::abs(x1 - y1) + std::abs(x2 - y2));
      }
    }
    diffs.push_back(diff);
  }
  EXPECT_NEAR(std::log10(diffs[1] / diffs[0]), 1.0, 0.1);
  EXPECT_NEAR(std::log10(diffs[2] / diffs[1]), 1.0, 0.1);
  EXPECT_LT(diffs[2], 0.1);
}

TEST(Hermite, InterpolantOfSquareHasTheExpectedErrors) {
  const cd z0(1.0, 0.5), z1 = z0 + cd(0.01, -0.02);
  // m = 1: one node z1, value at z0
  {
    const auto dd = divided_differences({z1});
    const auto c = interpolation_rows(dd, z0);
    EXPECT_NEAR(std::abs(c[0][0] * z1 * z1 - z0 * z0), std::abs(z0 * z0 - z1 * z1), 1e-15);
  }
  // m = 2: nodes z0, z1 reproduce F at z0 and give F' error |z1 - z0|
  {
    const auto dd = divided_differences({z0, z1});
    const auto c = interpolation_rows(dd, z0);
    std::vector<cd> F(dd.slots.size());
    for (std::size_t s = 0; s < F.size(); ++s) F[s] = dd.nodes[std::size_t(dd.slots[s].first)] * dd.nodes[std::size_t(dd.slots[s].first)];
    cd p0 = 0.0, p1 = 0.0;
    for (std::size_t s = 0; s < F.size(); ++s) {
      p0 += c[0][s] * F[s];
      p1 += c[1][s] * F[s];
    }
    EXPECT_NEAR(std::abs(p0 - z0 * z0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(p1 - 2.0 * z0), std::abs(z1 - z0), 1e-13);
  }
}

TEST(Hermite, RepeatedNodesSelectDerivativeSlots) {
  const cd z(0.3, 0.2);
  const auto dd = divided_differences({z, z, z});
  ASSERT_EQ(dd.nodes.size(), 1u);
  ASSERT_EQ(dd.slots.size(), 3u);
  for (int k = 0; k < 3; ++k)
    for (int s = 0; s < 3; ++s) EXPECT_EQ(dd.weights[std::size_t(k)][std::size_t(s)], cd(k == s ? 1.0 : 0.0));
}

TEST(Hermite, RejectsUnmatchedAndMiscountedValues) {
  const Generic& g = generic_half();
  Subspectrum ref = empty(1);
  ref.points = {g.b1.points.begin(), g.b1.points.begin() + 4};
  auto vals = ref.flattened();
  vals[2] += 1e3;
  try {
    hermite_regularize(g.known, ref, vals);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input);
    EXPECT_NE(std::string(e.what()).find("unmatched"), std::string::npos);
  }
  vals = ref.flattened();
  vals[2] = vals[1];
  EXPECT_THROW(hermite_regularize(g.known, ref, vals), Error);
}

TEST(Solve, ZeroRightHandSideGivesZeroKernel) {
  const Generic& g = generic_half();
  MainSystem sys = build_basis_and_rhs(g.known, g.b0, g.b1);
  std::fill(sys.rhs.begin(), sys.rhs.end(), cd(0.0));
  const SolveReport r = solve_K(assemble(sys));
  EXPECT_EQ(r.coefficients.norm(), 0.0);
}

TEST(Solve, RecoversSyntheticCoefficientsAndBoundsNoise) {
  const Generic& g = generic_half();
  MainSystem sys = build_basis_and_rhs(g.known, g.b0, g.b1);
  sys.modes = 8;  // 18 columns for 60 rows
  AssembledSystem as = assemble(sys);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N;
  Eigen::VectorXcd x(as.gram.cols());
  for (Eigen::Index c = 0; c < x.size(); ++c) x(c) = cd(N(rng), N(rng));
  as.rhs = as.gram * x;
  const SolveReport clean = solve_K(as);
  EXPECT_EQ(clean.truncated, 0);
  EXPECT_LT((clean.coefficients - x).norm(), 1e-10 * x.norm());

  Eigen::VectorXcd noise(as.rhs.size());
  for (Eigen::Index r = 0; r < noise.size(); ++r) noise(r) = cd(N(rng), N(rng));
  noise *= 1e-6 / noise.norm();
  AssembledSystem n1 = as, n2 = as;
  n1.rhs += noise;
  n2.rhs += 2.0 * noise;
  const double e1 = (solve_K(n1).coefficients - x).norm(), e2 = (solve_K(n2).coefficients - x).norm();
  EXPECT_LE(e1, noise.norm() / clean.sigma_min_effective * (1 + 1e-6));
  EXPECT_NEAR(e2 / e1, 2.0, 1e-4);
}

TEST(Solve, OrthonormalRowsHaveUnitCondition) {
  // Rows equal to the trial sines, the constant and the cosines.
  const double a = 0.5;
  const int M = 6;
  MainSystem sys;
  sys.a = a;
  sys.modes = M;
  const double s2 = std::sqrt(2.0 / a);
  auto row = [&](cd lam, cd c1, cd c2) {
    BasisVector v;
    v.lambda = lam;
    v.atoms.push_back({lam, 0, c1, c2});
    sys.basis.push_back(v);
    sys.rhs.push_back(0.0);
  };
  for (int k = 1; k <= M; ++k) {
    const double rho = k * pi / a;
    row(rho * rho, s2 * rho, 0.0);
    row(rho * rho, 0.0, s2);
  }
  row(0.0, 0.0, 1.0 / std::sqrt(a));
  const SolveReport r = solve_K(assemble(sys));
  EXPECT_EQ(r.effective_rank, 2 * M + 1);
  EXPECT_NEAR(r.condition, 1.0, 1e-9);
  EXPECT_NEAR(r.sigma_max, 1.0, 1e-9);
}

TEST(Invert, ZeroModelIsRecoveredExactly) {
  const ProblemSpec s = ProblemSpec::zero(0.5);
  const ReconstructionResult r =
      invert(KnownData::from(s), find_spectrum(s, 0, 20), find_spectrum(s, 1, 20));
  EXPECT_LT(r.q1.l2_norm(), 1e-6);
  EXPECT_LT(std::abs(r.h), 1e-6);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Invert, RoundTripAtSymmetricInterface) {
  const Generic& g = generic_half();
  const ReconstructionResult r = invert(g.known, g.b0, g.b1);
  EXPECT_LT(l2_distance(r.q1, g.spec.q1), 1e-3 * std::max(1.0, g.spec.q1.l2_norm()));
  EXPECT_LT(std::abs(r.h - g.spec.h), 1e-5);
  EXPECT_LT(r.gram_condition, 10.0);
  // mean constraint h + (1/2) int q1 = omega1
  EXPECT_NEAR(std::abs(r.h + 0.5 * r.q1.integral() - g.known.omega1), 0.0, 1e-10);
}

TEST(Invert, RoundTripWithSparseDirichletData) {
  const ProblemSpec s = generic_problem(0.6).spec();
  const Subspectrum b1 = find_spectrum(s, 1, 40), all0 = find_spectrum(s, 0, 40);
  Subspectrum b0 = empty(0);
  for (std::size_t k = 0; k < all0.points.size(); k += 5) b0.points.push_back(all0.points[k]);
  EXPECT_GE(counting_density(b0) + counting_density(b1), 2 * 0.6);
  const ReconstructionResult r = invert(KnownData::from(s), b0, b1);
  EXPECT_LT(l2_distance(r.q1, s.q1), 1e-3 * std::max(1.0, s.q1.l2_norm()));
  EXPECT_LT(std::abs(r.h - s.h), 1e-4);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Invert, LowDensityIsReported) {
  const ProblemSpec s = generic_problem(0.6).spec();
  const ReconstructionResult r = invert(KnownData::from(s), empty(0), find_spectrum(s, 1, 20));
  bool found = false;
  for (const auto& w : r.warnings) found = found || w.find("counting density") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Invert, RejectsMalformedRequests) {
  const Generic& g = generic_half();
  EXPECT_THROW(invert(g.known, empty(0), empty(1)), Error);
  EXPECT_THROW(invert(g.known, g.b1, g.b0), Error);
  KnownData noH = g.known;
  noH.H.reset();
  try {
    invert(noH, g.b0, g.b1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input);
    EXPECT_EQ(e.stage().rfind("main-eq", 0), 0u);
  }
  EXPECT_NO_THROW(invert(noH, g.b0, empty(1)));
}
