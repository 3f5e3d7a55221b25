#include <gtest/gtest.h>

#include "support.hpp"

using namespace slinv;
using namespace testing_support;

TEST(Spectra, ZeroPotentialWithSymmetricInterface) {
  const ProblemSpec s = ProblemSpec::zero(0.5);
  const auto b1 = find_spectrum(s, 1, 20).flattened();
  const auto b0 = find_spectrum(s, 0, 20).flattened();
  ASSERT_EQ(b1.size(), 20u);
  ASSERT_EQ(b0.size(), 20u);
  for (int n = 0; n < 20; ++n) {
    const double e1 = n * n * pi * pi, e0 = (n + 0.5) * (n + 0.5) * pi * pi;
    EXPECT_NEAR(std::abs(b1[std::size_t(n)] - e1), 0.0, 1e-8 * (1 + e1)) << n;
    EXPECT_NEAR(std::abs(b0[std::size_t(n)] - e0), 0.0, 1e-8 * (1 + e0)) << n;
  }
}

TEST(Spectra, ZeroPotentialEqualsModelZeros) {
  // With q = 0 and h = H = a2 = 0 the characteristic functions are the model ones.
  const ProblemSpec s = ProblemSpec::zero(0.3, 2.0);
  const ModelSpectrumParams mp = ModelSpectrumParams::from(s);
  for (int i : {0, 1}) {
    const auto found = find_spectrum(s, i, 25).flattened();
    const ModelSpectrum m = model_spectrum(mp, 0.3, i, 25);
    for (std::size_t n = 0; n < 25; ++n)
      EXPECT_NEAR(std::abs(found[n] - m.lambda[n]), 0.0, 1e-8 * (1 + m.lambda[n])) << "i=" << i << " n=" << n;
  }
}

TEST(Spectra, SelfAdjointCaseAgreesWithBisection) {
  AnalyticProblem p;
  p.a = 0.45;
  p.q1 = [](double x) { return cd(2.0 * std::cos(3 * x)); };
  p.q2 = [](double x) { return cd(1.0 - x); };
  p.h = 0.4;
  p.H = -0.7;
  p.a1 = 1.0;
  p.a2 = 0.8;
  const ProblemSpec s = p.spec(2049);
  for (int i : {0, 1}) {
    const Subspectrum found = find_spectrum(s, i, 15);
    const cd top = found.points.back().lambda;
    for (const auto& pt : found.points) EXPECT_LT(std::abs(pt.lambda.imag()), 1e-8 * (1 + std::abs(pt.lambda)));
    auto f = [&](double x) { return delta_rk4(p, i, cd(x)).real(); };
    std::vector<double> roots = scan_bisect(f, -60.0, 100.0, 0.05);
    const auto more = scan_bisect(f, 100.0, top.real() + 1.0, 0.5);
    roots.insert(roots.end(), more.begin(), more.end());
    const auto vals = found.flattened();
    ASSERT_EQ(roots.size(), vals.size()) << "i=" << i;
    for (std::size_t n = 0; n < roots.size(); ++n)
      EXPECT_NEAR(vals[n].real(), roots[n], 1e-6 * (1 + std::abs(roots[n]))) << "i=" << i << " n=" << n;
  }
}

TEST(Spectra, ComplexCaseMatchesArgumentPrincipleCounts) {
  const AnalyticProblem p = generic_problem(0.4);
  const ProblemSpec s = p.spec(1025);
  for (int i : {0, 1}) {
    const auto vals = find_spectrum(s, i, 14).flattened();
    for (std::size_t k : {4u, 11u}) {
      const double R = 0.5 * (std::abs(vals[k]) + std::abs(vals[k + 1]));
      const int inside = winding_count([&](cd z) { return delta_rk4(p, i, z); }, 0.0, R, 3000);
      EXPECT_EQ(inside, int(k + 1)) << "i=" << i << " R=" << R;
    }
    for (cd z : vals) {
      const double near = std::abs(delta_rk4(p, i, z)), off = std::abs(delta_rk4(p, i, z + 1.0));
      EXPECT_LT(near, 1e-4 * off) << "i=" << i << " lambda=" << z;
    }
  }
}

TEST(Spectra, DoubleEigenvalueIsReportedWithMultiplicityTwo) {
  const DoubleEigen d = double_eigenvalue_problem();
  const ProblemSpec s = d.problem.spec();
  const Subspectrum sub = find_spectrum(s, 1, 8);
  EXPECT_EQ(sub.total(), 8);
  int doubles = 0;
  for (const auto& pt : sub.points)
    if (pt.multiplicity == 2) {
      ++doubles;
      EXPECT_NEAR(std::abs(pt.lambda - d.lambda), 0.0, 1e-5);
    }
  EXPECT_EQ(doubles, 1);
  // Independent check of the multiplicity on a small circle.
  EXPECT_EQ(winding_count([&](cd z) { return delta_rk4(d.problem, 1, z); }, d.lambda, 0.05, 800), 2);
}

TEST(Spectra, DeterministicAcrossRuns) {
  const ProblemSpec s = generic_problem().spec();
  const auto x = find_spectrum(s, 1, 12).flattened(), y = find_spectrum(s, 1, 12).flattened();
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_EQ(x[k], y[k]);
}

TEST(Spectra, RobinShiftHasTheLinearizedSign) {
  const double h = 0.05;
  const ProblemSpec s = ProblemSpec::zero(0.5, 1.0, 0.0, h, cd(0.0));
  const ModelSpectrumParams mp = ModelSpectrumParams::from(s);
  const auto vals = find_spectrum(s, 1, 12).flattened();
  for (int n = 3; n < 12; ++n) {
    const double r0 = n * pi;
    const cd theta = theta_correction(mp, 0.5, 1, r0);
    EXPECT_NEAR(theta.real(), h, 1e-12);
    EXPECT_NEAR(((std::sqrt(vals[std::size_t(n)]) - r0) * r0).real(), h, 5e-4) << n;
  }
}

class AsymptoticResiduals : public ::testing::TestWithParam<std::tuple<double, int>> {};

TEST_P(AsymptoticResiduals, AreSquareSummableAndDecay) {
  const auto [a, i] = GetParam();
  const ProblemSpec s = generic_problem(a).spec();
  const ModelSpectrumParams mp = ModelSpectrumParams::from(s);
  const int N = 60;
  const auto vals = find_spectrum(s, i, N).flattened();
  const ModelSpectrum m = model_spectrum(mp, a, i, N);
  std::vector<cd> th;
  for (double r : m.rho) th.push_back(r == 0.0 ? cd(0.0) : theta_correction(mp, a, i, r));
  const auto kappa = asymptotic_residuals(vals, m.lambda, th);
  EXPECT_TRUE(l2_stabilized(kappa, 10, 0.01));
  double head = 0.0, tail = 0.0;
  for (int n = 5; n < 15; ++n) head = std::max(head, std::abs(kappa[std::size_t(n)]));
  for (int n = N - 10; n < N; ++n) tail = std::max(tail, std::abs(kappa[std::size_t(n)]));
  EXPECT_LT(tail, 0.5 * head);
}

INSTANTIATE_TEST_SUITE_P(Interfaces, AsymptoticResiduals,
                         ::testing::Combine(::testing::Values(0.4, 0.5), ::testing::Values(0, 1)));

TEST(Spectra, AsymptoticResidualsRejectMismatchedLengths) {
  EXPECT_THROW(asymptotic_residuals({cd(1.0)}, {1.0, 4.0}, {cd(0.0), cd(0.0)}), Error);
}

TEST(Spectra, WindingOnAPolynomial) {
  auto f = [](cd z) { return (z - cd(1.0, 0.5)) * (z - cd(-2.0, 0.2)) * (z - cd(0.3, -1.0)); };
  const WindingResult w = winding_rect(f, Rect{-3.0, 3.0, -2.0, 2.0});
  EXPECT_TRUE(w.reliable);
  EXPECT_EQ(w.count, 3);
  const WindingResult c = winding_circle(f, cd(1.0, 0.5), 0.1);
  EXPECT_EQ(c.count, 1);
}

TEST(Spectra, SubspectrumGroupsEqualValues) {
  const Subspectrum s = Subspectrum::from_values(1, {cd(1.0), cd(2.0), cd(2.0), cd(5.0)});
  ASSERT_EQ(s.points.size(), 3u);
  EXPECT_EQ(s.points[1].multiplicity, 2);
  EXPECT_EQ(s.total(), 4);
  EXPECT_EQ(s.first_indices(), (std::vector<int>{0, 1, 3}));
  EXPECT_EQ(s.flattened().size(), 4u);
}

TEST(Spectra, RejectsBadRequests) {
  const ProblemSpec s = generic_problem().spec();
  EXPECT_THROW(find_spectrum(s, 2, 5), Error);
  EXPECT_THROW(find_spectrum(s, 1, 0), Error);
  ProblemSpec noH = s;
  noH.H.reset();
  EXPECT_THROW(find_spectrum(noH, 1, 5), Error);
  EXPECT_NO_THROW(find_spectrum(noH, 0, 5));
}
