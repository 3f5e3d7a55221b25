#include <gtest/gtest.h>

#include "support.hpp"

using namespace slinv;
using namespace testing_support;

namespace {

const Potential smooth_q1 = [](double x) { return cd(0.4 * std::cos(2 * pi * x), 0.3 * x); };

double max_abs(const ComplexGrid& g) {
  double m = 0.0;
  for (cd v : g.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(Cauchy, ZeroPotentialHasZeroKernelTraces) {
  for (cd h : {cd(0.0), cd(0.7), cd(-0.2, 0.5)}) {
    const CauchyData c = forward_cauchy(ComplexGrid::constant(0.5, 257, 0.0), h);
    // coefficients are rho (+-1 - phi(a)) with rho up to 128 pi / a, so roundoff is amplified
    EXPECT_LT(max_abs(c.K1), 1e-7) << h;
    EXPECT_LT(max_abs(c.K2), 1e-7) << h;
    EXPECT_NEAR(std::abs(c.omega1 - h), 0.0, 1e-14);
  }
}

TEST(Cauchy, RepresentationMatchesShooting) {
  for (double a : {0.5, 0.35}) {
    const ComplexGrid q = ComplexGrid::sample(a, 1025, smooth_q1);
    const cd h(0.2, -0.1);
    const CauchyData c = forward_cauchy(q, h);
    for (cd lam : {cd(1.0, 2.0), cd(-15.0), cd(300.0, 50.0), cd(2500.0, -10.0)}) {
      const auto [p0, p1] = phi_from_cauchy(c, a, lam);
      const auto [y, yp] = shoot(smooth_q1, a, lam, 1.0, h, 4 * rk4_steps(lam, a));
      const double rho = std::max(1.0, std::abs(std::sqrt(lam)));
      EXPECT_NEAR(std::abs(p0 - y), 0.0, 1e-6 * (1 + std::abs(y))) << "a=" << a << " lambda=" << lam;
      EXPECT_NEAR(std::abs(p1 - yp), 0.0, 1e-6 * rho * (1 + std::abs(y))) << "a=" << a << " lambda=" << lam;
    }
  }
}

TEST(Cauchy, RoundTripRecoversThePotential) {
  const double a = 0.5;
  const ComplexGrid q = ComplexGrid::sample(a, 257, smooth_q1);
  const cd h(0.2, -0.1);
  const PotentialReconstruction r = cauchy_to_potential(forward_cauchy(q, h));
  EXPECT_LT(l2_distance(r.q1, q), 1e-3 * std::max(q.l2_norm(), 1.0));
  EXPECT_LT(std::abs(r.h - h), 1e-4);
  // K(x, x) = h + (1/2) int_0^x q1
  EXPECT_NEAR(std::abs(r.kernel(r.kernel.n(), r.kernel.n()) - (h + 0.5 * q.integral())), 0.0, 1e-6);
}

TEST(Cauchy, ZeroDataGiveZeroPotential) {
  const PotentialReconstruction r = cauchy_to_potential(CauchyData::zero(0.4, cd(0.3, 0.1)), 128);
  EXPECT_LT(max_abs(r.q1), 1e-12);
  EXPECT_NEAR(std::abs(r.h - cd(0.3, 0.1)), 0.0, 1e-14);
}

TEST(Cauchy, SigmaDampingChangesLittleOnSmoothData) {
  const ComplexGrid q = ComplexGrid::sample(0.5, 257, smooth_q1);
  CauchyOptions opt;
  opt.lanczos = true;
  const CauchyData plain = forward_cauchy(q, 0.1), damped = forward_cauchy(q, 0.1, 128, opt);
  EXPECT_LT(l2_distance(plain.K2, damped.K2), 1e-3);
}

TEST(Cauchy, NonDecayingCoefficientsAreANumericalError) {
  std::vector<cd> flat(64, cd(1.0));
  try {
    detail::check_decay(flat, "sine");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
    EXPECT_EQ(e.stage(), "cauchy");
  }
  std::vector<cd> decaying(64);
  for (std::size_t k = 0; k < 64; ++k) decaying[k] = 1.0 / double((k + 1) * (k + 1));
  EXPECT_NO_THROW(detail::check_decay(decaying, "sine"));
}

TEST(Cauchy, ValidationRejectsMismatchedTraces) {
  CauchyData c{ComplexGrid::constant(0.5, 9, 0.0), ComplexGrid::constant(0.5, 17, 0.0), 0.0};
  EXPECT_THROW(c.validate(), Error);
  c.K2 = ComplexGrid::constant(0.4, 9, 0.0);
  EXPECT_THROW(c.validate(), Error);
}
