#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "slinv/ode.hpp"
#include "slinv/quadrature.hpp"

namespace slinv {

/// Traces of the transformation kernel at x = a: K1(t) = K_t(a, t), K2(t) = K_x(a, t),
/// and omega1 = K(a, a).
struct CauchyData {
  ComplexGrid K1;
  ComplexGrid K2;
  cd omega1 = 0.0;

  double a() const { return K1.length(); }

  void validate() const {
    if (K1.size() != K2.size() || std::abs(K1.length() - K2.length()) > 1e-14)
      throw input_error("cauchy", "K1 and K2 must share interval and resolution");
    if (!finite(omega1)) throw input_error("cauchy", "omega1 must be finite");
  }

  static CauchyData zero(double a, cd omega1, std::size_t n = 257) {
    return {ComplexGrid::constant(a, n, 0.0), ComplexGrid::constant(a, n, 0.0), omega1};
  }
};

/// K(x, t) on the triangle 0 <= t <= x <= a sampled at (i delta, j delta), j <= i.
class KernelField {
public:
  KernelField() = default;
  KernelField(double a, int n) : a_(a), n_(n), data_(std::size_t(n + 1) * std::size_t(n + 2) / 2, 0.0) {}

  double a() const { return a_; }
  int n() const { return n_; }
  double delta() const { return a_ / n_; }
  cd& operator()(int i, int j) { return data_[offset(i) + std::size_t(j)]; }
  cd operator()(int i, int j) const { return data_[offset(i) + std::size_t(j)]; }

  /// K(x, x) as a grid over [0, a].
  ComplexGrid diagonal() const {
    std::vector<cd> d(std::size_t(n_) + 1);
    for (int i = 0; i <= n_; ++i) d[std::size_t(i)] = (*this)(i, i);
    return ComplexGrid(a_, std::move(d));
  }

private:
  static std::size_t offset(int i) { return std::size_t(i) * std::size_t(i + 1) / 2; }
  double a_ = 0.0;
  int n_ = 0;
  std::vector<cd> data_;
};

struct CauchyOptions {
  int grid_n = 256;            // output cells
  bool lanczos = false;        // sigma-factor damping of the series
  IntegratorOptions integrator{};
};

namespace detail {

/// Fits y_k ~ J + c1 / r_k^2 + c2 (-1)^k / r_k^2 by least squares and returns J.
inline cd fit_endpoint(const std::vector<double>& r, const std::vector<int>& k, const std::vector<cd>& y) {
  const Eigen::Index m = Eigen::Index(y.size());
  Eigen::MatrixXcd A(m, 3);
  Eigen::VectorXcd b(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double inv = 1.0 / (r[std::size_t(j)] * r[std::size_t(j)]);
    A(j, 0) = 1.0;
    A(j, 1) = inv;
    A(j, 2) = (k[std::size_t(j)] % 2 == 0 ? 1.0 : -1.0) * inv;
    b(j) = y[std::size_t(j)];
  }
  return A.colPivHouseholderQr().solve(b)(0);
}

inline void check_decay(const std::vector<cd>& coef, const char* what) {
  const std::size_t n = coef.size(), q = std::max<std::size_t>(n / 4, 1);
  double head = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < q; ++k) head = std::max(head, std::abs(coef[k]));
  for (std::size_t k = n - q; k < n; ++k) tail = std::max(tail, std::abs(coef[k]));
  if (tail > 1e-8 && tail > 0.5 * head)
    throw numerical_error("cauchy", std::string("non-decaying ") + what + " coefficients (tail " +
                                        std::to_string(tail) + " vs head " + std::to_string(head) + ")");
}

inline double lanczos_sigma(int k, int modes) {
  if (k == 0) return 1.0;
  const double x = std::numbers::pi * k / (modes + 1);
  return std::sin(x) / x;
}

}  // namespace detail

/// Cauchy data of (q1, h) from sine and cosine moments of phi at rho_k = k pi / a.
///
/// At those nodes sin(rho a) = 0, so int K1 sin(rho_k t) = rho_k((-1)^k - phi_0(rho_k^2))
/// and int K2 cos(rho_k t) = phi_1(rho_k^2) - omega1 (-1)^k. K1(a) is generally nonzero,
/// so its sine series would converge only like 1/k; the endpoint value is fitted from the
/// moment tail and carried by a linear term, leaving a remainder that vanishes at both ends.
inline CauchyData forward_cauchy(const ComplexGrid& q1, cd h, int modes = 128, const CauchyOptions& opt = {}) {
  if (modes < 8) throw input_error("cauchy", "modes must be at least 8");
  if (!finite(h)) throw input_error("cauchy", "h must be finite");
  const double a = q1.length();
  const cd omega1 = h + 0.5 * q1.integral();

  std::vector<cd> m(std::size_t(modes) + 1), M(std::size_t(modes) + 1);
  for (int k = 0; k <= modes; ++k) {
    const double rho = k * std::numbers::pi / a;
    const SolutionJet s = integrate_jet(q1, rho * rho, 1.0, h, 0, opt.integrator);
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    m[std::size_t(k)] = rho * (sgn - s.y[0]);
    M[std::size_t(k)] = s.yprime[0] - omega1 * sgn;
  }

  std::vector<double> rr;
  std::vector<int> kk;
  std::vector<cd> yy;
  for (int k = modes - modes / 4; k <= modes; ++k) {
    const double rho = k * std::numbers::pi / a;
    rr.push_back(rho);
    kk.push_back(k);
    yy.push_back(rho * ((k % 2 == 0) ? -1.0 : 1.0) * m[std::size_t(k)]);
  }
  const cd J = detail::fit_endpoint(rr, kk, yy);

  std::vector<cd> bs(static_cast<std::size_t>(modes)), bc(static_cast<std::size_t>(modes) + 1);
  for (int k = 1; k <= modes; ++k) {
    const double sgn1 = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^(k+1)
    bs[std::size_t(k - 1)] = (2.0 / a) * m[std::size_t(k)] - 2.0 * J * sgn1 / (k * std::numbers::pi);
  }
  bc[0] = M[0] / a;
  for (int k = 1; k <= modes; ++k) bc[std::size_t(k)] = (2.0 / a) * M[std::size_t(k)];
  detail::check_decay(bs, "sine");
  detail::check_decay(bc, "cosine");
  if (opt.lanczos) {
    for (int k = 1; k <= modes; ++k) {
      bs[std::size_t(k - 1)] *= detail::lanczos_sigma(k, modes);
      bc[std::size_t(k)] *= detail::lanczos_sigma(k, modes);
    }
  }

  const std::size_t n = std::size_t(opt.grid_n) + 1;
  std::vector<cd> K1(n), K2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = a * double(j) / double(n - 1);
    cd s1 = J * t / a, s2 = bc[0];
    for (int k = 1; k <= modes; ++k) {
      const double x = k * std::numbers::pi * t / a;
      s1 += bs[std::size_t(k - 1)] * std::sin(x);
      s2 += bc[std::size_t(k)] * std::cos(x);
    }
    K1[j] = s1;
    K2[j] = s2;
  }
  return {ComplexGrid(a, std::move(K1)), ComplexGrid(a, std::move(K2)), omega1};
}

/// phi_0 = phi(a, lambda) and phi_1 = phi'(a, lambda) from the Cauchy data.
inline std::pair<cd, cd> phi_from_cauchy(const CauchyData& c, double a, cd lambda) {
  c.validate();
  if (!finite(lambda)) throw input_error("cauchy", "lambda must be finite");
  if (std::abs(c.a() - a) > 1e-12) throw input_error("cauchy", "Cauchy data interval does not match a");
  const double rho_abs = std::abs(std::sqrt(lambda));
  const int panels = std::max(oscillatory_panels(a, rho_abs, std::abs(std::sqrt(lambda).imag())),
                              int(c.K1.cells() / 8) + 1);
  const CompositeRule rule = composite_rule(0.0, a, panels);
  cd I1 = 0.0, I2 = 0.0;
  for (std::size_t k = 0; k < rule.t.size(); ++k) {
    const double t = rule.t[k];
    cd C, S;
    detail::cos_sinc(lambda * t * t, C, S);
    I1 += rule.w[k] * c.K1.cubic(t) * (S * t);
    I2 += rule.w[k] * c.K2.cubic(t) * C;
  }
  cd Ca, Sa;
  detail::cos_sinc(lambda * a * a, Ca, Sa);
  const cd sin_over_rho = Sa * a;
  const cd phi0 = Ca + c.omega1 * sin_over_rho - I1;
  const cd phi1 = -lambda * sin_over_rho + c.omega1 * Ca + I2;
  return {phi0, phi1};
}

struct PotentialReconstruction {
  ComplexGrid q1;
  cd h;
  KernelField kernel;
};

namespace detail {

/// D'(x_i) from D(x_i..x_n) and the known D'(x_n) through the interpolating polynomial.
inline cd front_derivative(const std::vector<cd>& D, int i, int n, cd dD_end, double delta) {
  const int pts = n - i + 1;
  if (pts >= 5)
    return (-25.0 * D[std::size_t(i)] + 48.0 * D[std::size_t(i + 1)] - 36.0 * D[std::size_t(i + 2)] +
            16.0 * D[std::size_t(i + 3)] - 3.0 * D[std::size_t(i + 4)]) /
           (12.0 * delta);
  if (pts == 1) return dD_end;
  const int deg = pts;  // pts values plus one slope
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(deg + 1, deg + 1);
  Eigen::VectorXcd b(deg + 1);
  for (int k = 0; k < pts; ++k) {
    double p = 1.0;
    for (int c = 0; c <= deg; ++c, p *= k) A(k, c) = p;
    b(k) = D[std::size_t(i + k)];
  }
  const double s = pts - 1;
  for (int c = 1; c <= deg; ++c) A(pts, c) = c * std::pow(s, c - 1);
  b(pts) = dD_end * delta;
  const Eigen::VectorXcd coef = A.fullPivLu().solve(b);
  return coef(1) / delta;
}

}  // namespace detail

/// (q1, h) from Cauchy data by marching K_xx - K_tt = q(x) K from x = a down to 0 on the
/// characteristic grid (unit Courant ratio), with q(x) = 2 d/dx K(x, x) read off the
/// diagonal as it is produced.
inline PotentialReconstruction cauchy_to_potential(const CauchyData& c, int grid_n = 256) {
  c.validate();
  if (grid_n < 8) throw input_error("cauchy", "grid_n must be at least 8");
  const double a = c.a();
  const int n = grid_n;
  const double d = a / n;

  std::vector<cd> k1(std::size_t(n) + 1), k2(std::size_t(n) + 1);
  for (int j = 0; j <= n; ++j) {
    k1[std::size_t(j)] = c.K1.cubic(j * d);
    k2[std::size_t(j)] = c.K2.cubic(j * d);
  }
  const std::vector<cd> cum = cumulative_integral(k1, d);

  KernelField K(a, n);
  for (int j = 0; j <= n; ++j) K(n, j) = c.omega1 - (cum[std::size_t(n)] - cum[std::size_t(j)]);
  const cd dD_end = k1[std::size_t(n)] + k2[std::size_t(n)];

  std::vector<cd> D(std::size_t(n) + 1), q(std::size_t(n) + 1);
  D[std::size_t(n)] = K(n, n);
  q[std::size_t(n)] = 2.0 * dD_end;
  double scale = 0.0;
  for (int j = 0; j <= n; ++j) scale = std::max(scale, std::abs(K(n, j)));
  scale = 1.0 + scale + a * std::abs(dD_end);

  auto at = [&](int i, int j) { return K(i, j < 0 ? -j : j); };  // even in t
  for (int i = n; i >= 1; --i) {
    const cd qi = q[std::size_t(i)];
    double row_max = 0.0;
    for (int j = 0; j <= i - 1; ++j) {
      cd v;
      if (i == n)
        v = 0.5 * (at(i, j + 1) + at(i, j - 1) + d * d * qi * at(i, j)) - d * k2[std::size_t(j)];
      else
        v = at(i, j + 1) + at(i, j - 1) - K(i + 1, j) + d * d * qi * at(i, j);
      K(i - 1, j) = v;
      row_max = std::max(row_max, std::abs(v));
    }
    if (!(row_max < 1e8 * scale))
      throw numerical_error("cauchy", "marching blew up at x = " + std::to_string((i - 1) * d));
    D[std::size_t(i - 1)] = K(i - 1, i - 1);
    q[std::size_t(i - 1)] = 2.0 * detail::front_derivative(D, i - 1, n, dD_end, d);
  }

  // Final potential from centred differences of the whole diagonal.
  std::vector<cd> qf(std::size_t(n) + 1);
  for (int i = 0; i <= n; ++i) {
    cd dd;
    if (i >= 2 && i <= n - 2)
      dd = (-D[std::size_t(i + 2)] + 8.0 * D[std::size_t(i + 1)] - 8.0 * D[std::size_t(i - 1)] +
            D[std::size_t(i - 2)]) /
           (12.0 * d);
    else if (i < 2)
      dd = detail::front_derivative(D, i, n, dD_end, d);
    else
      dd = (i == n) ? dD_end
                    : (25.0 * D[std::size_t(i)] - 48.0 * D[std::size_t(i - 1)] + 36.0 * D[std::size_t(i - 2)] -
                       16.0 * D[std::size_t(i - 3)] + 3.0 * D[std::size_t(i - 4)]) /
                          (12.0 * d);
    qf[std::size_t(i)] = 2.0 * dd;
  }
  ComplexGrid q1(a, std::move(qf));
  const cd h = c.omega1 - 0.5 * q1.integral();
  return {std::move(q1), h, std::move(K)};
}

}  // namespace slinv
