#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "slinv/error.hpp"

namespace slinv {

using cd = std::complex<double>;

inline constexpr int kMaxJetOrder = 7;

/// Truncated Taylor series in the spectral parameter: c[k] = f^(k)(lambda0) / k!.
class Jet {
public:
  Jet() : Jet(0) {}

  explicit Jet(int order, cd value = 0.0) : order_(order) {
    if (order < 0 || order > kMaxJetOrder)
      throw input_error("jet", "jet order " + std::to_string(order) + " outside [0, " +
                                   std::to_string(kMaxJetOrder) + "]");
    c_[0] = value;
  }

  /// The identity map lambda -> lambda expanded at `at`.
  static Jet variable(int order, cd at) {
    Jet j(order, at);
    if (order > 0) j.c_[1] = 1.0;
    return j;
  }

  int order() const { return order_; }
  cd operator[](int k) const { return c_[k]; }
  cd& operator[](int k) { return c_[k]; }
  cd value() const { return c_[0]; }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= order_; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= order_; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator*=(cd s) {
    for (int k = 0; k <= order_; ++k) c_[k] *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, cd s) { return a *= s; }
  friend Jet operator*(cd s, Jet a) { return a *= s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator+(Jet a, cd s) { a.c_[0] += s; return a; }
  friend Jet operator+(cd s, Jet a) { a.c_[0] += s; return a; }
  friend Jet operator-(Jet a, cd s) { a.c_[0] -= s; return a; }
  friend Jet operator-(cd s, Jet a) { a *= -1.0; a.c_[0] += s; return a; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.order_);
    for (int k = 0; k <= a.order_; ++k) {
      cd acc = 0.0;
      for (int j = 0; j <= k; ++j) acc += a.c_[j] * b.c_[k - j];
      r.c_[k] = acc;
    }
    return r;
  }

  /// Coefficients of f(lambda0 + beta * delta) given those of f(lambda0 + delta).
  Jet rescaled(cd beta) const {
    Jet r(*this);
    cd p = 1.0;
    for (int k = 0; k <= order_; ++k) {
      r.c_[k] *= p;
      p *= beta;
    }
    return r;
  }

private:
  int order_;
  std::array<cd, kMaxJetOrder + 1> c_{};
};

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace detail

/// Taylor coefficients at z of C(z) = cos(sqrt z) and S(z) = sin(sqrt z)/sqrt z.
/// Both are entire in z, so no branch of the square root leaks into the result.
inline void cos_sinc_jets(cd z, int order, Jet& C, Jet& S) {
  C = Jet(order);
  S = Jet(order);
  const double az = std::abs(z);
  const double switch_radius = std::max(20.0, 2.0 * (order + 1) * (order + 1));
  if (az <= switch_radius) {
    // Power series: C^<nu>(z) = sum_{k>=nu} (-1)^k binom(k,nu) z^{k-nu}/(2k)!.
    for (int nu = 0; nu <= order; ++nu) {
      cd sc = 0.0, ss = 0.0;
      cd zp = 1.0;  // z^{k-nu}
      double binom = 1.0;
      double fc = detail::factorial(2 * nu);  // (2k)!
      double fs = fc * (2 * nu + 1);          // (2k+1)!
      for (int k = nu; k < nu + 200; ++k) {
        const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        const cd tc = sgn * binom * zp / fc;
        const cd ts = sgn * binom * zp / fs;
        sc += tc;
        ss += ts;
        if (k > nu + 2 && double(k) * double(k) > az && std::norm(tc) < 1e-36 * (std::norm(sc) + 1e-300) &&
            std::norm(ts) < 1e-36 * (std::norm(ss) + 1e-300))
          break;
        zp *= z;
        binom = binom * double(k + 1) / double(k + 1 - nu);
        fc *= double(2 * k + 1) * double(2 * k + 2);
        fs *= double(2 * k + 2) * double(2 * k + 3);
      }
      C[nu] = sc;
      S[nu] = ss;
    }
    return;
  }
  // Closed form plus the recursion 2z S' = C - S, C' = -S/2 (stable for |z| >> order^2).
  const cd w = std::sqrt(z);
  std::array<cd, kMaxJetOrder + 2> dc{}, ds{};
  dc[0] = std::cos(w);
  ds[0] = std::sin(w) / w;
  for (int n = 0; n < order; ++n) {
    dc[n + 1] = -0.5 * ds[n];
    ds[n + 1] = (dc[n] - double(2 * n + 1) * ds[n]) / (2.0 * z);
  }
  for (int n = 0; n <= order; ++n) {
    const double f = detail::factorial(n);
    C[n] = dc[n] / f;
    S[n] = ds[n] / f;
  }
}

/// Jets in lambda of cos(rho t) and sin(rho t)/rho, lambda = rho^2.
inline void trig_jets(cd lambda, double t, int order, Jet& cos_jet, Jet& sin_over_rho_jet) {
  Jet C, S;
  cos_sinc_jets(lambda * t * t, order, C, S);
  cos_jet = C.rescaled(t * t);
  sin_over_rho_jet = S.rescaled(t * t) * t;
}

}  // namespace slinv
