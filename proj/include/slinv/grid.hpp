#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "slinv/error.hpp"

namespace slinv {

using cd = std::complex<double>;

inline bool finite(cd z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Complex samples on a uniform grid over [0, length], endpoints included.
class ComplexGrid {
public:
  ComplexGrid() = default;

  ComplexGrid(double length, std::vector<cd> values) : length_(length), values_(std::move(values)) {
    if (!(length_ > 0.0) || !std::isfinite(length_))
      throw input_error("grid", "interval length must be positive and finite");
    if (values_.size() < 2) throw input_error("grid", "a grid needs at least 2 samples");
    for (const cd& v : values_)
      if (!finite(v)) throw input_error("grid", "grid contains non-finite samples");
  }

  static ComplexGrid constant(double length, std::size_t n, cd value) {
    return ComplexGrid(length, std::vector<cd>(n, value));
  }

  static ComplexGrid sample(double length, std::size_t n, const std::function<cd(double)>& f) {
    std::vector<cd> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = f(length * double(j) / double(n - 1));
    return ComplexGrid(length, std::move(v));
  }

  double length() const { return length_; }
  std::size_t size() const { return values_.size(); }
  std::size_t cells() const { return values_.size() - 1; }
  double spacing() const { return length_ / double(values_.size() - 1); }
  double node(std::size_t j) const { return length_ * double(j) / double(values_.size() - 1); }
  const std::vector<cd>& values() const { return values_; }
  cd operator[](std::size_t j) const { return values_[j]; }

  /// Piecewise-linear interpolant; clamps outside [0, length].
  cd operator()(double x) const {
    const double s = x / spacing();
    if (s <= 0.0) return values_.front();
    const std::size_t last = values_.size() - 1;
    if (s >= double(last)) return values_.back();
    const std::size_t j = static_cast<std::size_t>(s);
    const double w = s - double(j);
    return (1.0 - w) * values_[j] + w * values_[j + 1];
  }

  /// Four-point Lagrange interpolant (one-sided near the ends).
  cd cubic(double x) const {
    const std::size_t n = values_.size();
    if (n < 4) return (*this)(x);
    const double s = std::clamp(x / spacing(), 0.0, double(n - 1));
    std::ptrdiff_t j0 = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
    j0 = std::clamp<std::ptrdiff_t>(j0, 0, std::ptrdiff_t(n) - 4);
    cd acc = 0.0;
    for (int k = 0; k < 4; ++k) {
      double l = 1.0;
      for (int m = 0; m < 4; ++m)
        if (m != k) l *= (s - double(j0 + m)) / double(k - m);
      acc += l * values_[std::size_t(j0 + k)];
    }
    return acc;
  }

  /// Trapezoid rule, i.e. the exact integral of the piecewise-linear interpolant.
  cd integral() const {
    cd acc = 0.5 * (values_.front() + values_.back());
    for (std::size_t j = 1; j + 1 < values_.size(); ++j) acc += values_[j];
    return acc * spacing();
  }

  /// L2 norm of the piecewise-linear interpolant (exact for linear pieces).
  double l2_norm() const {
    double acc = 0.0;
    const double h = spacing();
    for (std::size_t j = 0; j + 1 < values_.size(); ++j) {
      const cd a = values_[j], b = values_[j + 1];
      acc += h / 3.0 * (std::norm(a) + std::real(a * std::conj(b)) + std::norm(b));
    }
    return std::sqrt(acc);
  }

  ComplexGrid resampled(std::size_t n) const {
    if (n == values_.size()) return *this;
    return sample(length_, n, [this](double x) { return cubic(x); });
  }

  ComplexGrid operator-(const ComplexGrid& o) const { return combine(o, -1.0); }
  ComplexGrid operator+(const ComplexGrid& o) const { return combine(o, 1.0); }
  ComplexGrid scaled(cd s) const {
    std::vector<cd> v = values_;
    for (cd& z : v) z *= s;
    return ComplexGrid(length_, std::move(v));
  }

private:
  ComplexGrid combine(const ComplexGrid& o, double sign) const {
    std::vector<cd> v(values_.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
      const cd ov = (o.size() == size()) ? o[j] : o.cubic(node(j));
      v[j] = values_[j] + sign * ov;
    }
    return ComplexGrid(length_, std::move(v));
  }

  double length_ = 1.0;
  std::vector<cd> values_;
};

/// L2 distance between two grids on the same interval, evaluated on the finer one.
inline double l2_distance(const ComplexGrid& a, const ComplexGrid& b) {
  return (a.size() >= b.size()) ? (a - b).l2_norm() : (b - a).l2_norm();
}

/// Fourth-order cumulative integral F(x_j) = int_0^{x_j} f on a uniform grid.
inline std::vector<cd> cumulative_integral(const std::vector<cd>& f, double h) {
  const std::size_t n = f.size();
  std::vector<cd> out(n, 0.0);
  if (n < 4) {
    for (std::size_t j = 1; j < n; ++j) out[j] = out[j - 1] + 0.5 * h * (f[j - 1] + f[j]);
    return out;
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    cd piece;
    if (j == 0)
      piece = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    else if (j + 2 == n)
      piece = h / 24.0 * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]);
    else
      piece = h / 24.0 * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2]);
    out[j + 1] = out[j] + piece;
  }
  return out;
}

}  // namespace slinv
