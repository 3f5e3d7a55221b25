#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace slinv {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

/// Gauss-Legendre rule by Newton iteration on the three-term recurrence.
inline GaussRule make_gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

inline const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

/// Nodes and weights of a composite rule with `panels` equal panels on [lo, hi].
struct CompositeRule {
  std::vector<double> t;
  std::vector<double> w;
};

inline CompositeRule composite_rule(double lo, double hi, int panels, int points = 16) {
  const GaussRule& g = gauss_legendre(points);
  CompositeRule r;
  r.t.reserve(std::size_t(panels) * points);
  r.w.reserve(std::size_t(panels) * points);
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    for (int k = 0; k < points; ++k) {
      r.t.push_back(mid + 0.5 * h * g.x[k]);
      r.w.push_back(0.5 * h * g.w[k]);
    }
  }
  return r;
}

/// Panel count for an entire oscillatory integrand on an interval of length L with
/// frequencies up to `freq` and exponential growth rate `growth`.
inline int oscillatory_panels(double length, double freq, double growth = 0.0, int floor_panels = 4) {
  const double cycles = length * (std::abs(freq) + std::abs(growth)) / (2.0 * std::numbers::pi);
  return std::max(floor_panels, int(std::ceil(2.0 * cycles)) + 2);
}

template <class F>
auto integrate(F&& f, double lo, double hi, int panels, int points = 16) {
  const CompositeRule r = composite_rule(lo, hi, panels, points);
  decltype(f(lo)) acc{};
  for (std::size_t k = 0; k < r.t.size(); ++k) acc += r.w[k] * f(r.t[k]);
  return acc;
}

}  // namespace slinv
