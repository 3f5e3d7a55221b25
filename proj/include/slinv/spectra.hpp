#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "slinv/problem.hpp"

namespace slinv {

// ---------------------------------------------------------------------------
// Characteristic functions

struct GJet {
  Jet g0;  // -psi_i(d2) / a1
  Jet g1;  // a1 psi_i'(d2) + a2 psi_i(d2)
};

inline GJet g_jet(const ComplexGrid& q2, const std::optional<cd>& H, double a1, cd a2, int i, cd lambda,
                  int nu_max, const IntegratorOptions& opt = {}) {
  const SolutionJet s = psi_jet(q2, H, i, lambda, nu_max, opt);
  const Jet psi = s.y_jet(), dpsi = s.yprime_jet();
  return {psi * cd(-1.0 / a1), dpsi * cd(a1) + psi * a2};
}

inline GJet g_jet(const ProblemSpec& spec, int i, cd lambda, int nu_max, const IntegratorOptions& opt = {}) {
  return g_jet(spec.q2, spec.H, spec.a1, spec.a2, i, lambda, nu_max, opt);
}

inline GJet g_jet(const KnownData& k, int i, cd lambda, int nu_max, const IntegratorOptions& opt = {}) {
  return g_jet(k.q2, k.H, k.a1, k.a2, i, lambda, nu_max, opt);
}

/// Jet of Delta_i = phi(a) g_{i,1} - phi'(a) g_{i,0}.
inline Jet delta(const ProblemSpec& spec, int i, cd lambda, int nu_max, const IntegratorOptions& opt = {}) {
  const SolutionJet ph = phi_jet(spec, lambda, nu_max, opt);
  const GJet g = g_jet(spec, i, lambda, nu_max, opt);
  return ph.y_jet() * g.g1 - ph.yprime_jet() * g.g0;
}

// ---------------------------------------------------------------------------
// Model spectrum and first-order corrections

struct ModelSpectrumParams {
  double b_plus = 1.0, b_minus = 0.0;
  cd eta_plus = 0.0, eta_minus = 0.0, zeta_plus = 0.0, zeta_minus = 0.0;
  cd omega0 = 0.0, omega1 = 0.0, omega2 = 0.0;

  static ModelSpectrumParams make(double a1, cd a2, cd omega0, cd omega1, cd omega2) {
    ModelSpectrumParams p;
    p.b_plus = 0.5 * (a1 + 1.0 / a1);
    p.b_minus = 0.5 * (a1 - 1.0 / a1);
    p.omega0 = omega0;
    p.omega1 = omega1;
    p.omega2 = omega2;
    p.eta_plus = p.b_plus * (omega2 + omega1) + 0.5 * a2;
    p.eta_minus = p.b_minus * (omega2 - omega1) + 0.5 * a2;
    p.zeta_plus = p.b_plus * (omega1 + omega0) + 0.5 * a2;
    p.zeta_minus = p.b_minus * (omega1 - omega0) - 0.5 * a2;
    return p;
  }

  static ModelSpectrumParams from(const ProblemSpec& s) {
    const cd w0 = 0.5 * s.q2.integral();
    const cd w1 = s.h + 0.5 * s.q1.integral();
    const cd w2 = s.H ? *s.H + w0 : cd(std::nan(""), 0.0);
    return make(s.a1, s.a2, w0, w1, w2);
  }
};

namespace detail {

// Delta_1^0 = -rho F(rho), Delta_0^0 = G(rho); both real for real rho.
inline double model_F(const ModelSpectrumParams& p, double a, double rho) {
  return p.b_plus * std::sin(rho) - p.b_minus * std::sin(rho * (2 * a - 1));
}
inline double model_G(const ModelSpectrumParams& p, double a, double rho) {
  return p.b_plus * std::cos(rho) + p.b_minus * std::cos(rho * (2 * a - 1));
}
inline double model_fn(const ModelSpectrumParams& p, double a, int i, double rho) {
  return i == 1 ? model_F(p, a, rho) : model_G(p, a, rho);
}

}  // namespace detail

/// d Delta_i^0 / d lambda at a model zero rho0.
inline double model_derivative(const ModelSpectrumParams& p, double a, int i, double rho0) {
  const double k = 2 * a - 1;
  if (i == 1) {
    const double Fp = p.b_plus * std::cos(rho0) - p.b_minus * k * std::cos(k * rho0);
    return rho0 == 0.0 ? -Fp : -0.5 * Fp;
  }
  const double Gp = -p.b_plus * std::sin(rho0) - p.b_minus * k * std::sin(k * rho0);
  return Gp / (2.0 * rho0);
}

struct ModelSpectrum {
  std::vector<double> rho;
  std::vector<double> lambda;
  double separation = 0.0;  // min gap between consecutive rho
};

/// First `count` zeros of the model characteristic function, by scan and bisection.
inline ModelSpectrum model_spectrum(const ModelSpectrumParams& p, double a, int i, int count) {
  if (count < 1) throw input_error("spectra", "count must be positive");
  if (!(p.b_plus > std::abs(p.b_minus))) throw input_error("spectra", "model requires a1 > 0");
  ModelSpectrum m;
  if (i == 1) m.rho.push_back(0.0);
  const double step = 0.005;
  const double rho_cap = (count + 4) * 4.0 * std::numbers::pi;
  double lo = 1e-9, flo = detail::model_fn(p, a, i, lo);
  while (int(m.rho.size()) < count) {
    const double hi = lo + step;
    if (hi > rho_cap) throw numerical_error("spectra", "could not isolate the requested model zeros");
    const double fhi = detail::model_fn(p, a, i, hi);
    if (flo == 0.0 || (flo < 0) != (fhi < 0)) {
      double x0 = lo, x1 = hi, f0 = flo;
      for (int it = 0; it < 200 && x1 - x0 > 1e-15 * x1; ++it) {
        const double xm = 0.5 * (x0 + x1), fm = detail::model_fn(p, a, i, xm);
        if ((fm < 0) == (f0 < 0)) {
          x0 = xm;
          f0 = fm;
        } else {
          x1 = xm;
        }
      }
      m.rho.push_back(0.5 * (x0 + x1));
    }
    lo = hi;
    flo = fhi;
  }
  m.separation = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < m.rho.size(); ++n) {
    m.lambda.push_back(m.rho[n] * m.rho[n]);
    if (n > 0) m.separation = std::min(m.separation, m.rho[n] - m.rho[n - 1]);
  }
  return m;
}

/// First-order shift theta with rho_n ~ rho0 + theta / rho0.
///
/// For i = 1 the sign is the one forced by linearizing Delta_1^0 + eta_+ cos rho +
/// eta_- cos rho(2a-1) = 0 around the model zero (a Robin check: q = 0, small h gives
/// rho_n = n pi + h / (n pi)).
inline cd theta_correction(const ModelSpectrumParams& p, double a, int i, double rho0) {
  const double k = 2 * a - 1;
  const double d = model_derivative(p, a, i, rho0);
  if (std::abs(d) < 1e-12 * (p.b_plus + 1.0))
    throw input_error("spectra", "model derivative vanishes at rho0 = " + std::to_string(rho0));
  if (i == 1) return -(p.eta_plus * std::cos(rho0) + p.eta_minus * std::cos(k * rho0)) / (2.0 * d);
  if (rho0 == 0.0) throw input_error("spectra", "rho0 = 0 is not a zero of the i = 0 model");
  return -(p.zeta_plus * std::sin(rho0) + p.zeta_minus * std::sin(k * rho0)) / (2.0 * rho0 * d);
}

// ---------------------------------------------------------------------------
// Spectra

struct SpectralPoint {
  cd lambda;
  int multiplicity = 1;
  int i = 1;
};

/// Eigenvalues of one problem, sorted by |lambda| (then real, then imaginary part),
/// each distinct value listed once with its multiplicity.
struct Subspectrum {
  int i = 1;
  std::vector<SpectralPoint> points;

  int total() const {
    int n = 0;
    for (const auto& p : points) n += p.multiplicity;
    return n;
  }

  /// Groups runs of equal values into points with multiplicity, keeping the order.
  static Subspectrum from_values(int i, const std::vector<cd>& values) {
    Subspectrum s;
    s.i = i;
    for (cd v : values) {
      if (!s.points.empty() && s.points.back().lambda == v)
        ++s.points.back().multiplicity;
      else
        s.points.push_back({v, 1, i});
    }
    return s;
  }

  /// Values repeated according to multiplicity (the mu_{i,n} sequence).
  std::vector<cd> flattened() const {
    std::vector<cd> out;
    for (const auto& p : points)
      for (int k = 0; k < p.multiplicity; ++k) out.push_back(p.lambda);
    return out;
  }

  /// Index of the first occurrence of each distinct value in the flattened list.
  std::vector<int> first_indices() const {
    std::vector<int> idx;
    int n = 0;
    for (const auto& p : points) {
      idx.push_back(n);
      n += p.multiplicity;
    }
    return idx;
  }
};

inline bool spectral_less(cd x, cd y) {
  const double ax = std::abs(x), ay = std::abs(y);
  if (ax != ay) return ax < ay;
  if (x.real() != y.real()) return x.real() < y.real();
  return x.imag() < y.imag();
}

inline void sort_points(std::vector<SpectralPoint>& pts) {
  std::sort(pts.begin(), pts.end(),
            [](const SpectralPoint& x, const SpectralPoint& y) { return spectral_less(x.lambda, y.lambda); });
}

inline double multiplicity_radius(cd lambda) { return std::max(1e-6 * (1.0 + std::abs(lambda)), 1e-4); }

// ---------------------------------------------------------------------------
// Argument principle and Newton

struct WindingResult {
  int count = 0;
  double winding = 0.0;  // total argument change / 2 pi
  double min_abs = 0.0;
  double max_abs = 0.0;
  bool reliable = false;
  int evaluations = 0;
};

/// Winding number of f along the closed path s -> path(s), s in [0, 1], starting from
/// the sorted initial parameters `seeds` (first 0) and bisecting wherever the argument
/// jumps by more than `max_arg_step`.
template <class F, class Path>
WindingResult winding_number(F&& f, Path&& path, const std::vector<double>& seeds, double max_arg_step = 0.5) {
  WindingResult r;
  r.min_abs = std::numeric_limits<double>::infinity();
  struct Sample {
    double s;
    cd v;
  };
  auto eval = [&](double s) {
    const cd v = f(path(s));
    ++r.evaluations;
    const double m = std::abs(v);
    r.min_abs = std::min(r.min_abs, m);
    r.max_abs = std::max(r.max_abs, m);
    return Sample{s, v};
  };
  bool ok = true;
  double total = 0.0;
  Sample prev = eval(0.0);
  const Sample first = prev;
  for (std::size_t k = 1; k <= seeds.size(); ++k) {
    Sample next = (k == seeds.size()) ? Sample{1.0, first.v} : eval(seeds[k]);
    std::vector<Sample> stack{next};
    while (!stack.empty()) {
      Sample b = stack.back();
      if (prev.v == 0.0 || b.v == 0.0 || !finite(prev.v) || !finite(b.v)) {
        ok = false;
        prev = b;
        stack.pop_back();
        continue;
      }
      const double darg = std::arg(b.v / prev.v);
      const double ratio = std::abs(b.v) / std::abs(prev.v);
      if ((std::abs(darg) > max_arg_step || ratio > 4.0 || ratio < 0.25) && b.s - prev.s > 1e-9) {
        stack.push_back(eval(0.5 * (prev.s + b.s)));
        continue;
      }
      if (std::abs(darg) > 2.0) ok = false;  // unresolved even at the finest spacing
      total += darg;
      prev = b;
      stack.pop_back();
    }
  }
  r.winding = total / (2.0 * std::numbers::pi);
  r.count = int(std::lround(r.winding));
  r.reliable = ok && std::abs(r.winding - r.count) < 0.05 && r.min_abs > 0.0;
  return r;
}

/// Expected argument change of an exponential-type function of sqrt(lambda) between
/// two nearby points: |d sqrt(lambda)| plus a floor so no segment goes unsampled.
inline double sqrt_phase_length(cd z0, cd z1) {
  constexpr int sub = 32;
  double acc = 0.0;
  cd prev = std::sqrt(z0);
  for (int k = 1; k <= sub; ++k) {
    const cd z = z0 + (z1 - z0) * (double(k) / sub);
    cd w = std::sqrt(z);
    // Track the continuous branch across the negative axis.
    if (std::abs(w - prev) > std::abs(-w - prev)) w = -w;
    acc += std::abs(w - prev);
    prev = w;
  }
  return acc;
}

/// Winding number along a closed polygon with per-edge seeding from sqrt_phase_length.
template <class F>
WindingResult winding_polygon(F&& f, const std::vector<cd>& vertices, double phase_step = 0.3) {
  const std::size_t nv = vertices.size();
  std::vector<int> counts(nv);
  int total = 0;
  for (std::size_t e = 0; e < nv; ++e) {
    const double ph = sqrt_phase_length(vertices[e], vertices[(e + 1) % nv]);
    counts[e] = 6 + int(std::ceil(ph / phase_step));
    total += counts[e];
  }
  // Each edge owns an equal share of the parameter so seeds are uniform per edge.
  std::vector<double> seeds;
  for (std::size_t e = 0; e < nv; ++e)
    for (int k = 0; k < counts[e]; ++k) seeds.push_back((double(e) + double(k) / counts[e]) / double(nv));
  auto path = [&](double s) -> cd {
    const double u = std::clamp(s, 0.0, 1.0) * double(nv);
    const std::size_t e = std::min<std::size_t>(std::size_t(u), nv - 1);
    const double t = u - double(e);
    return vertices[e] + (vertices[(e + 1) % nv] - vertices[e]) * t;
  };
  return winding_number(f, path, seeds);
}

struct Rect {
  double x0, x1, y0, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  cd center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool contains(cd z, double pad = 0.0) const {
    return z.real() >= x0 - pad && z.real() <= x1 + pad && z.imag() >= y0 - pad && z.imag() <= y1 + pad;
  }
};

template <class F>
WindingResult winding_rect(F&& f, const Rect& r) {
  return winding_polygon(f, {cd(r.x0, r.y0), cd(r.x1, r.y0), cd(r.x1, r.y1), cd(r.x0, r.y1)});
}

template <class F>
WindingResult winding_circle(F&& f, cd center, double radius, int initial = 16) {
  const double phase = 2.0 * std::numbers::pi * radius / (2.0 * std::sqrt(std::abs(center) + radius + 1.0));
  const int n = std::max(initial, int(std::ceil(phase / 0.3)));
  std::vector<double> seeds(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) seeds[std::size_t(k)] = double(k) / n;
  auto path = [&](double s) { return center + radius * std::polar(1.0, 2.0 * std::numbers::pi * s); };
  return winding_number(f, path, seeds);
}

struct NewtonResult {
  cd lambda;
  bool converged = false;
  int iterations = 0;
};

/// Newton (or multiplicity-m modified Newton) on a function given by its order-1 jet.
/// Stops when |f| < tol, then polishes while the step keeps shrinking.
template <class FJ>
NewtonResult newton(FJ&& fj, cd start, int m, double tol, int max_iter = 50) {
  NewtonResult r{start, false, 0};
  cd z = start;
  for (int it = 0; it < max_iter; ++it) {
    const Jet j = fj(z);
    r.iterations = it + 1;
    if (!finite(j[0]) || !finite(j[1]) || j[1] == 0.0) return r;
    cd step = double(m) * j[0] / j[1];
    if (std::abs(j[0]) < tol) {
      double last = std::abs(step);
      z -= step;
      // Steps halve near a zero of higher multiplicity than m, so keep going while they
      // shrink at all.
      for (int p = 0; p < 60; ++p) {
        const Jet jp = fj(z);
        if (jp[1] == 0.0) break;
        const cd sp = double(m) * jp[0] / jp[1];
        if (!(std::abs(sp) < 0.9 * last)) break;
        z -= sp;
        last = std::abs(sp);
        if (last <= 1e-15 * (1.0 + std::abs(z))) break;
      }
      r.lambda = z;
      r.converged = true;
      return r;
    }
    z -= step;
    if (!finite(z)) return r;
  }
  r.lambda = z;
  return r;
}

// ---------------------------------------------------------------------------
// Zero enumeration of an entire function inside rectangles

struct FoundZero {
  cd lambda;
  int multiplicity;
};

class ZeroFinder {
public:
  using JetFn = std::function<Jet(cd, int)>;

  explicit ZeroFinder(JetFn fn, int max_depth = 48)
      : fn_([this, f = std::move(fn)](cd z, int nu) {
          ++evaluations_;
          return f(z, nu);
        }),
        max_depth_(max_depth) {}
  ZeroFinder(const ZeroFinder&) = delete;
  ZeroFinder& operator=(const ZeroFinder&) = delete;

  cd value(cd z) const { return fn_(z, 0)[0]; }
  long evaluations() const { return evaluations_; }

  WindingResult count(const Rect& r) const {
    WindingResult w = winding_rect([this](cd z) { return value(z); }, r);
    scale_ = std::max(scale_, w.max_abs);
    return w;
  }

  int multiplicity_at(cd z) const {
    const double rad = multiplicity_radius(z);
    const WindingResult w = winding_circle([this](cd x) { return value(x); }, z, rad);
    return w.reliable ? std::max(w.count, 1) : 1;
  }

  /// Newton with tolerance relative to the larger of `scale` and every contour maximum
  /// seen so far; small rectangles alone understate the roundoff level.
  NewtonResult refine(cd start, int m, double scale) const {
    return newton([this](cd z) { return fn_(z, 1); }, start, m, 1e-12 * std::max(scale, scale_));
  }

  /// All zeros inside r with multiplicities; `w` is the already-computed count of r.
  void search(const Rect& r, const WindingResult& w, std::vector<FoundZero>& out, cd seed,
              int depth = 0) const {
    if (w.count <= 0) return;
    if (depth > max_depth_) throw numerical_error("spectra", "zero search exceeded its subdivision depth");
    const double size = std::max(r.width(), r.height());
    const double rad = multiplicity_radius(r.center());
    if (w.count == 1 || size < 50.0 * rad) {
      for (cd start : {seed, r.center()}) {
        const NewtonResult nr = refine(start, 1, w.max_abs);
        if (!nr.converged || !r.contains(nr.lambda, 1e-9 * (1.0 + std::abs(nr.lambda)))) continue;
        const int m = (w.count == 1) ? 1 : multiplicity_at(nr.lambda);
        if (m == w.count) {
          const cd z = (m > 1) ? refine(nr.lambda, m, w.max_abs).lambda : nr.lambda;
          out.push_back({z, m});
          return;
        }
        break;
      }
      if (size < 2.0 * rad)
        throw numerical_error("spectra", "unresolved cluster of " + std::to_string(w.count) + " zeros near " +
                                             std::to_string(r.center().real()) + "+" +
                                             std::to_string(r.center().imag()) + "i");
    }
    // Split into four; move the split lines until every child contour is reliable.
    static constexpr double offsets[] = {0.0137, -0.0291, 0.0523, -0.0719, 0.1013, -0.1301};
    for (double off : offsets) {
      const double xs = r.x0 + (0.5 + off) * r.width();
      const double ys = r.y0 + (0.5 - 0.7 * off) * r.height();
      const Rect kids[4] = {{r.x0, xs, r.y0, ys}, {xs, r.x1, r.y0, ys}, {r.x0, xs, ys, r.y1}, {xs, r.x1, ys, r.y1}};
      WindingResult kw[4];
      bool ok = true;
      int sum = 0;
      for (int k = 0; k < 4 && ok; ++k) {
        kw[k] = count(kids[k]);
        ok = kw[k].reliable;
        sum += kw[k].count;
      }
      if (!ok || sum != w.count) continue;
      for (int k = 0; k < 4; ++k) search(kids[k], kw[k], out, kids[k].center(), depth + 1);
      return;
    }
    throw numerical_error("spectra", "could not place subdivision contours away from zeros");
  }

  /// Newton from each seed; accepts the distinct limits inside r when they account for
  /// all w.count zeros. Distinct limits equal in number to the count are all simple.
  bool seeded(const Rect& r, const WindingResult& w, const std::vector<cd>& seeds,
              std::vector<FoundZero>& out) const {
    std::vector<cd> roots;
    for (cd s : seeds) {
      if (int(roots.size()) >= w.count) break;
      const NewtonResult nr = refine(s, 1, w.max_abs);
      if (!nr.converged || !r.contains(nr.lambda)) continue;
      bool dup = false;
      for (cd z : roots) dup = dup || std::abs(z - nr.lambda) < multiplicity_radius(z);
      if (!dup) roots.push_back(nr.lambda);
    }
    if (int(roots.size()) != w.count) return false;
    for (cd z : roots) out.push_back({z, 1});
    return true;
  }

private:
  mutable long evaluations_ = 0;
  mutable double scale_ = 0.0;
  JetFn fn_;
  int max_depth_;
};

// ---------------------------------------------------------------------------

struct SpectrumOptions {
  int low_model_zeros = 10;  // the low-index rectangle covers this many model zeros
  IntegratorOptions integrator{};
  bool verify_total = true;  // recount all found zeros with one large contour
  int max_widenings = 3;     // doublings of the Im(rho) bound after a failed recount
};

namespace detail {

/// Heuristic bound on |Im rho| of eigenvalues, from the sizes of the lower-order data.
inline double im_rho_bound(const ProblemSpec& s, int i) {
  double l1 = 0.0;
  for (const ComplexGrid* g : {&s.q1, &s.q2})
    for (std::size_t j = 0; j < g->size(); ++j) l1 += std::abs((*g)[j]) * g->spacing();
  double mass = std::abs(s.h) + std::abs(s.a2) + l1 + ((i == 1 && s.H) ? std::abs(*s.H) : 0.0);
  const double bp = 0.5 * (s.a1 + 1.0 / s.a1), bm = std::abs(0.5 * (s.a1 - 1.0 / s.a1));
  return 1.0 + mass / (bp - bm) + 0.5 * std::log(bp / (bp - bm));
}

struct SearchOutcome {
  std::vector<FoundZero> zeros;
  ModelSpectrum model;
};

inline SearchOutcome search_regions(const ProblemSpec& spec, int i, int N, const SpectrumOptions& opt,
                                    const ModelSpectrumParams& mp, const ZeroFinder& finder, double c) {
  const int nlow = std::max(1, opt.low_model_zeros);
  SearchOutcome res;
  res.model = model_spectrum(mp, spec.a, i, std::max(N, nlow) + 16);
  auto& model = res.model;
  auto& zeros = res.zeros;
  auto edge = [&](int n) {  // real-axis boundary between model zeros n and n + 1
    const double r = 0.5 * (model.rho[std::size_t(n)] + model.rho[std::size_t(n) + 1]);
    return r * r;
  };
  auto strip_height = [&](double x) { return 2.0 * std::sqrt(std::max(x, 1.0)) * c + 1.0; };
  auto seed_of = [&](int n) -> cd {
    const double r0 = model.rho[std::size_t(n)];
    if (r0 == 0.0) return 0.0;
    const cd rho = r0 + theta_correction(mp, spec.a, i, r0) / r0;
    return rho * rho;
  };

  // Low-index region.
  {
    const double X = edge(nlow - 1);
    Rect r{-c * c - 1.0, X, -strip_height(X), strip_height(X)};
    WindingResult w = finder.count(r);
    for (int attempt = 0; !w.reliable && attempt < 6; ++attempt) {
      r.x0 -= 0.173 * (attempt + 1);
      r.y1 += 0.119 * (attempt + 1);
      w = finder.count(r);
    }
    if (!w.reliable) throw numerical_error("spectra", "low-index contour passes through a zero");
    std::vector<cd> seeds;
    for (int n = 0; n < nlow; ++n) seeds.push_back(seed_of(n));
    if (!finder.seeded(r, w, seeds, zeros)) finder.search(r, w, zeros, r.center());
  }

  // Strips, one model zero each, until enough eigenvalues are found plus two margin strips.
  auto found = [&] {
    int n = 0;
    for (const auto& z : zeros) n += z.multiplicity;
    return n;
  };
  int n = nlow;
  int margin = 0;
  double xlo = edge(nlow - 1);
  while (margin < 2) {
    if (found() >= N) ++margin;
    if (std::size_t(n) + 2 >= model.rho.size()) model = model_spectrum(mp, spec.a, i, int(model.rho.size()) * 2);
    double xhi = edge(n);
    const double yh = strip_height(xhi);
    Rect r{xlo, xhi, -yh, yh};
    WindingResult w = finder.count(r);
    for (int attempt = 0; !w.reliable && attempt < 6; ++attempt) {
      xhi += 1e-3 * (attempt + 1) * (xhi - xlo);
      r.x1 = xhi;
      w = finder.count(r);
    }
    if (!w.reliable) throw numerical_error("spectra", "strip contour passes through a zero");
    const cd seed = seed_of(n);
    if (!finder.seeded(r, w, {seed, r.center()}, zeros)) finder.search(r, w, zeros, seed);
    xlo = xhi;
    ++n;
  }
  return res;
}

}  // namespace detail

/// The N smallest-|lambda| eigenvalues of B_i (counted with multiplicity).
///
/// A rectangle around the origin covering the first model zeros is searched with the
/// argument principle, then vertical strips centred on successive model zeros are
/// counted and refined by Newton from theta-corrected seeds. A final count on a circle
/// catches eigenvalues outside the assumed |Im rho| band, which widens the band.
inline Subspectrum find_spectrum(const ProblemSpec& spec, int i, int N, const SpectrumOptions& opt = {}) {
  spec.validate();
  if (N < 1) throw input_error("spectra", "N must be at least 1");
  if (i == 1 && !spec.H) throw input_error("spectra", "problem B1 needs a finite H");
  const ModelSpectrumParams mp = ModelSpectrumParams::from(spec);
  ZeroFinder finder([&](cd z, int nu) { return delta(spec, i, z, nu, opt.integrator); });
  double c = detail::im_rho_bound(spec, i);

  for (int widening = 0;; ++widening, c *= 2.0) {
    const detail::SearchOutcome res = detail::search_regions(spec, i, N, opt, mp, finder, c);
    std::vector<SpectralPoint> merged;
    {
      std::vector<SpectralPoint> pts;
      for (const auto& z : res.zeros) pts.push_back({z.lambda, z.multiplicity, i});
      sort_points(pts);
      // Values split across neighbouring contours are merged back together.
      for (const auto& p : pts) {
        if (!merged.empty() && std::abs(merged.back().lambda - p.lambda) < multiplicity_radius(p.lambda))
          merged.back().multiplicity += p.multiplicity;
        else
          merged.push_back(p);
      }
    }
    Subspectrum out;
    out.i = i;
    int total = 0;
    for (const auto& p : merged) {
      if (total >= N) break;
      out.points.push_back(p);
      total += p.multiplicity;
    }
    if (!opt.verify_total || out.points.empty()) return out;

    // Circle between the last kept eigenvalue and the next one.
    const double r_last = std::abs(out.points.back().lambda);
    double r_next = std::abs(res.model.lambda.back());
    for (const auto& p : merged)
      if (std::abs(p.lambda) > r_last * (1.0 + 1e-12)) {
        r_next = std::abs(p.lambda);
        break;
      }
    const double R = 0.5 * (r_last + r_next);
    const WindingResult w = winding_circle([&](cd z) { return finder.value(z); }, 0.0, R, 64);
    int inside = 0;
    for (const auto& p : merged)
      if (std::abs(p.lambda) < R) inside += p.multiplicity;
    if (!w.reliable || w.count == inside) return out;
    if (widening >= opt.max_widenings)
      throw numerical_error("spectra", "argument-principle count " + std::to_string(w.count) +
                                           " disagrees with " + std::to_string(inside) + " enumerated eigenvalues");
  }
}

// ---------------------------------------------------------------------------

/// kappa_n = (rho_n - rho0_n - theta_n / rho0_n) rho0_n; zero where rho0_n = 0.
inline std::vector<cd> asymptotic_residuals(const std::vector<cd>& eigenvalues, const std::vector<double>& model,
                                            const std::vector<cd>& thetas) {
  if (eigenvalues.size() != model.size() || model.size() != thetas.size())
    throw input_error("spectra", "spectrum, model and theta lists differ in length");
  std::vector<cd> kappa(model.size(), 0.0);
  for (std::size_t n = 0; n < model.size(); ++n) {
    const double r0 = std::sqrt(std::max(model[n], 0.0));
    if (r0 == 0.0) continue;
    cd rho = std::sqrt(eigenvalues[n]);
    if (rho.real() < 0) rho = -rho;
    kappa[n] = (rho - r0 - thetas[n] / r0) * r0;
  }
  return kappa;
}

/// Running sums of |kappa_n|^2.
inline std::vector<double> l2_partial_sums(const std::vector<cd>& kappa) {
  std::vector<double> s(kappa.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < kappa.size(); ++n) s[n] = (acc += std::norm(kappa[n]));
  return s;
}

/// True when the partial sums grow by less than `tol` (relative) over the last `tail` terms.
inline bool l2_stabilized(const std::vector<cd>& kappa, std::size_t tail, double tol = 0.01) {
  const auto s = l2_partial_sums(kappa);
  if (s.size() <= tail) return false;
  const double before = s[s.size() - 1 - tail], last = s.back();
  return last <= before * (1.0 + tol) || last == 0.0;
}

}  // namespace slinv
