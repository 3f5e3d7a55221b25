#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "slinv/main_eq.hpp"

namespace slinv {

enum class PerturbationFamily {
  eigenvalues,     // eigenvalue noise only
  q2_mean,         // eigenvalue noise plus a mean-preserving change of q2
  h_and_q2,        // eigenvalue noise plus (H, q2) keeping H + (1/2) int q2 fixed
};

inline std::string to_string(PerturbationFamily f) {
  switch (f) {
    case PerturbationFamily::eigenvalues: return "eigenvalues";
    case PerturbationFamily::q2_mean: return "q2-mean-preserving";
    case PerturbationFamily::h_and_q2: return "H-and-q2-constrained";
  }
  return "?";
}

inline PerturbationFamily parse_family(const std::string& s) {
  if (s == "eigenvalues") return PerturbationFamily::eigenvalues;
  if (s == "q2-mean-preserving" || s == "q2") return PerturbationFamily::q2_mean;
  if (s == "H-and-q2-constrained" || s == "h-and-q2") return PerturbationFamily::h_and_q2;
  throw input_error("harness", "unknown perturbation family '" + s + "'");
}

struct ExperimentConfig {
  ProblemSpec spec;
  std::vector<int> indices0;  // I_0: indices into the B0 spectrum
  std::vector<int> indices1;  // I_1: indices into the B1 spectrum
  std::vector<double> epsilons{1e-3, 3e-3, 1e-2};
  int samples = 32;
  std::uint64_t seed = 1;
  PerturbationFamily family = PerturbationFamily::q2_mean;
  int q2_terms = 8;  // cosine terms in the q2 noise
  std::optional<ComplexGrid> q2_direction;  // fixed shape for the q2 change instead of random bumps
  InvertOptions invert{};
  int threads = 0;   // 0 = hardware concurrency

  void validate() const {
    spec.validate();
    if (epsilons.empty()) throw input_error("harness", "no epsilons");
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
      if (!(epsilons[k] > 0.0)) throw input_error("harness", "epsilons must be positive");
      if (k > 0 && !(epsilons[k] > epsilons[k - 1])) throw input_error("harness", "epsilons must be ascending");
    }
    if (samples < 1) throw input_error("harness", "samples must be >= 1");
    if (indices0.empty() && indices1.empty()) throw input_error("harness", "empty index sets");
    if (!indices1.empty() && !spec.H) throw input_error("harness", "I_1 needs a finite H");
    if (family == PerturbationFamily::h_and_q2 && (!indices0.empty() || spec.a > 0.5))
      throw input_error("harness", "the (H, q2) family needs a <= 1/2 and B1 data only");
    if (q2_terms < 1) throw input_error("harness", "q2_terms must be >= 1");
    for (const auto* set : {&indices0, &indices1})
      for (int n : *set)
        if (n < 0) throw input_error("harness", "negative eigenvalue index");
    if (q2_direction) {
      if (family == PerturbationFamily::eigenvalues)
        throw input_error("harness", "q2_direction given for the eigenvalue-only family");
      if (std::abs(q2_direction->length() - (1.0 - spec.a)) > 1e-12)
        throw input_error("harness", "q2_direction must live on (0, 1 - a)");
      const double norm = q2_direction->l2_norm();
      if (!(norm > 0.0)) throw input_error("harness", "q2_direction is zero");
      if (family == PerturbationFamily::q2_mean && std::abs(q2_direction->integral()) > 1e-9 * norm)
        throw input_error("harness", "q2_direction changes the mean of q2; the family needs int delta = 0");
    }
  }
};

inline std::vector<int> index_range(int count, int start = 0, int stride = 1) {
  std::vector<int> v;
  for (int k = 0; k < count; ++k) v.push_back(start + k * stride);
  return v;
}

struct EpsilonStats {
  double epsilon = 0.0;
  int samples = 0;
  int failures = 0;
  double median_q1_error = 0.0;  // ||q1~ - q1_0||, q1_0 = noise-free reconstruction
  double median_h_error = 0.0;
  double max_q1_error = 0.0;
  double median_size = 0.0;      // Lambda + Q
  double median_ratio = 0.0;     // error / (Lambda + Q)
};

struct StabilityReport {
  PerturbationFamily family = PerturbationFamily::eigenvalues;
  std::vector<EpsilonStats> per_epsilon;
  double baseline_q1_error = 0.0;  // noise-free reconstruction vs the true q1
  double baseline_h_error = 0.0;
  double exponent = 0.0;           // slope of log median error vs log epsilon
  double constant = 0.0;           // largest median error / (Lambda + Q)
  double ratio_spread = 0.0;       // max / min of median ratios over the sweep
  bool monotone = true;            // median error nondecreasing in epsilon
  int failures = 0;
  double breakdown_epsilon = 0.0;  // smallest epsilon with a failed sample, 0 if none
  std::vector<std::string> failure_messages;
};

/// The data an inversion sees: known half, reference subspectra.
struct ExactData {
  KnownData known;
  Subspectrum sub0, sub1;
};

inline ExactData exact_data(const ProblemSpec& spec, const std::vector<int>& idx0, const std::vector<int>& idx1,
                            const SpectrumOptions& opt = {}) {
  ExactData d{KnownData::from(spec), {}, {}};
  d.sub0.i = 0;
  d.sub1.i = 1;
  auto pick = [&](int i, const std::vector<int>& idx, Subspectrum& out) {
    if (idx.empty()) return;
    const int top = *std::max_element(idx.begin(), idx.end());
    const std::vector<cd> all = find_spectrum(spec, i, top + 1, opt).flattened();
    std::vector<cd> chosen;
    for (int n : idx) chosen.push_back(all[std::size_t(n)]);
    out = Subspectrum::from_values(i, chosen);
  };
  pick(0, idx0, d.sub0);
  pick(1, idx1, d.sub1);
  return d;
}

namespace detail {

/// Zero-mean cosine series on (0, d) with unit L2 norm on the grid, plus an optional
/// constant component of weight `constant_share`.
inline ComplexGrid random_cosine_bump(double d, std::size_t n, int terms, std::mt19937_64& rng,
                                      double constant_share = 0.0) {
  std::normal_distribution<double> N01;
  std::vector<cd> c(static_cast<std::size_t>(terms));
  for (auto& v : c) v = cd(N01(rng), N01(rng));
  ComplexGrid g = ComplexGrid::sample(d, n, [&](double x) {
    cd s = 0.0;
    for (int k = 1; k <= terms; ++k) s += c[std::size_t(k - 1)] * std::cos(k * std::numbers::pi * x / d);
    return s;
  });
  g = g.scaled(1.0 / g.l2_norm());
  if (constant_share > 0.0) {
    const cd phase = std::polar(1.0, 2.0 * std::numbers::pi * std::uniform_real_distribution<double>()(rng));
    g = g.scaled(std::sqrt(1.0 - constant_share * constant_share)) +
        ComplexGrid::constant(d, n, constant_share * phase / std::sqrt(d));
  }
  return g;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct SampleOutcome {
  bool ok = false;
  double q1_error = 0.0, h_error = 0.0, size = 0.0;
  std::string message;
};

}  // namespace detail

/// One draw of perturbed data.
struct PerturbedData {
  KnownData known;
  std::vector<cd> values0, values1;
  double Lambda = 0.0;  // l2 size of the eigenvalue change
  double Q = 0.0;       // ||delta q2|| (+ |dH| for the (H, q2) family)
};

/// Every draw is scaled so Lambda = epsilon and, for the q2 families, Q = epsilon.
inline PerturbedData draw_perturbation(const ExperimentConfig& cfg, const ExactData& exact, double eps,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N01;

  const std::vector<cd> v0 = exact.sub0.flattened(), v1 = exact.sub1.flattened();
  std::vector<cd> noise(v0.size() + v1.size());
  double nn = 0.0;
  for (auto& z : noise) {
    z = cd(N01(rng), N01(rng));
    nn += std::norm(z);
  }
  const double scale = eps / std::sqrt(nn);
  PerturbedData d{exact.known, v0, v1, eps, 0.0};
  for (std::size_t k = 0; k < v0.size(); ++k) d.values0[k] += scale * noise[k];
  for (std::size_t k = 0; k < v1.size(); ++k) d.values1[k] += scale * noise[v0.size() + k];

  KnownData& known = d.known;
  auto shape = [&](double constant_share) {
    if (cfg.q2_direction) {
      const ComplexGrid g = cfg.q2_direction->resampled(known.q2.size());
      return g.scaled(1.0 / g.l2_norm());
    }
    return detail::random_cosine_bump(known.q2.length(), known.q2.size(), cfg.q2_terms, rng, constant_share);
  };
  if (cfg.family == PerturbationFamily::q2_mean) {
    known.q2 = known.q2 + shape(0.0).scaled(eps);
    d.Q = eps;
  } else if (cfg.family == PerturbationFamily::h_and_q2) {
    // H shifts by -(1/2) int delta; the two parts are split so that |dH| + ||delta|| = eps.
    ComplexGrid bump = shape(0.5);
    const double dh = 0.5 * std::abs(bump.integral());
    bump = bump.scaled(eps / (bump.l2_norm() + dh));
    known.q2 = known.q2 + bump;
    known.H = *known.H - 0.5 * bump.integral();
    d.Q = eps;
  }
  return d;
}

/// One perturbed inversion, compared with the noise-free reconstruction `base`.
inline detail::SampleOutcome stability_sample(const ExperimentConfig& cfg, const ExactData& exact,
                                              const ReconstructionResult& base, double eps, std::uint64_t seed) {
  detail::SampleOutcome out;
  const PerturbedData d = draw_perturbation(cfg, exact, eps, seed);
  const std::vector<cd> v0 = exact.sub0.flattened(), v1 = exact.sub1.flattened();
  const KnownData& known = d.known;
  const double size = d.Lambda + d.Q;

  Subspectrum s0, s1;
  s0.i = 0;
  s1.i = 1;
  if (!d.values0.empty()) s0 = Subspectrum::from_values(0, d.values0);
  if (!d.values1.empty()) s1 = Subspectrum::from_values(1, d.values1);
  InvertOptions io = cfg.invert;
  io.reference0 = v0.empty() ? nullptr : &exact.sub0;
  io.reference1 = v1.empty() ? nullptr : &exact.sub1;
  try {
    const ReconstructionResult r = invert(known, s0, s1, io);
    out.q1_error = l2_distance(r.q1, base.q1);
    out.h_error = std::abs(r.h - base.h);
    out.size = size;
    out.ok = std::isfinite(out.q1_error) && std::isfinite(out.h_error);
    if (!out.ok) out.message = "non-finite reconstruction";
  } catch (const Error& e) {
    out.message = e.what();
  }
  return out;
}

/// Per-sample seeds from a seed_seq over (seed, epsilon index, sample index).
inline std::uint64_t sample_seed(std::uint64_t seed, std::size_t e, int s) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(e), std::uint32_t(s)};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (std::uint64_t(w[0]) << 32) | w[1];
}

/// Monte-Carlo sweep over epsilon. Errors are measured against the noise-free
/// reconstruction, so the discretization floor of the round trip does not mask the
/// scaling; the floor itself is reported as the baseline.
inline StabilityReport run_stability(const ExperimentConfig& cfg, const SpectrumOptions& sopt = {}) {
  cfg.validate();
  const ExactData exact = exact_data(cfg.spec, cfg.indices0, cfg.indices1, sopt);
  InvertOptions io = cfg.invert;
  const ReconstructionResult base = invert(exact.known, exact.sub0, exact.sub1, io);

  StabilityReport rep;
  rep.family = cfg.family;
  rep.baseline_q1_error = l2_distance(base.q1, cfg.spec.q1.resampled(base.q1.size()));
  rep.baseline_h_error = std::abs(base.h - cfg.spec.h);

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = cfg.threads > 0 ? unsigned(cfg.threads) : hw;

  for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
    const double eps = cfg.epsilons[e];
    std::vector<detail::SampleOutcome> outs(static_cast<std::size_t>(cfg.samples));
    auto run_range = [&](int w) {
      for (int s = w; s < cfg.samples; s += int(workers))
        outs[std::size_t(s)] = stability_sample(cfg, exact, base, eps, sample_seed(cfg.seed, e, s));
    };
    if (workers == 1) {
      run_range(0);
    } else {
      std::vector<std::future<void>> fs;
      for (unsigned w = 0; w < workers; ++w) fs.push_back(std::async(std::launch::async, run_range, int(w)));
      for (auto& f : fs) f.get();
    }
    EpsilonStats st;
    st.epsilon = eps;
    st.samples = cfg.samples;
    std::vector<double> eq, eh, sz, ra;
    for (const auto& o : outs) {
      if (!o.ok) {
        ++st.failures;
        if (rep.failure_messages.size() < 16) rep.failure_messages.push_back(o.message);
        continue;
      }
      eq.push_back(o.q1_error);
      eh.push_back(o.h_error);
      sz.push_back(o.size);
      ra.push_back(std::max(o.q1_error, o.h_error) / o.size);
      st.max_q1_error = std::max(st.max_q1_error, o.q1_error);
    }
    st.median_q1_error = detail::median(eq);
    st.median_h_error = detail::median(eh);
    st.median_size = detail::median(sz);
    st.median_ratio = detail::median(ra);
    rep.failures += st.failures;
    if (st.failures > 0 && rep.breakdown_epsilon == 0.0) rep.breakdown_epsilon = eps;
    rep.per_epsilon.push_back(st);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0, rmin = INFINITY, rmax = 0;
  for (std::size_t k = 0; k < rep.per_epsilon.size(); ++k) {
    const auto& st = rep.per_epsilon[k];
    if (!(st.median_q1_error > 0.0)) continue;
    const double x = std::log(st.epsilon), y = std::log(st.median_q1_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
    rmin = std::min(rmin, st.median_ratio);
    rmax = std::max(rmax, st.median_ratio);
    rep.constant = std::max(rep.constant, st.median_ratio);
    if (k > 0 && st.median_q1_error < rep.per_epsilon[k - 1].median_q1_error) rep.monotone = false;
  }
  rep.exponent = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
  rep.ratio_spread = rmin > 0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace slinv
