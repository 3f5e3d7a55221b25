#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slinv/slinv.hpp"

using namespace slinv;
using io::json;

namespace {

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    io::write_file(out, text);
}

int run_forward(const std::string& spec_path, int i, int n, const std::string& out) {
  const ProblemSpec spec = io::spec_from(io::read_json(spec_path));
  const Subspectrum s = find_spectrum(spec, i, n);
  emit(out, io::spectrum_csv(s));
  return 0;
}

std::pair<Subspectrum, Subspectrum> load_spectra(const std::vector<std::string>& files) {
  Subspectrum s0, s1;
  s0.i = 0;
  s1.i = 1;
  for (const auto& f : files) {
    const Subspectrum s = io::spectrum_from_csv(io::read_file(f));
    auto& dst = s.i == 0 ? s0 : s1;
    dst.points.insert(dst.points.end(), s.points.begin(), s.points.end());
  }
  sort_points(s0.points);
  sort_points(s1.points);
  return {s0, s1};
}

int run_invert(const std::string& known_path, const std::string& spec_path, const std::vector<std::string>& files,
               int modes, double reg, const std::string& out) {
  if (known_path.empty() == spec_path.empty()) throw input_error("cli", "give exactly one of --known or --spec");
  std::optional<ProblemSpec> truth;
  KnownData known;
  if (!spec_path.empty()) {
    truth = io::spec_from(io::read_json(spec_path));
    known = KnownData::from(*truth);
  } else {
    known = io::known_from(io::read_json(known_path));
  }
  const auto [s0, s1] = load_spectra(files);
  InvertOptions opt;
  opt.modes = modes;
  opt.reg = reg;
  const ReconstructionResult r = invert(known, s0, s1, opt);
  json j = io::to_json(r);
  std::fprintf(stderr, "rows %d, trial modes %d, rank %d, residual %.3e, gram condition %.4g\n", r.rows,
               r.trial_modes, r.effective_rank, r.residual_norm, r.gram_condition);
  if (truth) {
    const double eq = l2_distance(r.q1, truth->q1.resampled(r.q1.size()));
    const double eh = std::abs(r.h - truth->h);
    std::fprintf(stderr, "error vs spec: ||dq1|| %.3e, |dh| %.3e\n", eq, eh);
    j["error_q1"] = eq;
    j["error_h"] = eh;
  }
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  emit(out, j.dump(2) + "\n");
  return 0;
}

int run_stability(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed,
                  const std::vector<double>& eps, int samples) {
  ExperimentConfig cfg = io::config_from(io::read_json(config_path));
  if (seed) cfg.seed = *seed;
  if (!eps.empty()) cfg.epsilons = eps;
  if (samples > 0) cfg.samples = samples;
  cfg.validate();
  const StabilityReport r = run_stability(cfg);
  std::fprintf(stderr, "%s: exponent %.3f, ratio spread %.3f, failures %d\n", to_string(r.family).c_str(),
               r.exponent, r.ratio_spread, r.failures);
  emit(out, io::to_json(r).dump(2) + "\n");
  return 0;
}

int run_diagnose(const std::string& spec_path, const std::vector<std::string>& files, const std::string& out) {
  const ProblemSpec spec = io::spec_from(io::read_json(spec_path));
  const auto [s0, s1] = load_spectra(files);
  json records = json::array();
  auto add = [&](const io::CheckRecord& r) { records.push_back(io::to_json(r)); };

  FrequencySystem fs;
  fs.interval_length = 2.0 * spec.a;
  for (const auto* s : {&s0, &s1})
    for (const auto& p : s->points) fs.alphas.push_back(std::sqrt(p.lambda));
  const int n = int(fs.alphas.size());
  try {
    std::vector<int> Ms;
    for (int M : {16, 32, 64, 128})
      if (M <= n / 2) Ms.push_back(M);
    if (Ms.size() < 2) {
      Ms.clear();
      for (int d : {8, 4, 2})
        if (n / d >= 2) Ms.push_back(n / d);
    }
    const PlateauReport pr = riesz_plateau(fs, Ms);
    json sec = json::array();
    for (const auto& s : pr.sections)
      sec.push_back({{"M", s.M}, {"condition", s.condition}, {"frame_lower", s.frame_lower},
                     {"frame_upper", s.frame_upper}, {"coverage", s.coverage}});
    add({"riesz_plateau", {{"sections", sec}, {"heuristic", true}}, pr.sections.back().condition, pr.plateau});
  } catch (const Error& e) {
    add({"riesz_plateau", {{"finding", e.what()}}, 0.0, false});
  }

  for (const auto* s : {&s0, &s1}) {
    if (s->points.empty()) continue;
    if (s->i == 1 && !spec.H) continue;
    try {
      const NormAsymptotics na = norm_asymptotics_check(spec, *s, s->i);
      double tail = 0.0;
      for (std::size_t k = na.deviations.size() / 2; k < na.deviations.size(); ++k)
        tail = std::max(tail, std::abs(na.deviations[k]));
      add({"norm_asymptotics", {{"i", s->i}, {"bound", na.bound}, {"count", na.deviations.size()}}, tail, tail < 1.0});
    } catch (const Error& e) {
      add({"norm_asymptotics", {{"i", s->i}, {"finding", e.what()}}, 0.0, false});
    }
  }

  double worst = 0.0;
  for (int k = 0; k + 1 < n && k < 10; ++k)
    worst = std::max(worst, vn_identity_check(fs.alphas[std::size_t(k)], fs.alphas[std::size_t(k + 1)], spec.a));
  add({"vn_identity", {{"pairs", std::min(10, std::max(0, n - 1))}}, worst, worst <= 1e-9});

  emit(out, records.dump(2) + "\n");
  bool all = true;
  for (const auto& r : records) all = all && r["pass"].get<bool>();
  std::fprintf(stderr, "%zu checks, %s\n", records.size(), all ? "all pass" : "findings reported");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recovery of a Sturm-Liouville potential from partial spectral data with an interior jump"};
  app.require_subcommand(1);

  std::string spec, known, out, config;
  std::vector<std::string> spectra;
  int i = 1, n = 20, modes = 0, samples = 0;
  double reg = 1e-10;
  std::uint64_t seed = 0;
  std::vector<double> eps;

  auto* fwd = app.add_subcommand("forward", "compute the first N eigenvalues of B_i as CSV");
  fwd->add_option("--spec", spec, "problem spec JSON")->required();
  fwd->add_option("--i", i, "boundary tag (0: y(1) = 0, 1: Robin)")->check(CLI::Range(0, 1));
  fwd->add_option("--n-eigs", n, "number of eigenvalues")->check(CLI::PositiveNumber);
  fwd->add_option("--out", out, "output CSV (default stdout)");

  auto* inv = app.add_subcommand("invert", "recover q1 and h from subspectra");
  inv->add_option("--known", known, "known data JSON (a, q2, H, a1, a2, omega1)");
  inv->add_option("--spec", spec, "full spec JSON; the known part is taken from it and errors are reported");
  inv->add_option("--spectra", spectra, "spectrum CSV files")->required();
  inv->add_option("--modes", modes, "trial modes per component (0 = automatic)");
  inv->add_option("--reg", reg, "relative singular value cutoff");
  inv->add_option("--out", out, "output JSON (default stdout)");

  auto* stab = app.add_subcommand("stability", "Monte-Carlo stability sweep");
  stab->add_option("--config", config, "experiment config JSON")->required();
  auto* seed_opt = stab->add_option("--seed", seed, "override the seed");
  stab->add_option("--eps", eps, "override epsilons")->delimiter(',');
  stab->add_option("--samples", samples, "override samples per epsilon");
  stab->add_option("--out", out, "output JSON (default stdout)");

  auto* diag = app.add_subcommand("diagnose", "basis diagnostics over given subspectra");
  diag->add_option("--spec", spec, "problem spec JSON")->required();
  diag->add_option("--spectra", spectra, "spectrum CSV files")->required();
  diag->add_option("--out", out, "output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fwd) return run_forward(spec, i, n, out);
    if (*inv) return run_invert(known, spec, spectra, modes, reg, out);
    if (*stab)
      return run_stability(config, out, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt, eps, samples);
    if (*diag) return run_diagnose(spec, spectra, out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::input ? 2 : 3;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: [io] %s\n", e.what());
    return 2;
  }
  return 0;
}
