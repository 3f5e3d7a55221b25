#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "slinv/basis_lab.hpp"
#include "slinv/harness.hpp"

namespace slinv::io {

using json = nlohmann::json;

inline json to_json(cd z) { return json::array({z.real(), z.imag()}); }

inline cd complex_from(const json& j, const std::string& what) {
  if (j.is_number()) return cd(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw input_error("io", what + " must be [re, im]");
  return cd(j[0].get<double>(), j[1].get<double>());
}

inline json to_json(const ComplexGrid& g) {
  json a = json::array();
  for (cd v : g.values()) a.push_back(to_json(v));
  return a;
}

inline ComplexGrid grid_from(const json& j, double length, const std::string& what) {
  if (!j.is_array() || j.size() < 2) throw input_error("io", what + " must be an array of at least 2 samples");
  std::vector<cd> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(complex_from(e, what + " sample"));
  return ComplexGrid(length, std::move(v));
}

inline double real_from(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw input_error("io", std::string("missing real field '") + key + "'");
  return j[key].get<double>();
}

inline const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw input_error("io", std::string("missing field '") + key + "'");
  return j[key];
}

inline std::optional<cd> robin_from(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "infinity") return std::nullopt;
    throw input_error("io", "H must be [re, im] or \"infinity\"");
  }
  return complex_from(j, "H");
}

inline json robin_to_json(const std::optional<cd>& H) { return H ? to_json(*H) : json("infinity"); }

// ---------------------------------------------------------------------------

inline json to_json(const ProblemSpec& s) {
  return {{"a", s.a},          {"q1", to_json(s.q1)}, {"q2", to_json(s.q2)}, {"h", to_json(s.h)},
          {"H", robin_to_json(s.H)}, {"a1", s.a1},   {"a2", to_json(s.a2)}};
}

inline ProblemSpec spec_from(const json& j) {
  if (!j.is_object()) throw input_error("io", "spec must be a JSON object");
  ProblemSpec s;
  s.a = real_from(j, "a");
  if (!(s.a > 0.0 && s.a < 1.0)) throw input_error("io", "a must lie in (0, 1)");
  s.q1 = grid_from(field(j, "q1"), s.a, "q1");
  s.q2 = grid_from(field(j, "q2"), 1.0 - s.a, "q2");
  s.h = complex_from(field(j, "h"), "h");
  s.H = robin_from(field(j, "H"));
  s.a1 = real_from(j, "a1");
  s.a2 = complex_from(field(j, "a2"), "a2");
  s.validate();
  return s;
}

inline json to_json(const KnownData& k) {
  return {{"a", k.a}, {"q2", to_json(k.q2)}, {"H", robin_to_json(k.H)}, {"a1", k.a1}, {"a2", to_json(k.a2)},
          {"omega1", to_json(k.omega1)}};
}

inline KnownData known_from(const json& j) {
  if (!j.is_object()) throw input_error("io", "known data must be a JSON object");
  KnownData k;
  k.a = real_from(j, "a");
  if (!(k.a > 0.0 && k.a < 1.0)) throw input_error("io", "a must lie in (0, 1)");
  k.q2 = grid_from(field(j, "q2"), 1.0 - k.a, "q2");
  k.H = robin_from(field(j, "H"));
  k.a1 = real_from(j, "a1");
  if (!(k.a1 > 0.0)) throw input_error("io", "a1 must be positive");
  k.a2 = complex_from(field(j, "a2"), "a2");
  k.omega1 = complex_from(field(j, "omega1"), "omega1");
  return k;
}

inline json to_json(const CauchyData& c) {
  return {{"a", c.a()}, {"omega1", to_json(c.omega1)}, {"K1", to_json(c.K1)}, {"K2", to_json(c.K2)}};
}

inline CauchyData cauchy_from(const json& j) {
  const double a = real_from(j, "a");
  CauchyData c{grid_from(field(j, "K1"), a, "K1"), grid_from(field(j, "K2"), a, "K2"),
               complex_from(field(j, "omega1"), "omega1")};
  c.validate();
  return c;
}

inline json to_json(const ReconstructionResult& r) {
  json clusters = json::array();
  for (const auto& c : r.cluster_report) {
    json m = json::array();
    for (cd z : c.matched) m.push_back(to_json(z));
    clusters.push_back({{"i", c.i}, {"reference", to_json(c.reference)}, {"matched", m}});
  }
  return {{"q1", to_json(r.q1)},
          {"h", to_json(r.h)},
          {"residual_norm", r.residual_norm},
          {"gram_condition", r.gram_condition},
          {"effective_rank", r.effective_rank},
          {"rows", r.rows},
          {"trial_modes", r.trial_modes},
          {"cauchy", to_json(r.cauchy)},
          {"cluster_report", clusters},
          {"warnings", r.warnings}};
}

// ---------------------------------------------------------------------------
// Spectra as CSV: index,i,re_lambda,im_lambda,multiplicity

inline std::string spectrum_csv(const Subspectrum& s) {
  std::string out = "index,i,re_lambda,im_lambda,multiplicity\n";
  char buf[160];
  int n = 0;
  for (const auto& p : s.points) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%d\n", n, s.i, p.lambda.real() + 0.0, p.lambda.imag() + 0.0,
                  p.multiplicity);
    out += buf;
    n += p.multiplicity;
  }
  return out;
}

inline Subspectrum spectrum_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,i,re_lambda,im_lambda,multiplicity", 0) != 0)
    throw input_error("io", "spectrum CSV needs the header index,i,re_lambda,im_lambda,multiplicity");
  Subspectrum s;
  bool tagged = false;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    int idx = 0, i = 0, m = 0;
    double re = 0, im = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%d", &idx, &i, &re, &im, &m) != 5)
      throw input_error("io", "malformed spectrum CSV line " + std::to_string(lineno));
    if (i != 0 && i != 1) throw input_error("io", "boundary tag must be 0 or 1 (line " + std::to_string(lineno) + ")");
    if (m < 1) throw input_error("io", "multiplicity must be >= 1 (line " + std::to_string(lineno) + ")");
    if (tagged && i != s.i) throw input_error("io", "mixed boundary tags in one spectrum file");
    s.i = i;
    tagged = true;
    s.points.push_back({cd(re, im), m, i});
  }
  return s;
}

// ---------------------------------------------------------------------------

inline json to_json(const StabilityReport& r) {
  json eps = json::array();
  for (const auto& s : r.per_epsilon)
    eps.push_back({{"epsilon", s.epsilon},
                   {"samples", s.samples},
                   {"failures", s.failures},
                   {"median_q1_error", s.median_q1_error},
                   {"median_h_error", s.median_h_error},
                   {"max_q1_error", s.max_q1_error},
                   {"median_size", s.median_size},
                   {"median_ratio", s.median_ratio}});
  return {{"family", to_string(r.family)},
          {"per_epsilon", eps},
          {"baseline_q1_error", r.baseline_q1_error},
          {"baseline_h_error", r.baseline_h_error},
          {"exponent", r.exponent},
          {"constant", r.constant},
          {"ratio_spread", r.ratio_spread},
          {"monotone", r.monotone},
          {"failures", r.failures},
          {"breakdown_epsilon", r.breakdown_epsilon},
          {"failure_messages", r.failure_messages}};
}

/// {"spec": {...}, "I0": [...], "I1": [...], "epsilons": [...], "samples": n, "seed": n,
///  "family": "...", "modes": n, "reg": x, "q2_terms": n, "threads": n, "q2_direction": [...]}
inline ExperimentConfig config_from(const json& j) {
  if (!j.is_object()) throw input_error("io", "config must be a JSON object");
  ExperimentConfig c;
  c.spec = spec_from(field(j, "spec"));
  auto ints = [&](const char* key) {
    std::vector<int> v;
    if (!j.contains(key)) return v;
    if (!j[key].is_array()) throw input_error("io", std::string(key) + " must be an array of indices");
    for (const auto& e : j[key]) {
      if (!e.is_number_integer()) throw input_error("io", std::string(key) + " must hold integers");
      v.push_back(e.get<int>());
    }
    return v;
  };
  c.indices0 = ints("I0");
  c.indices1 = ints("I1");
  if (j.contains("epsilons")) {
    c.epsilons.clear();
    for (const auto& e : j["epsilons"]) {
      if (!e.is_number()) throw input_error("io", "epsilons must be numbers");
      c.epsilons.push_back(e.get<double>());
    }
  }
  if (j.contains("samples")) c.samples = j["samples"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("family")) c.family = parse_family(j["family"].get<std::string>());
  if (j.contains("modes")) c.invert.modes = j["modes"].get<int>();
  if (j.contains("reg")) c.invert.reg = j["reg"].get<double>();
  if (j.contains("q2_terms")) c.q2_terms = j["q2_terms"].get<int>();
  if (j.contains("threads")) c.threads = j["threads"].get<int>();
  if (j.contains("q2_direction")) c.q2_direction = grid_from(j["q2_direction"], 1.0 - c.spec.a, "q2_direction");
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Checker records

struct CheckRecord {
  std::string check;
  json params;
  double statistic = 0.0;
  bool pass = false;
};

inline json to_json(const CheckRecord& r) {
  return {{"check", r.check}, {"params", r.params}, {"statistic", r.statistic}, {"pass", r.pass}};
}

// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw input_error("io", "cannot read '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

inline json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw input_error("io", "malformed JSON in '" + path + "': " + e.what());
  }
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw input_error("io", "cannot write '" + path + "'");
  f << text;
}

}  // namespace slinv::io
