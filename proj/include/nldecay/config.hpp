#pragma once

// Experiment configuration: a JSON document with strict field checking and
// a lossless round trip.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nldecay/decayfit.hpp"
#include "nldecay/io.hpp"
#include "nldecay/kernels.hpp"
#include "nldecay/xseries.hpp"

namespace nldecay {

struct SeriesRun {
  SeriesSpec spec;
  double t_lo = 1e2, t_hi = 1e4;
  double ratio = 1.2589254117941673;  // 10^{1/10}
};

struct KernelRun {
  long k_lo = 1, k_hi = 1024;
  long slope_lo = 64, slope_hi = 1024;
  double gamma_probe = 1.0;
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  std::optional<SeriesRun> series;
  KernelRun kernel_run;
  std::string output = "out";
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig parse(const std::string& text);

  /// FNV-1a 64 of the canonical (sorted-key, compact) JSON form.
  std::string hash() const { return hex64(fnv1a64(to_json().dump())); }
};

namespace detail {

inline const char* to_string(InitialKind k) {
  switch (k) {
    case InitialKind::Gaussian: return "gaussian";
    case InitialKind::Box: return "box";
    case InitialKind::Spike: return "spike";
  }
  return "?";
}

inline InitialKind initial_kind(const std::string& s) {
  if (s == "gaussian") return InitialKind::Gaussian;
  if (s == "box") return InitialKind::Box;
  if (s == "spike") return InitialKind::Spike;
  throw ArgumentError("u0.kind must be one of gaussian, box, spike (got '" + s + "')");
}

inline long json_integer(const nlohmann::json& j, const std::string& key, const std::string& where) {
  const double v = json_number(j, key, where);
  if (v != std::floor(v)) throw ArgumentError(where + ": field '" + key + "' must be an integer");
  return static_cast<long>(v);
}

inline std::string json_string(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) throw ArgumentError(where + ": field '" + key + "' must be a string");
  return j[key].get<std::string>();
}

inline std::pair<double, double> json_pair(const nlohmann::json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ArgumentError(where + ": field '" + key + "' must be a pair of numbers");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace detail

inline nlohmann::json ExperimentConfig::to_json() const {
  const auto& s = scenario;
  nlohmann::json norms = nlohmann::json::array();
  for (Norm p : s.norms) norms.push_back(nldecay::to_string(p));
  nlohmann::json j{
      {"scenario", nldecay::to_string(s.source)},
      {"name", s.name},
      {"kernel", s.kernel.to_json()},
      {"u0", {{"kind", detail::to_string(s.u0.kind)}, {"width", s.u0.width}}},
      {"chi0", s.chi0},
      {"time", {{"t_lo", s.t_lo}, {"t_hi", s.t_hi}}},
      {"norms", norms},
      {"window", {s.window_lo, s.window_hi}},
      {"tolerance", s.tolerance},
      {"ratio_cap", s.ratio_cap},
      {"remainder_terms", s.remainder_terms},
      {"abstract",
       {{"beta", s.abstract.beta},
        {"L", s.abstract.L.to_json()},
        {"N", s.abstract.N},
        {"k_hi", s.abstract.k_hi},
        {"margin", s.abstract.margin}}},
      {"kernel_run",
       {{"k_lo", kernel_run.k_lo},
        {"k_hi", kernel_run.k_hi},
        {"slope_lo", kernel_run.slope_lo},
        {"slope_hi", kernel_run.slope_hi},
        {"gamma_probe", kernel_run.gamma_probe}}},
      {"output", output},
      {"seed", seed}};
  if (series) {
    j["series"] = {{"alpha", series->spec.alpha},
                   {"start", series->spec.start},
                   {"R", series->spec.R.to_json()},
                   {"tail_tolerance", series->spec.tail_tolerance},
                   {"t_lo", series->t_lo},
                   {"t_hi", series->t_hi},
                   {"ratio", series->ratio}};
  }
  return j;
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("config: top level must be an object");
  detail::reject_unknown(j,
                         {"scenario", "name", "kernel", "u0", "chi0", "time", "norms", "window", "tolerance",
                          "ratio_cap", "remainder_terms", "abstract", "kernel_run", "output", "seed", "series"},
                         "config");
  ExperimentConfig c;
  auto& s = c.scenario;
  if (j.contains("scenario")) s.source = theorem_from_string(detail::json_string(j, "scenario", "config"));
  if (j.contains("name")) s.name = detail::json_string(j, "name", "config");
  if (j.contains("kernel")) s.kernel = KernelDescriptor::from_json(j["kernel"]);
  if (j.contains("u0")) {
    const auto& u = j["u0"];
    detail::reject_unknown(u, {"kind", "width"}, "config.u0");
    if (u.contains("kind")) s.u0.kind = detail::initial_kind(detail::json_string(u, "kind", "config.u0"));
    if (u.contains("width")) s.u0.width = detail::json_number(u, "width", "config.u0");
    if (!(s.u0.width > 0.0)) throw ArgumentError("config.u0: field 'width' must be positive");
  }
  if (j.contains("chi0")) {
    s.chi0 = detail::json_number(j, "chi0", "config");
    if (!(s.chi0 > 0.0)) throw ArgumentError("config: field 'chi0' must be positive");
  }
  if (j.contains("time")) {
    const auto& t = j["time"];
    detail::reject_unknown(t, {"t_lo", "t_hi"}, "config.time");
    if (t.contains("t_lo")) s.t_lo = detail::json_number(t, "t_lo", "config.time");
    if (t.contains("t_hi")) s.t_hi = detail::json_number(t, "t_hi", "config.time");
    if (!(s.t_lo > 0.0 && s.t_hi >= s.t_lo)) throw ArgumentError("config.time: need 0 < t_lo <= t_hi");
  }
  if (j.contains("norms")) {
    if (!j["norms"].is_array()) throw ArgumentError("config: field 'norms' must be an array");
    s.norms.clear();
    for (const auto& p : j["norms"]) {
      if (!p.is_string()) throw ArgumentError("config: field 'norms' must hold strings");
      s.norms.push_back(norm_from_string(p.get<std::string>()));
    }
  }
  if (j.contains("window")) std::tie(s.window_lo, s.window_hi) = detail::json_pair(j, "window", "config");
  if (j.contains("tolerance")) s.tolerance = detail::json_number(j, "tolerance", "config");
  if (j.contains("ratio_cap")) s.ratio_cap = detail::json_number(j, "ratio_cap", "config");
  if (j.contains("remainder_terms")) s.remainder_terms = detail::json_integer(j, "remainder_terms", "config");
  if (j.contains("abstract")) {
    const auto& a = j["abstract"];
    const std::string w = "config.abstract";
    detail::reject_unknown(a, {"beta", "L", "N", "k_hi", "margin"}, w);
    if (a.contains("beta")) s.abstract.beta = detail::json_number(a, "beta", w);
    if (a.contains("L")) s.abstract.L = SlowVarying::from_json(a["L"]);
    if (a.contains("N")) s.abstract.N = detail::json_integer(a, "N", w);
    if (a.contains("k_hi")) s.abstract.k_hi = detail::json_integer(a, "k_hi", w);
    if (a.contains("margin")) s.abstract.margin = detail::json_number(a, "margin", w);
  }
  if (j.contains("kernel_run")) {
    const auto& k = j["kernel_run"];
    const std::string w = "config.kernel_run";
    detail::reject_unknown(k, {"k_lo", "k_hi", "slope_lo", "slope_hi", "gamma_probe"}, w);
    auto& r = c.kernel_run;
    if (k.contains("k_lo")) r.k_lo = detail::json_integer(k, "k_lo", w);
    if (k.contains("k_hi")) r.k_hi = detail::json_integer(k, "k_hi", w);
    if (k.contains("slope_lo")) r.slope_lo = detail::json_integer(k, "slope_lo", w);
    if (k.contains("slope_hi")) r.slope_hi = detail::json_integer(k, "slope_hi", w);
    if (k.contains("gamma_probe")) r.gamma_probe = detail::json_number(k, "gamma_probe", w);
    if (r.k_lo < 1 || r.k_hi < r.k_lo) throw ArgumentError(w + ": need 1 <= k_lo <= k_hi");
  }
  if (j.contains("output")) c.output = detail::json_string(j, "output", "config");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ArgumentError("config: field 'seed' must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("series")) {
    const auto& sr = j["series"];
    const std::string w = "config.series";
    detail::reject_unknown(sr, {"alpha", "start", "R", "tail_tolerance", "t_lo", "t_hi", "ratio"}, w);
    SeriesRun run;
    if (sr.contains("alpha")) run.spec.alpha = detail::json_number(sr, "alpha", w);
    if (sr.contains("start")) run.spec.start = detail::json_integer(sr, "start", w);
    if (sr.contains("R")) run.spec.R = RegVarying::from_json(sr["R"]);
    if (sr.contains("tail_tolerance")) run.spec.tail_tolerance = detail::json_number(sr, "tail_tolerance", w);
    if (sr.contains("t_lo")) run.t_lo = detail::json_number(sr, "t_lo", w);
    if (sr.contains("t_hi")) run.t_hi = detail::json_number(sr, "t_hi", w);
    if (sr.contains("ratio")) run.ratio = detail::json_number(sr, "ratio", w);
    if (!(run.spec.alpha > 0.0)) throw ArgumentError(w + ": field 'alpha' must be positive");
    if (!(run.ratio > 1.0)) throw ArgumentError(w + ": field 'ratio' must exceed 1");
    c.series = run;
  }
  return c;
}

inline ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError(std::string("config: not valid JSON: ") + e.what());
  }
  return from_json(j);
}

}  // namespace nldecay
