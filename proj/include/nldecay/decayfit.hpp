#pragma once

// Decay-exponent fits of norm-vs-time data, hypothesis checks on convolution
// powers, and end-to-end decay scenarios.

#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "nldecay/error.hpp"
#include "nldecay/kernels.hpp"
#include "nldecay/regvar.hpp"
#include "nldecay/solver.hpp"

namespace nldecay {

enum class TheoremId { Thm4_3, Cor5_2, Thm5_4, Sec6, H1H2_abstract };

inline const char* to_string(TheoremId s) {
  switch (s) {
    case TheoremId::Thm4_3: return "Thm4_3";
    case TheoremId::Cor5_2: return "Cor5_2";
    case TheoremId::Thm5_4: return "Thm5_4";
    case TheoremId::Sec6: return "Sec6";
    case TheoremId::H1H2_abstract: return "H1H2_abstract";
  }
  return "?";
}

inline TheoremId theorem_from_string(const std::string& s) {
  for (auto t : {TheoremId::Thm4_3, TheoremId::Cor5_2, TheoremId::Thm5_4, TheoremId::Sec6, TheoremId::H1H2_abstract})
    if (s == to_string(t)) return t;
  throw ArgumentError("unknown scenario '" + s + "'");
}

/// Predicted rate t^{-beta} L(t)^{log_power}.
struct DecayTarget {
  double beta_expected = 0.0;
  std::optional<SlowVarying> L_correction;
  double log_power = 0.0;
  Norm p = Norm::Inf;
  TheoremId source = TheoremId::Thm4_3;

  double log_rate(double t) const {
    double v = -beta_expected * std::log(t);
    if (L_correction && log_power != 0.0) v += log_power * L_correction->log_eval(t);
    return v;
  }
};

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct DecayReport {
  std::string scenario;
  TheoremId source = TheoremId::Thm4_3;
  Norm p = Norm::Inf;
  double beta_expected = 0.0;
  double fitted_exponent = 0.0;
  double exponent_stderr = 0.0;
  std::vector<double> times;
  std::vector<double> norms;
  std::vector<double> compensated_ratios;
  double ratio_spread = 1.0;
  Verdict verdict = Verdict::Inconclusive;
  double t_lo = 0.0, t_hi = 0.0;
  std::optional<double> t_flat;
  std::vector<std::string> notes;

  nlohmann::json to_json() const {
    nlohmann::json j{{"scenario", scenario},
                     {"source", to_string(source)},
                     {"p", to_string(p)},
                     {"beta_expected", beta_expected},
                     {"fitted_exponent", fitted_exponent},
                     {"exponent_stderr", exponent_stderr},
                     {"ratio_spread", ratio_spread},
                     {"verdict", to_string(verdict)},
                     {"window", {t_lo, t_hi}},
                     {"notes", notes}};
    if (t_flat) j["t_flat"] = *t_flat;
    return j;
  }
};

struct LineFit {
  double intercept, slope, slope_stderr;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("line fit: abscissae are all equal");
  const double b = sxy / sxx, a = my - b * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - a - b * x[i];
    ssr += r * r;
  }
  const double se = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  return {a, b, se};
}

/// Fit ln(norm) - log_power ln L(t) against ln t over the window and judge it against the target.
inline DecayReport fit_decay(const std::vector<double>& t, const std::vector<double>& norm, const DecayTarget& target,
                             double t_lo, double t_hi, double tolerance = 0.05, double ratio_cap = 2.0) {
  if (t.size() != norm.size()) throw ArgumentError("fit_decay: time and norm columns differ in length");
  if (!(tolerance > 0.0)) throw ArgumentError("fit_decay: tolerance must be positive");
  if (!(ratio_cap >= 1.0)) throw ArgumentError("fit_decay: ratio_cap must be >= 1");
  if (!(t_lo > 0.0 && t_hi > t_lo)) throw ArgumentError("fit_decay: window must satisfy 0 < t_lo < t_hi");
  DecayReport r;
  r.source = target.source;
  r.p = target.p;
  r.beta_expected = target.beta_expected;
  r.t_lo = t_lo;
  r.t_hi = t_hi;
  const double slack = 1e-9;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo * (1.0 - slack) || t[i] > t_hi * (1.0 + slack)) continue;
    if (!(norm[i] > 0.0) || !std::isfinite(norm[i]))
      throw DataError("fit_decay: non-positive or non-finite norm at t = " + std::to_string(t[i]));
    r.times.push_back(t[i]);
    r.norms.push_back(norm[i]);
  }
  if (r.times.size() < 12)
    throw ArgumentError("fit_decay: window holds " + std::to_string(r.times.size()) + " samples, need >= 12");
  const auto [tmin, tmax] = std::minmax_element(r.times.begin(), r.times.end());
  if (std::log10(*tmax / *tmin) < 1.5 - 1e-9) throw ArgumentError("fit_decay: window spans fewer than 1.5 decades");

  std::vector<double> x, y;
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const double lt = std::log(r.times[i]);
    double ly = std::log(r.norms[i]);
    if (target.L_correction && target.log_power != 0.0) ly -= target.log_power * target.L_correction->log_eval(r.times[i]);
    x.push_back(lt);
    y.push_back(ly);
    r.compensated_ratios.push_back(std::exp(std::log(r.norms[i]) - target.log_rate(r.times[i])));
  }
  const auto fit = least_squares_line(x, y);
  r.fitted_exponent = fit.slope;
  r.exponent_stderr = fit.slope_stderr;
  const auto [cmin, cmax] = std::minmax_element(r.compensated_ratios.begin(), r.compensated_ratios.end());
  r.ratio_spread = *cmax / *cmin;
  const bool slope_ok = std::abs(fit.slope + target.beta_expected) <= tolerance;
  if (slope_ok && r.ratio_spread <= ratio_cap)
    r.verdict = Verdict::Pass;
  else if (fit.slope_stderr > tolerance)
    r.verdict = Verdict::Inconclusive;
  else
    r.verdict = Verdict::Fail;
  return r;
}

/// +1 strictly increasing, -1 strictly decreasing, 0 otherwise.
inline int monotone_direction(const std::vector<double>& v) {
  bool inc = v.size() > 1, dec = v.size() > 1;
  for (std::size_t i = 1; i < v.size(); ++i) {
    inc = inc && v[i] > v[i - 1];
    dec = dec && v[i] < v[i - 1];
  }
  return inc ? 1 : (dec ? -1 : 0);
}

struct HypothesisReport {
  bool holds = true;
  std::optional<long> first_violation;
  std::vector<long> k;
  std::vector<double> measured;
  std::vector<double> bound;
  double worst_ratio = 0.0;  // max measured / bound
};

namespace detail {

inline void check_k_range(const GridKernel& J, long N, long k_lo, long k_hi) {
  if (N < 1) throw ArgumentError("hypothesis check: N must be >= 1");
  if (k_lo < N || k_hi < k_lo) throw ArgumentError("hypothesis check: k range must satisfy N <= k_lo <= k_hi");
  const long km = k_max(J, k_hi);
  if (k_hi > km)
    throw PeriodizationError("hypothesis check: k_hi = " + std::to_string(k_hi) + " exceeds k_max = " +
                                 std::to_string(km),
                             static_cast<int>(k_hi), 0.0);
}

template <class Measure>
HypothesisReport run_hypothesis(const GridKernel& J, std::span<const Complex> base, const RegVarying& R, long k_lo,
                                long k_hi, Measure&& measure) {
  HypothesisReport rep;
  Transform tr(J.grid());
  const auto sym = J.symbol();
  std::vector<Complex> cur(base.begin(), base.end());
  for (std::size_t i = 0; i < cur.size(); ++i) cur[i] *= ipow(sym[i], k_lo);
  for (long k = k_lo;; ++k) {
    const double m = measure(tr.from_symbol(cur));
    const double b = R.eval(static_cast<double>(k));
    rep.k.push_back(k);
    rep.measured.push_back(m);
    rep.bound.push_back(b);
    rep.worst_ratio = std::max(rep.worst_ratio, m / b);
    if (m > b && rep.holds) {
      rep.holds = false;
      rep.first_violation = k;
    }
    if (k == k_hi) break;
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] *= sym[i];
  }
  return rep;
}

}  // namespace detail

/// sup |J_k| <= R(k) for every k in [k_lo, k_hi].
inline HypothesisReport hypothesis_H1_check(const GridKernel& J, const RegVarying& R, long N, long k_lo, long k_hi) {
  detail::check_k_range(J, N, k_lo, k_hi);
  std::vector<Complex> one(J.symbol().size(), Complex(1.0, 0.0));
  const Grid g = J.grid();
  return detail::run_hypothesis(J, one, R, k_lo, k_hi,
                                [&](const std::vector<double>& v) { return lp_norm(g, v, 0); });
}

/// ||J^k u0||_p <= R(k) for every k in [k_lo, k_hi].
inline HypothesisReport hypothesis_H2_check(const GridKernel& J, const InitialData& u0, const RegVarying& R, long N,
                                            Norm p, long k_lo, long k_hi) {
  detail::require_same_grid(J, u0);
  detail::check_k_range(J, N, k_lo, k_hi);
  Transform tr(J.grid());
  const auto u0_hat = tr.to_symbol(u0.samples());
  const Grid g = J.grid();
  return detail::run_hypothesis(J, u0_hat, R, k_lo, k_hi,
                                [&](const std::vector<double>& v) { return grid_norm(g, v, p); });
}

enum class InitialKind { Gaussian, Box, Spike };

struct InitialSpec {
  InitialKind kind = InitialKind::Gaussian;
  double width = 1.0;

  InitialData build(const Grid& g) const {
    switch (kind) {
      case InitialKind::Gaussian: return InitialData::gaussian(g, width);
      case InitialKind::Box: return InitialData::box(g, width);
      case InitialKind::Spike: return InitialData::spike(g);
    }
    throw ArgumentError("initial data: unknown kind");
  }
};

/// Settings of the H2-driven abstract scenario: R(k) = margin * measured(N)/shape(N) * shape(k).
struct AbstractSpec {
  double beta = 0.5;
  SlowVarying L = SlowVarying::constant(1.0);
  long N = 32;
  long k_hi = 1024;
  double margin = 1.25;
};

struct ScenarioSpec {
  std::string name;
  TheoremId source = TheoremId::Thm4_3;
  KernelDescriptor kernel;
  InitialSpec u0;
  double chi0 = 1.0;
  double t_lo = 1.0, t_hi = 1e4;
  std::vector<Norm> norms{Norm::Inf};
  double window_lo = 1e2, window_hi = 1e4;
  double tolerance = 0.05;
  double ratio_cap = 2.0;
  long remainder_terms = 0;
  AbstractSpec abstract;
};

struct ScenarioResult {
  ScenarioSpec spec;
  std::vector<DecayReport> reports;
  std::vector<NormRow> rows;
  std::optional<HypothesisReport> h2;
  std::vector<std::string> advisories;
  double seconds = 0.0;

  Verdict verdict() const {
    bool inconclusive = false;
    for (const auto& r : reports) {
      if (r.verdict == Verdict::Fail) return Verdict::Fail;
      if (r.verdict == Verdict::Inconclusive) inconclusive = true;
    }
    return inconclusive ? Verdict::Inconclusive : Verdict::Pass;
  }
};

/// Decay target predicted for the scenario's kernel and norm.
inline DecayTarget theorem_target(const ScenarioSpec& s, Norm p) {
  const double n = s.kernel.grid.dim;
  const double q = exponent(p);
  const double hoelder = std::isinf(q) ? 1.0 : 1.0 - 1.0 / q;
  const auto& kp = s.kernel.params;
  DecayTarget t;
  t.p = p;
  t.source = s.source;
  auto need = [&](std::initializer_list<KernelFamily> ok) {
    for (auto f : ok)
      if (f == s.kernel.family) return;
    throw ArgumentError(std::string("scenario ") + to_string(s.source) + " does not apply to kernel family " +
                        to_string(s.kernel.family));
  };
  switch (s.source) {
    case TheoremId::Thm4_3:
      need({KernelFamily::Box, KernelFamily::Tent, KernelFamily::Gaussian});
      t.beta_expected = 0.5 * n * hoelder;
      break;
    case TheoremId::Cor5_2:
      need({KernelFamily::StableSymbol});
      t.beta_expected = n / kp.sigma * hoelder;
      break;
    case TheoremId::Thm5_4:
      need({KernelFamily::LogPerturbedSymbol});
      t.beta_expected = n / kp.sigma * hoelder;
      t.L_correction = SlowVarying::iter_log_power({kp.mu});
      t.log_power = -t.beta_expected;
      break;
    case TheoremId::Sec6:
      need({KernelFamily::PrescribedSymbol});
      t.beta_expected = n / kp.sigma * hoelder;
      t.L_correction = *kp.L;
      t.log_power = -t.beta_expected;
      break;
    case TheoremId::H1H2_abstract:
      t.beta_expected = s.abstract.beta;
      t.L_correction = s.abstract.L;
      t.log_power = 1.0;
      break;
  }
  return t;
}

/// Time beyond which the smallest nonzero grid frequency no longer decays: 1/(A xi_min^sigma).
inline std::optional<double> flattening_time(const KernelDescriptor& d) {
  const double xi = d.grid.frequency_spacing();
  const auto& p = d.params;
  switch (d.family) {
    case KernelFamily::Box: return 1.0 / (p.width * p.width / 24.0 * xi * xi);
    case KernelFamily::Tent: return 1.0 / (p.tent_radius * p.tent_radius / 12.0 * xi * xi);
    case KernelFamily::Gaussian: return 1.0 / (0.5 * p.variance * xi * xi);
    case KernelFamily::StableSymbol:
    case KernelFamily::LogPerturbedSymbol:
    case KernelFamily::PrescribedSymbol: return 1.0 / (p.A * std::pow(xi, p.sigma));
    case KernelFamily::PathologicalLogTail: return std::nullopt;
  }
  return std::nullopt;
}

/// Build the kernel and u0, evolve over the time grid and fit each requested norm against the predicted rate.
inline ScenarioResult run_theorem_suite(const ScenarioSpec& s) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult res;
  res.spec = s;
  if (s.norms.empty()) throw ArgumentError("scenario: empty norm set");
  const GridKernel J = make_kernel(s.kernel);
  res.advisories = J.advisories();
  const InitialData u0 = s.u0.build(s.kernel.grid);

  if (s.source == TheoremId::Sec6) {
    const auto& kp = s.kernel.params;
    if (!gamma_rule_holds(*kp.L, kp.sigma, kp.gamma))
      throw ArgumentError("prescribed-decay scenario: gamma must exceed sigma for eventually increasing L and equal sigma for "
                          "eventually decreasing L");
  }

  const auto times = quarter_octave_times(s.t_lo, s.t_hi);
  if (times.size() < 2) throw ArgumentError("scenario: time grid needs at least two points");

  if (s.source == TheoremId::H1H2_abstract) {
    const auto& a = s.abstract;
    const Norm p = s.norms.front();
    const RegVarying shape{-a.beta, a.L};
    Transform tr(J.grid());
    std::vector<Complex> cur = tr.to_symbol(u0.samples());
    const auto sym = J.symbol();
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] *= ipow(sym[i], a.N);
    const double measured_N = grid_norm(J.grid(), tr.from_symbol(cur), p);
    const double c = a.margin * measured_N / shape.eval(static_cast<double>(a.N));
    const RegVarying R{-a.beta, a.L.scaled(c)};
    res.h2 = hypothesis_H2_check(J, u0, R, a.N, p, a.N, a.k_hi);
  }

  std::vector<double> tt;
  std::map<Norm, std::vector<double>> series;
  if (s.remainder_terms > 0) {
    for (double t : times) {
      const auto snap = refined_remainder(J, u0, s.chi0, t, s.remainder_terms);
      tt.push_back(t);
      for (Norm p : s.norms) {
        series[p].push_back(snap.norms.at(p));
        res.rows.push_back({t, Method::Spectral, p, snap.norms.at(p)});
      }
    }
  } else {
    res.rows = track_norms(J, u0, s.chi0, times, s.norms);
    for (const auto& row : res.rows) {
      if (row.p == s.norms.front()) tt.push_back(row.t);
      series[row.p].push_back(row.norm);
    }
  }

  for (Norm p : s.norms) {
    const auto target = theorem_target(s, p);
    auto rep = fit_decay(tt, series[p], target, s.window_lo, s.window_hi, s.tolerance, s.ratio_cap);
    rep.scenario = s.name;
    rep.t_flat = flattening_time(s.kernel);
    if (rep.t_flat && *rep.t_flat < s.window_hi)
      rep.notes.push_back("fit window extends past the grid flattening time");
    if (res.h2) {
      rep.notes.push_back(std::string("H2 ") + (res.h2->holds ? "holds" : "fails") + " on [" +
                          std::to_string(s.abstract.N) + ", " + std::to_string(s.abstract.k_hi) + "]");
    }
    res.reports.push_back(std::move(rep));
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

/// Run scenarios on up to `workers` threads; results keep the input order.
inline std::vector<ScenarioResult> run_scenarios(const std::vector<ScenarioSpec>& specs, unsigned workers = 1) {
  std::vector<ScenarioResult> out(specs.size());
  std::vector<std::exception_ptr> err(specs.size());
  workers = std::max(1u, workers);
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < specs.size(); i += workers) {
      try {
        out[i] = run_theorem_suite(specs[i]);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace nldecay
