#pragma once

// Modified exponential series  sum_{k>=N} (alpha t)^k / k! R(k),  Kummer's
// function M(a, b, s) and Gamma-function ratios, evaluated in the log domain.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nldecay/error.hpp"
#include "nldecay/regvar.hpp"

namespace nldecay {

struct SeriesSpec {
  double alpha = 1.0;
  long start = 0;
  RegVarying R;
  double tail_tolerance = 1e-12;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ArgumentError("series: alpha must be positive");
    if (start < 0) throw ArgumentError("series: start index N must be non-negative");
    if (R.index < 0.0 && start < 1)
      throw ArgumentError("series: start index N must be >= 1 for negative index");
    if (static_cast<double>(start) < R.domain_start())
      throw ArgumentError("series: start index N lies below the domain start of R");
    if (!(tail_tolerance > 0.0 && tail_tolerance <= 1e-3))
      throw ArgumentError("series: tail_tolerance must lie in (0, 1e-3]");
  }
};

namespace detail {

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// ln P(Poisson(lambda) >= k) upper bound (Chernoff) for k > lambda.
inline double log_poisson_upper_tail(double lambda, double k) {
  if (k <= lambda) return 0.0;
  const double x = k / lambda;
  return -lambda * (x * std::log(x) - x + 1.0);
}

/// ln of Poisson(lambda) weights on [lo, hi]: the mode weight comes from the
/// regularized incomplete-gamma derivative (no cancellation between m ln lambda,
/// lambda and ln m!), the rest from a log recurrence outwards.
inline std::vector<double> log_poisson_weights(double lambda, long lo, long hi) {
  std::vector<double> lw(static_cast<std::size_t>(hi - lo + 1));
  const double ll = std::log(lambda);
  const long mode = std::clamp(static_cast<long>(std::floor(lambda)), lo, hi);
  const auto at = [lo](long k) { return static_cast<std::size_t>(k - lo); };
  const double md = static_cast<double>(mode);
  const double pm = boost::math::gamma_p_derivative(md + 1.0, lambda);
  lw[at(mode)] = pm > 0.0 ? std::log(pm) : md * ll - lambda - std::lgamma(md + 1.0);
  for (long k = mode; k < hi; ++k) lw[at(k + 1)] = lw[at(k)] + ll - std::log(static_cast<double>(k + 1));
  for (long k = mode; k > lo; --k) lw[at(k - 1)] = lw[at(k)] - ll + std::log(static_cast<double>(k));
  return lw;
}

}  // namespace detail

/// Cutoff K_max = ceil(lambda + c sqrt(lambda ln(1/tol))) used by the series sums.
inline long poisson_cutoff(double lambda, double tol, double c, long start) {
  const double spread = c * std::sqrt(std::max(lambda, 1.0) * std::log(1.0 / tol));
  return std::max(static_cast<long>(std::ceil(lambda + spread)), start + static_cast<long>(std::ceil(spread))) + 1;
}

/// ln( e^{-alpha t} sum_{k>=N} (alpha t)^k/k! R(k) ).
inline double poisson_weighted_sum(const SeriesSpec& spec, double t) {
  spec.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw ArgumentError("series: t must be positive");
  const double lambda = spec.alpha * t;
  const double log_tol = std::log(spec.tail_tolerance);
  for (double c = 6.0; c <= 40.0; c += 2.0) {
    const long kmax = poisson_cutoff(lambda, spec.tail_tolerance, c, spec.start);
    auto terms = detail::log_poisson_weights(lambda, spec.start, kmax);
    for (long k = spec.start; k <= kmax; ++k)
      terms[static_cast<std::size_t>(k - spec.start)] += spec.R.log_eval(static_cast<double>(k));
    const double log_sum = detail::log_sum_exp(terms);
    if (std::isnan(log_sum)) throw NumericalGuard("series: NaN in log-domain sum");
    double log_sup_r = -std::numeric_limits<double>::infinity();
    for (double f : {1.0, 1.5, 2.0})
      log_sup_r = std::max(log_sup_r, spec.R.log_eval(f * static_cast<double>(kmax)));
    const double log_tail = detail::log_poisson_upper_tail(lambda, static_cast<double>(kmax)) + log_sup_r;
    if (log_tail <= log_tol + log_sum) return log_sum;
  }
  throw NumericalGuard("series: Poisson tail bound not met for any cutoff");
}

/// ln M(a, b, s) for b > a > 0, s >= 0.
inline double log_kummer_M(double a, double b, double s) {
  if (!(a > 0.0) || !(b > a)) throw ArgumentError("kummer_M: requires b > a > 0");
  if (!(s >= 0.0) || !std::isfinite(s)) throw ArgumentError("kummer_M: requires finite s >= 0");
  if (s == 0.0) return 0.0;
  if (s <= 700.0) {
    double sum = 1.0, term = 1.0;
    for (long k = 0;; ++k) {
      const double kd = static_cast<double>(k);
      term *= (a + kd) / (b + kd) * s / (kd + 1.0);
      sum += term;
      if (term < 1e-15 * sum && kd + 1.0 > s) break;
    }
    return std::log(sum);
  }
  std::vector<double> logs{0.0};
  double lt = 0.0, peak = 0.0;
  const double ls = std::log(s);
  for (long k = 0;; ++k) {
    const double kd = static_cast<double>(k);
    lt += std::log1p((a - b) / (b + kd)) + ls - std::log(kd + 1.0);
    logs.push_back(lt);
    peak = std::max(peak, lt);
    if (kd + 1.0 > s && lt - peak < std::log(1e-17)) break;
  }
  return detail::log_sum_exp(logs);
}

inline double kummer_M(double a, double b, double s) {
  const double v = std::exp(log_kummer_M(a, b, s));
  if (!std::isfinite(v)) throw EvaluationError("kummer_M: value overflows; use log_kummer_M");
  return v;
}

struct GammaRatio {
  double exact;
  double approx;
};

/// Gamma(s+a)/Gamma(s+b) exactly and via s^{a-b}(1 + (a-b)(a+b-1)/(2s)).
inline GammaRatio gamma_ratio_expansion(double s, double a, double b) {
  if (!(s > 0.0)) throw ArgumentError("gamma_ratio: s must be positive");
  if (!(s + std::min(a, b) > 0.0))
    throw ArgumentError("gamma_ratio: s + min(a, b) must be positive (Gamma pole or sign change)");
  if (a == b) return {1.0, 1.0};
  const double exact = std::exp(std::lgamma(s + a) - std::lgamma(s + b));
  const double approx = std::pow(s, a - b) * (1.0 + (a - b) * (a + b - 1.0) / (2.0 * s));
  return {exact, approx};
}

enum class SeriesVerdict { Bounded, Unbounded, Inconclusive };

inline const char* to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::Bounded: return "bounded";
    case SeriesVerdict::Unbounded: return "unbounded";
    case SeriesVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct AsymptoticRatio {
  std::vector<double> t_grid;
  std::vector<double> ratios;
  std::vector<double> decade_spreads;  // max/min per decade, oldest first
  double top_decade_spread = 0.0;      // max/min over [t_max/10, t_max]
  SeriesVerdict verdict = SeriesVerdict::Inconclusive;
};

namespace detail {
inline double spread(const std::vector<double>& t, const std::vector<double>& r, double lo, double hi) {
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < lo * (1 - 1e-12) || t[i] > hi * (1 + 1e-12)) continue;
    mn = std::min(mn, r[i]);
    mx = std::max(mx, r[i]);
  }
  return mx / mn;
}
}  // namespace detail

/// Ratios (series)/(R(alpha t) e^{alpha t}) on t_grid with a stabilization verdict.
inline AsymptoticRatio verify_series_asymptotics(const SeriesSpec& spec, const std::vector<double>& t_grid) {
  spec.validate();
  if (t_grid.size() < 2) throw ArgumentError("series: t grid needs at least two points");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw ArgumentError("series: t grid must be increasing");
  const double t0 = t_grid.front(), t1 = t_grid.back();
  if (!(t0 > 0.0)) throw ArgumentError("series: t grid must be positive");
  if (t1 / t0 < 100.0 * (1.0 - 1e-12)) throw ArgumentError("series: t grid must span two decades");
  if (spec.alpha * t0 < spec.R.domain_start())
    throw DomainError("series: R(alpha t) undefined at the first grid point");

  AsymptoticRatio out;
  out.t_grid = t_grid;
  for (double t : t_grid)
    out.ratios.push_back(std::exp(poisson_weighted_sum(spec, t) - spec.R.log_eval(spec.alpha * t)));

  for (double r : out.ratios) {
    if (!std::isfinite(r) || r <= 0.0) {
      out.verdict = SeriesVerdict::Inconclusive;
      return out;
    }
  }
  const auto decades = static_cast<int>(std::floor(std::log10(t1 / t0) + 1e-9));
  for (int j = 0; j < decades; ++j)
    out.decade_spreads.push_back(
        detail::spread(t_grid, out.ratios, t0 * std::pow(10.0, j), t0 * std::pow(10.0, j + 1)));
  out.top_decade_spread = detail::spread(t_grid, out.ratios, t1 / 10.0, t1);

  bool contracting = true, expanding = true;
  for (std::size_t j = 1; j < out.decade_spreads.size(); ++j) {
    const double prev = out.decade_spreads[j - 1] - 1.0, cur = out.decade_spreads[j] - 1.0;
    contracting = contracting && cur <= prev + 1e-9;
    expanding = expanding && cur > prev + 1e-9;
  }
  if (out.top_decade_spread <= 10.0 && contracting)
    out.verdict = SeriesVerdict::Bounded;
  else if (out.top_decade_spread > 10.0 || expanding)
    out.verdict = SeriesVerdict::Unbounded;
  else
    out.verdict = SeriesVerdict::Inconclusive;
  return out;
}

}  // namespace nldecay
