#pragma once

// Green operator u(t) = e^{-chi0 t} sum_k t^k/k! J^k u0 on a periodic grid,
// evaluated by spectral exponentiation and by the truncated series.

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "nldecay/error.hpp"
#include "nldecay/grid.hpp"
#include "nldecay/kernels.hpp"
#include "nldecay/xseries.hpp"

namespace nldecay {

enum class Norm { L1, L2, Inf };

inline const char* to_string(Norm p) {
  switch (p) {
    case Norm::L1: return "1";
    case Norm::L2: return "2";
    case Norm::Inf: return "inf";
  }
  return "?";
}

inline Norm norm_from_string(const std::string& s) {
  if (s == "1") return Norm::L1;
  if (s == "2") return Norm::L2;
  if (s == "inf") return Norm::Inf;
  throw ArgumentError("norm index must be one of 1, 2, inf (got '" + s + "')");
}

/// Lebesgue exponent of a norm index (infinity for Inf).
inline double exponent(Norm p) {
  switch (p) {
    case Norm::L1: return 1.0;
    case Norm::L2: return 2.0;
    case Norm::Inf: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

inline double grid_norm(const Grid& g, std::span<const double> f, Norm p) {
  return lp_norm(g, f, p == Norm::Inf ? 0 : (p == Norm::L1 ? 1 : 2));
}

/// Real initial datum on a kernel-compatible grid.
class InitialData {
 public:
  InitialData(const Grid& g, std::vector<double> samples) : grid_(g), u_(std::move(samples)) {
    g.validate();
    if (u_.size() != g.size()) throw ArgumentError("initial data: sample count does not match grid");
    l1_ = lp_norm(g, u_, 1);
    sup_ = lp_norm(g, u_, 0);
    Transform tr(g);
    const auto s = tr.to_symbol(u_);
    double acc = 0.0;
    for (const auto& v : s) acc += std::abs(v);
    fourier_l1_ = acc * std::pow(g.frequency_spacing(), g.dim);
    if (!std::isfinite(l1_) || !std::isfinite(sup_) || !std::isfinite(fourier_l1_))
      throw DataError("initial data: non-finite norms");
  }

  /// Unit-mass Gaussian with standard deviation `width`.
  static InitialData gaussian(const Grid& g, double width) {
    if (!(width > 0.0)) throw ArgumentError("initial data: width must be positive");
    const double v = width * width, c = std::pow(2.0 * std::numbers::pi * v, -0.5 * g.dim);
    return InitialData(g, detail::sample_nodes(g, [&](double x, double y) { return c * std::exp(-(x * x + y * y) / (2.0 * v)); }));
  }

  /// One-cell impulse of unit mass at the origin.
  static InitialData spike(const Grid& g) {
    std::vector<double> u(g.size(), 0.0);
    u[g.origin()] = 1.0 / g.cell_volume();
    return InitialData(g, std::move(u));
  }

  /// Unit-mass indicator of [-width/2, width/2]^n, cell-averaged.
  static InitialData box(const Grid& g, double width) {
    if (!(width > 0.0) || 0.5 * width >= g.half_width) throw ArgumentError("initial data: bad box width");
    const double h = g.spacing(), half = 0.5 * width;
    return InitialData(g, detail::sample_nodes(g, [&](double x, double y) {
      double v = detail::cell_overlap(x, h, half);
      if (g.dim == 2) v *= detail::cell_overlap(y, h, half);
      return v / std::pow(width, g.dim);
    }));
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> samples() const { return u_; }
  double l1_norm() const { return l1_; }
  double sup_norm() const { return sup_; }
  double fourier_l1() const { return fourier_l1_; }

 private:
  Grid grid_;
  std::vector<double> u_;
  double l1_ = 0.0, sup_ = 0.0, fourier_l1_ = 0.0;
};

enum class Method { Series, Spectral };

inline const char* to_string(Method m) { return m == Method::Series ? "series" : "spectral"; }

struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
  std::map<Norm, double> norms;
  Method method = Method::Spectral;
};

namespace detail {

inline void require_same_grid(const GridKernel& J, const InitialData& u0) {
  if (!(J.grid() == u0.grid())) throw ArgumentError("solver: kernel and initial data live on different grids");
}

inline void require_time(double chi0, double t) {
  if (!(chi0 > 0.0) || !std::isfinite(chi0)) throw ArgumentError("solver: chi0 must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ArgumentError("solver: t must be finite and non-negative");
}

inline Snapshot make_snapshot(const Grid& g, double t, std::vector<double> u, Method m) {
  Snapshot s{t, std::move(u), {}, m};
  for (Norm p : {Norm::L1, Norm::L2, Norm::Inf}) s.norms[p] = grid_norm(g, s.u, p);
  return s;
}

}  // namespace detail

/// Spectral evaluator holding u0's symbol so that each time costs one inverse transform.
class SpectralPropagator {
 public:
  SpectralPropagator(const GridKernel& J, const InitialData& u0, double chi0)
      : J_(J), u0_(u0), chi0_(chi0), tr_(J.grid()) {
    detail::require_same_grid(J, u0);
    detail::require_time(chi0, 0.0);
    u0_hat_ = tr_.to_symbol(u0.samples());
  }

  std::vector<double> field(double t) {
    detail::require_time(chi0_, t);
    if (t == 0.0) return {u0_.samples().begin(), u0_.samples().end()};
    const auto sym = J_.symbol();
    std::vector<Complex> s(sym.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp((sym[i] - chi0_) * t) * u0_hat_[i];
    auto u = tr_.from_symbol(s);
    for (double v : u)
      if (!std::isfinite(v)) throw NumericalGuard("solver: non-finite value in spectral solution");
    return u;
  }

  Snapshot at(double t) { return detail::make_snapshot(J_.grid(), t, field(t), Method::Spectral); }

 private:
  const GridKernel& J_;
  const InitialData& u0_;
  double chi0_;
  Transform tr_;
  std::vector<Complex> u0_hat_;
};

inline Snapshot solve_spectral(const GridKernel& J, const InitialData& u0, double chi0, double t) {
  detail::require_same_grid(J, u0);
  detail::require_time(chi0, t);
  SpectralPropagator prop(J, u0, chi0);
  return prop.at(t);
}

struct SeriesOptions {
  double tol = 1e-12;            // tail bound relative to ||u0||_inf
  double t_series_max = 200.0;
};

/// Number of series terms needed so that e^{(|J|_1 - chi0) t} P(Poisson(|J|_1 t) > K) <= tol.
inline long series_terms(double l1, double chi0, double t, double tol) {
  if (t == 0.0) return 0;
  const double lambda = l1 * t, drift = (l1 - chi0) * t, log_tol = std::log(tol);
  for (double c = 6.0; c <= 40.0; c += 2.0) {
    const long K = poisson_cutoff(lambda, tol, c, 0);
    if (drift + detail::log_poisson_upper_tail(lambda, static_cast<double>(K + 1)) <= log_tol) return K;
  }
  throw NumericalGuard("solver: series tail bound not met for any cutoff");
}

inline Snapshot solve_series(const GridKernel& J, const InitialData& u0, double chi0, double t,
                             const SeriesOptions& opt = {}) {
  detail::require_same_grid(J, u0);
  detail::require_time(chi0, t);
  if (!(opt.tol > 0.0)) throw ArgumentError("solver: series tolerance must be positive");
  if (t > opt.t_series_max)
    throw CostError("solver: t = " + std::to_string(t) + " exceeds t_series_max = " +
                    std::to_string(opt.t_series_max) + "; use solve_spectral");
  const Grid& g = J.grid();
  std::vector<double> term(u0.samples().begin(), u0.samples().end());
  if (t == 0.0) return detail::make_snapshot(g, t, term, Method::Series);

  const long K = series_terms(J.l1_norm(), chi0, t, opt.tol);
  Transform tr(g);
  std::vector<double> u(term.size(), 0.0);
  const double lt = std::log(t);
  double lw = -chi0 * t;
  for (long k = 0;; ++k) {
    const double w = std::exp(lw);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += w * term[i];
    if (k == K) break;
    term = tr.convolve(J.symbol(), term);
    lw += lt - std::log(static_cast<double>(k + 1));
  }
  for (double v : u)
    if (!std::isfinite(v)) throw NumericalGuard("solver: non-finite value in series solution");
  return detail::make_snapshot(g, t, std::move(u), Method::Series);
}

/// u(t) minus its first N series terms e^{-chi0 t} t^k/k! J^k u0, k < N.
inline Snapshot refined_remainder(const GridKernel& J, const InitialData& u0, double chi0, double t, long N) {
  detail::require_same_grid(J, u0);
  detail::require_time(chi0, t);
  if (N < 0 || N > 64) throw ArgumentError("refined_remainder: N must lie in [0, 64]");
  SpectralPropagator prop(J, u0, chi0);
  auto u = prop.field(t);
  Transform tr(J.grid());
  std::vector<double> term(u0.samples().begin(), u0.samples().end());
  double lw = -chi0 * t;
  for (long k = 0; k < N; ++k) {
    if (t == 0.0 && k > 0) break;
    const double w = t == 0.0 ? 1.0 : std::exp(lw);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] -= w * term[i];
    if (k + 1 < N) {
      term = tr.convolve(J.symbol(), term);
      if (t > 0.0) lw += std::log(t) - std::log(static_cast<double>(k + 1));
    }
  }
  return detail::make_snapshot(J.grid(), t, std::move(u), Method::Spectral);
}

struct NormRow {
  double t;
  Method method;
  Norm p;
  double norm;
};

/// Norms of u(t) over a time grid; spectral everywhere, series additionally for t <= t_series_max when requested.
inline std::vector<NormRow> track_norms(const GridKernel& J, const InitialData& u0, double chi0,
                                        const std::vector<double>& times, const std::vector<Norm>& norms,
                                        bool with_series = false, const SeriesOptions& opt = {},
                                        unsigned workers = 1) {
  detail::require_same_grid(J, u0);
  detail::require_time(chi0, 0.0);
  for (double t : times) detail::require_time(chi0, t);
  const std::size_t T = times.size();
  std::vector<std::map<Norm, double>> spec(T), ser(T);
  std::vector<char> has_series(T, 0);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(T, 1))));
  std::vector<std::exception_ptr> errors(workers);

  auto work = [&](unsigned w) {
    try {
      SpectralPropagator prop(J, u0, chi0);
      for (std::size_t i = w; i < T; i += workers) {
        spec[i] = prop.at(times[i]).norms;
        if (with_series && times[i] <= opt.t_series_max) {
          ser[i] = solve_series(J, u0, chi0, times[i], opt).norms;
          has_series[i] = 1;
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<NormRow> rows;
  for (std::size_t i = 0; i < T; ++i) {
    for (Norm p : norms) rows.push_back({times[i], Method::Spectral, p, spec[i].at(p)});
    if (has_series[i])
      for (Norm p : norms) rows.push_back({times[i], Method::Series, p, ser[i].at(p)});
  }
  return rows;
}

/// Times t0 * 2^{j/4} covering [t_lo, t_hi].
inline std::vector<double> quarter_octave_times(double t_lo, double t_hi) {
  if (!(t_lo > 0.0) || !(t_hi >= t_lo)) throw ArgumentError("time grid: need 0 < t_lo <= t_hi");
  return geometric_grid(t_lo, t_hi, std::pow(2.0, 0.25));
}

}  // namespace nldecay
