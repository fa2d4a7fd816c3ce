#pragma once

// Radially symmetric kernels on periodic grids: construction, convolution
// powers, sharp-Young sup-norm bounds, and small-frequency symbol fits.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nldecay/error.hpp"
#include "nldecay/grid.hpp"
#include "nldecay/regvar.hpp"

namespace nldecay {

enum class KernelFamily {
  Box,
  Tent,
  Gaussian,
  StableSymbol,
  LogPerturbedSymbol,
  PrescribedSymbol,
  PathologicalLogTail
};

inline const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Box: return "Box";
    case KernelFamily::Tent: return "Tent";
    case KernelFamily::Gaussian: return "Gaussian";
    case KernelFamily::StableSymbol: return "StableSymbol";
    case KernelFamily::LogPerturbedSymbol: return "LogPerturbedSymbol";
    case KernelFamily::PrescribedSymbol: return "PrescribedSymbol";
    case KernelFamily::PathologicalLogTail: return "PathologicalLogTail";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
  for (auto f : {KernelFamily::Box, KernelFamily::Tent, KernelFamily::Gaussian, KernelFamily::StableSymbol,
                 KernelFamily::LogPerturbedSymbol, KernelFamily::PrescribedSymbol,
                 KernelFamily::PathologicalLogTail})
    if (s == to_string(f)) return f;
  throw ArgumentError("kernel: unknown family '" + s + "'");
}

inline bool is_symbol_family(KernelFamily f) {
  return f == KernelFamily::StableSymbol || f == KernelFamily::LogPerturbedSymbol ||
         f == KernelFamily::PrescribedSymbol;
}

inline bool is_heavy_tailed(KernelFamily f) {
  return is_symbol_family(f) || f == KernelFamily::PathologicalLogTail;
}

/// Family parameters; each family reads only its own fields.
struct KernelParams {
  double width = 1.0;       // Box: support [-width/2, width/2]^n
  double tent_radius = 1.0; // Tent: (1 - |x_i|/a)_+ per axis
  double variance = 1.0;    // Gaussian
  double sigma = 2.0;       // symbol families
  double mu = 0.0;          // LogPerturbedSymbol
  double A = 1.0;           // symbol families
  double gamma = 1.0;       // PrescribedSymbol
  std::optional<SlowVarying> L;  // PrescribedSymbol
};

struct KernelDescriptor {
  KernelFamily family = KernelFamily::Gaussian;
  Grid grid;
  KernelParams params;
  std::optional<double> wrap_tolerance;

  nlohmann::json to_json() const {
    nlohmann::json p = nlohmann::json::object();
    switch (family) {
      case KernelFamily::Box: p["width"] = params.width; break;
      case KernelFamily::Tent: p["half_width"] = params.tent_radius; break;
      case KernelFamily::Gaussian: p["variance"] = params.variance; break;
      case KernelFamily::StableSymbol:
        p["sigma"] = params.sigma;
        p["A"] = params.A;
        break;
      case KernelFamily::LogPerturbedSymbol:
        p["sigma"] = params.sigma;
        p["mu"] = params.mu;
        p["A"] = params.A;
        break;
      case KernelFamily::PrescribedSymbol:
        p["sigma"] = params.sigma;
        p["gamma"] = params.gamma;
        p["A"] = params.A;
        if (params.L) p["L"] = params.L->to_json();
        break;
      case KernelFamily::PathologicalLogTail: break;
    }
    nlohmann::json j{{"family", to_string(family)},
                     {"n", grid.dim},
                     {"X", grid.half_width},
                     {"M", grid.points},
                     {"params", p}};
    if (wrap_tolerance) j["wrap_tolerance"] = *wrap_tolerance;
    return j;
  }

  static KernelDescriptor from_json(const nlohmann::json& j) {
    detail::reject_unknown(j, {"family", "n", "X", "M", "params", "wrap_tolerance"}, "kernel");
    KernelDescriptor d;
    if (!j.contains("family") || !j["family"].is_string())
      throw ArgumentError("kernel: missing field 'family'");
    d.family = kernel_family_from_string(j["family"].get<std::string>());
    d.grid.dim = static_cast<int>(detail::json_number(j, "n", "kernel"));
    d.grid.half_width = detail::json_number(j, "X", "kernel");
    const double m = detail::json_number(j, "M", "kernel");
    if (!(m >= 1.0) || m != std::floor(m)) throw ArgumentError("kernel: field 'M' must be a positive integer");
    d.grid.points = static_cast<std::size_t>(m);
    try {
      d.grid.validate();
    } catch (const ArgumentError& e) {
      throw ArgumentError(std::string("kernel: ") + e.what());
    }
    const nlohmann::json p = j.contains("params") ? j["params"] : nlohmann::json::object();
    const std::string where = "kernel.params";
    auto num = [&](const char* key, double& out) {
      if (p.contains(key)) out = detail::json_number(p, key, where);
    };
    switch (d.family) {
      case KernelFamily::Box:
        detail::reject_unknown(p, {"width"}, where);
        num("width", d.params.width);
        break;
      case KernelFamily::Tent:
        detail::reject_unknown(p, {"half_width"}, where);
        num("half_width", d.params.tent_radius);
        break;
      case KernelFamily::Gaussian:
        detail::reject_unknown(p, {"variance"}, where);
        num("variance", d.params.variance);
        break;
      case KernelFamily::StableSymbol:
        detail::reject_unknown(p, {"sigma", "A"}, where);
        num("sigma", d.params.sigma);
        num("A", d.params.A);
        break;
      case KernelFamily::LogPerturbedSymbol:
        detail::reject_unknown(p, {"sigma", "mu", "A"}, where);
        num("sigma", d.params.sigma);
        num("mu", d.params.mu);
        num("A", d.params.A);
        break;
      case KernelFamily::PrescribedSymbol:
        detail::reject_unknown(p, {"sigma", "gamma", "A", "L"}, where);
        num("sigma", d.params.sigma);
        num("gamma", d.params.gamma);
        num("A", d.params.A);
        if (!p.contains("L")) throw ArgumentError(where + ": PrescribedSymbol needs field 'L'");
        d.params.L = SlowVarying::from_json(p["L"]);
        break;
      case KernelFamily::PathologicalLogTail:
        detail::reject_unknown(p, {}, where);
        break;
    }
    if (j.contains("wrap_tolerance")) d.wrap_tolerance = detail::json_number(j, "wrap_tolerance", "kernel");
    return d;
  }
};

/// Radially symmetric real kernel on a periodic grid, normalized to unit
/// mass, with its scaled DFT cached. Immutable after construction.
class GridKernel {
 public:
  /// Wrap raw samples (normalized to unit mass here).
  static GridKernel from_samples(const KernelDescriptor& d, std::vector<double> samples) {
    d.grid.validate();
    if (samples.size() != d.grid.size()) throw ArgumentError("kernel: sample count does not match grid");
    Transform tr(d.grid);
    GridKernel k(d);
    k.samples_ = std::move(samples);
    k.raw_mass_ = integral(d.grid, k.samples_);
    k.symbol_ = tr.to_symbol(k.samples_);
    k.finish();
    return k;
  }

  const KernelDescriptor& descriptor() const { return desc_; }
  const Grid& grid() const { return desc_.grid; }
  KernelFamily family() const { return desc_.family; }
  std::span<const double> samples() const { return samples_; }
  std::span<const Complex> symbol() const { return symbol_; }
  double l1_norm() const { return l1_norm_; }
  double sup_norm() const { return lp_norm(grid(), samples_, 0); }
  /// Sampled mass before normalization.
  double raw_mass() const { return raw_mass_; }
  /// Fraction of the R^n kernel's mass falling outside the grid box, where a closed form exists.
  std::optional<double> truncated_tail_mass() const { return tail_mass_; }
  bool is_signed() const { return signed_; }
  double wrap_tolerance() const { return wrap_tol_; }
  const std::vector<std::string>& advisories() const { return advisories_; }

 private:
  friend GridKernel make_kernel(const KernelDescriptor&);
  explicit GridKernel(KernelDescriptor d) : desc_(std::move(d)) {}

  void finish() {
    if (!(std::abs(raw_mass_) > 0.0) || !std::isfinite(raw_mass_))
      throw EvaluationError("kernel: sampled mass is zero or non-finite");
    const double inv = 1.0 / raw_mass_;
    for (double& v : samples_) v *= inv;
    for (Complex& v : symbol_) v *= inv;
    l1_norm_ = lp_norm(grid(), samples_, 1);
    const double mx = *std::max_element(samples_.begin(), samples_.end());
    const double mn = *std::min_element(samples_.begin(), samples_.end());
    signed_ = mn < -1e-12 * mx;
    if (signed_) advisories_.push_back("kernel has negative lobes; positivity-dependent checks skipped");
    wrap_tol_ = desc_.wrap_tolerance.value_or(is_heavy_tailed(desc_.family) ? 0.1 : 1e-6);
  }

  KernelDescriptor desc_;
  std::vector<double> samples_;
  std::vector<Complex> symbol_;
  double l1_norm_ = 0.0;
  double raw_mass_ = 0.0;
  std::optional<double> tail_mass_;
  bool signed_ = false;
  double wrap_tol_ = 1e-6;
  std::vector<std::string> advisories_;
};

namespace detail {

inline double cell_overlap(double x, double h, double half) {
  const double lo = std::max(x - 0.5 * h, -half), hi = std::min(x + 0.5 * h, half);
  return std::max(0.0, hi - lo) / h;
}

template <class F>
std::vector<double> sample_nodes(const Grid& g, F&& f) {
  std::vector<double> out(g.size());
  if (g.dim == 1) {
    for (std::size_t i = 0; i < g.points; ++i) out[i] = f(g.coordinate(i), 0.0);
  } else {
    for (std::size_t i = 0; i < g.points; ++i)
      for (std::size_t j = 0; j < g.points; ++j) out[i * g.points + j] = f(g.coordinate(i), g.coordinate(j));
  }
  return out;
}

inline void require_resolved(double scale, const Grid& g, const char* what) {
  if (scale < 4.0 * g.spacing() * (1.0 - 1e-12))
    throw ResolutionError(std::string("kernel ") + what + ": characteristic scale " + std::to_string(scale) +
                          " is below 4 grid cells (h = " + std::to_string(g.spacing()) + ")");
}

inline double symbol_exponent(const KernelDescriptor& d, double xi) {
  const auto& p = d.params;
  if (xi == 0.0) return 0.0;
  switch (d.family) {
    case KernelFamily::StableSymbol: return p.A * std::pow(xi, p.sigma);
    case KernelFamily::LogPerturbedSymbol:
      return p.A * std::pow(xi, p.sigma) * std::pow(std::log(std::numbers::e + 1.0 / xi), p.mu);
    case KernelFamily::PrescribedSymbol: {
      const double s = std::max(std::pow(xi, -p.gamma), p.L->domain_start());
      return p.A * std::pow(xi, p.sigma) * p.L->eval(s);
    }
    default: return 0.0;
  }
}

}  // namespace detail

/// Construct a unit-mass kernel of the requested family on its grid.
inline GridKernel make_kernel(const KernelDescriptor& d) {
  d.grid.validate();
  const Grid& g = d.grid;
  const auto& p = d.params;
  const int n = g.dim;
  GridKernel k(d);
  Transform tr(g);

  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError(std::string("kernel: ") + name + " must be positive");
  };

  switch (d.family) {
    case KernelFamily::Box: {
      positive(p.width, "width");
      detail::require_resolved(p.width, g, "Box");
      if (0.5 * p.width >= g.half_width) throw ArgumentError("kernel Box: support exceeds the grid box");
      const double half = 0.5 * p.width, h = g.spacing();
      k.samples_ = detail::sample_nodes(g, [&](double x, double y) {
        double v = detail::cell_overlap(x, h, half);
        if (n == 2) v *= detail::cell_overlap(y, h, half);
        return v / std::pow(p.width, n);
      });
      k.tail_mass_ = 0.0;
      break;
    }
    case KernelFamily::Tent: {
      positive(p.tent_radius, "half_width");
      detail::require_resolved(p.tent_radius, g, "Tent");
      if (p.tent_radius >= g.half_width) throw ArgumentError("kernel Tent: support exceeds the grid box");
      const double a = p.tent_radius;
      k.samples_ = detail::sample_nodes(g, [&](double x, double y) {
        double v = std::max(0.0, 1.0 - std::abs(x) / a) / a;
        if (n == 2) v *= std::max(0.0, 1.0 - std::abs(y) / a) / a;
        return v;
      });
      k.tail_mass_ = 0.0;
      break;
    }
    case KernelFamily::Gaussian: {
      positive(p.variance, "variance");
      const double sd = std::sqrt(p.variance);
      detail::require_resolved(sd, g, "Gaussian");
      const double axis_tail = std::erfc(g.half_width / (std::numbers::sqrt2 * sd));
      const double tail = 1.0 - std::pow(1.0 - axis_tail, n);
      if (tail > 1e-6) throw ArgumentError("kernel Gaussian: mass outside the grid box exceeds 1e-6; enlarge X");
      const double norm = std::pow(2.0 * std::numbers::pi * p.variance, -0.5 * n);
      k.samples_ = detail::sample_nodes(
          g, [&](double x, double y) { return norm * std::exp(-(x * x + y * y) / (2.0 * p.variance)); });
      k.tail_mass_ = tail;
      break;
    }
    case KernelFamily::StableSymbol:
    case KernelFamily::LogPerturbedSymbol:
    case KernelFamily::PrescribedSymbol: {
      if (!(p.sigma > 0.0 && p.sigma <= 2.0)) throw ArgumentError("kernel: sigma must lie in (0, 2]");
      positive(p.A, "A");
      if (d.family == KernelFamily::PrescribedSymbol) {
        positive(p.gamma, "gamma");
        if (!p.L) throw ArgumentError("kernel PrescribedSymbol: missing slowly varying L");
      }
      detail::require_resolved(std::pow(p.A, 1.0 / p.sigma), g, to_string(d.family));
      k.symbol_.resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i)
        k.symbol_[i] = Complex(std::exp(-detail::symbol_exponent(d, g.frequency_radius(i))), 0.0);
      k.samples_ = tr.from_symbol(k.symbol_);
      if (d.family == KernelFamily::StableSymbol && p.sigma == 2.0) {
        const double axis_tail = std::erfc(g.half_width / (2.0 * std::sqrt(p.A)));
        k.tail_mass_ = 1.0 - std::pow(1.0 - axis_tail, n);
      } else if (d.family == KernelFamily::StableSymbol && p.sigma == 1.0 && n == 1) {
        k.tail_mass_ = 1.0 - 2.0 / std::numbers::pi * std::atan(g.half_width / p.A);
      } else {
        k.advisories_.push_back("tail mass outside the grid box has no closed form; not checked");
      }
      break;
    }
    case KernelFamily::PathologicalLogTail: {
      const double h = g.spacing();
      auto f = [n](double r) {
        const double l = std::log(r);
        return 1.0 / (std::pow(r, n) * (1.0 + l * l));
      };
      const double cap = f(h);
      k.samples_ = detail::sample_nodes(g, [&](double x, double y) {
        const double r = std::hypot(x, y);
        return r < 0.5 * h ? cap : f(r);
      });
      if (n == 1) k.tail_mass_ = (0.5 * std::numbers::pi - std::atan(std::log(g.half_width))) / std::numbers::pi;
      break;
    }
  }

  if (k.symbol_.empty()) {
    k.raw_mass_ = integral(g, k.samples_);
    k.symbol_ = tr.to_symbol(k.samples_);
  } else {
    k.raw_mass_ = integral(g, k.samples_);
  }
  if (k.tail_mass_ && *k.tail_mass_ > 1e-6)
    k.advisories_.push_back("R^n tail mass outside the grid box: " + std::to_string(*k.tail_mass_));
  k.finish();
  return k;
}

/// Largest |J(x) - J(-x)| (and |J(x1,x2) - J(x2,x1)| for n = 2), relative to sup|J|.
inline double symmetry_defect(const GridKernel& J) {
  const auto s = J.samples();
  const Grid& g = J.grid();
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    worst = std::max(worst, std::abs(s[i] - s[g.mirror(i)]));
    worst = std::max(worst, std::abs(s[i] - s[g.transpose(i)]));
  }
  return worst / J.sup_norm();
}

struct ConvolutionPower {
  Grid grid;
  long k = 1;
  std::vector<double> samples;
  double sup_norm = 0.0;
  double l1_norm = 0.0;
  double wraparound_estimate = 0.0;
};

/// Samples of J_k from the symbol power (k = 1 returns J's own samples).
inline std::vector<double> power_samples(const GridKernel& J, long k, Transform& tr) {
  if (k < 1) throw ArgumentError("convolution power: k must be >= 1");
  if (k == 1) return {J.samples().begin(), J.samples().end()};
  const auto sym = J.symbol();
  std::vector<Complex> p(sym.size());
  for (std::size_t i = 0; i < sym.size(); ++i) p[i] = ipow(sym[i], k);
  return tr.from_symbol(p);
}

/// 1 - (1 - m)^2 with m the share of |J_{ceil(k/2)}| outside the |x|_inf > X/2 shell.
inline double wraparound_estimate(const GridKernel& J, long k, Transform& tr) {
  const auto half = power_samples(J, (k + 1) / 2, tr);
  const Grid& g = J.grid();
  double outside = 0.0, total = 0.0;
  for (std::size_t i = 0; i < half.size(); ++i) {
    const double a = std::abs(half[i]);
    total += a;
    if (g.max_coordinate(i) > 0.5 * g.half_width) outside += a;
  }
  const double m = outside / total;
  return 1.0 - (1.0 - m) * (1.0 - m);
}

inline ConvolutionPower convolution_power(const GridKernel& J, long k, Transform& tr) {
  if (k < 1) throw ArgumentError("convolution power: k must be >= 1");
  ConvolutionPower out;
  out.grid = J.grid();
  out.k = k;
  out.wraparound_estimate = wraparound_estimate(J, k, tr);
  if (k > 1 && out.wraparound_estimate > J.wrap_tolerance()) {
    throw PeriodizationError("convolution power k = " + std::to_string(k) +
                                 " wraps around the periodic domain (estimate " +
                                 std::to_string(out.wraparound_estimate) + " > " +
                                 std::to_string(J.wrap_tolerance()) + ")",
                             static_cast<int>(k), out.wraparound_estimate);
  }
  out.samples = power_samples(J, k, tr);
  out.sup_norm = lp_norm(out.grid, out.samples, 0);
  out.l1_norm = lp_norm(out.grid, out.samples, 1);
  return out;
}

inline ConvolutionPower convolution_power(const GridKernel& J, long k) {
  Transform tr(J.grid());
  return convolution_power(J, k, tr);
}

/// Largest k (<= cap) whose wrap-around estimate stays within J's tolerance; at least 1.
inline long k_max(const GridKernel& J, long cap = 1L << 20) {
  Transform tr(J.grid());
  auto ok = [&](long k) { return wraparound_estimate(J, k, tr) <= J.wrap_tolerance(); };
  if (!ok(2)) return 1;
  long lo = 2, hi = 4;
  while (hi <= cap && ok(hi)) {
    lo = hi;
    hi *= 2;
  }
  if (hi > cap) return lo == cap ? cap : (ok(cap) ? cap : lo);
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

/// Sharp Young constant (p^{1/p} / q^{1/q})^{1/2} with 1/p + 1/q = 1.
inline double brascamp_lieb_constant(double p) {
  if (!(p >= 1.0)) throw ArgumentError("brascamp_lieb_constant: p must be >= 1");
  if (p == 1.0 || std::isinf(p)) return 1.0;
  const double q = p / (p - 1.0);
  return std::exp(0.5 * (std::log(p) / p - std::log(q) / q));
}

struct SharpYoungBound {
  double bound;          // (e^{n/2} / k^{n/2}) (∫ |J|^{k/(k-1)})^{k-1}
  double limiting_form;  // e^{n/2} exp(gamma ∫ |J| ln |J|) k^{-n/2}
  double entropy;        // ∫ |J| ln |J|, +inf if divergent
};

inline double kernel_entropy(const GridKernel& J) {
  double s = 0.0;
  for (double v : J.samples()) {
    const double a = std::abs(v);
    if (a > 0.0) s += a * std::log(a);
  }
  s *= J.grid().cell_volume();
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

inline SharpYoungBound sharp_young_bound(const GridKernel& J, long k, double gamma_probe) {
  if (k < 1) throw ArgumentError("sharp_young_bound: k must be >= 1");
  if (!(gamma_probe > 0.0)) throw ArgumentError("sharp_young_bound: gamma_probe must be positive");
  const double n = J.grid().dim;
  SharpYoungBound b{};
  b.entropy = kernel_entropy(J);
  const double kd = static_cast<double>(k);
  if (k == 1) {
    b.bound = std::exp(0.5 * n) * J.sup_norm();
  } else {
    const double q = kd / (kd - 1.0);
    double s = 0.0;
    for (double v : J.samples()) s += std::pow(std::abs(v), q);
    b.bound = std::exp(0.5 * n * (1.0 - std::log(kd)) + (kd - 1.0) * std::log(s * J.grid().cell_volume()));
  }
  b.limiting_form = std::isfinite(b.entropy)
                        ? std::exp(0.5 * n + gamma_probe * b.entropy - 0.5 * n * std::log(kd))
                        : std::numeric_limits<double>::infinity();
  return b;
}

enum class SymbolModel { PowerOnly, PowerLog, PrescribedL };

struct SymbolModelSpec {
  SymbolModel kind = SymbolModel::PowerOnly;
  std::optional<SlowVarying> L = std::nullopt;  // PrescribedL
  double gamma = 1.0;            // PrescribedL
};

/// 1 - J^(xi) ≈ A |xi|^sigma (ln(e + 1/|xi|))^mu, or A |xi|^sigma L(|xi|^{-gamma}).
struct SymbolExpansion {
  double A = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
  std::optional<double> gamma;
  double fit_residual = 0.0;
  std::size_t samples_used = 0;

  /// Model value of 1 - J^(xi).
  double deficit(double xi) const;
  std::optional<SlowVarying> L;
};

inline double SymbolExpansion::deficit(double xi) const {
  if (L && gamma) return A * std::pow(xi, sigma) * L->eval(std::max(std::pow(xi, -*gamma), L->domain_start()));
  return A * std::pow(xi, sigma) * std::pow(std::log(std::numbers::e + 1.0 / xi), mu);
}

inline SymbolExpansion estimate_symbol_expansion(const GridKernel& J, double xi_lo, double xi_hi,
                                                 const SymbolModelSpec& model) {
  const Grid& g = J.grid();
  if (!(xi_lo > 0.0 && xi_hi > xi_lo && xi_hi < 1.0))
    throw ArgumentError("symbol fit: band must satisfy 0 < xi_lo < xi_hi < 1");
  if (xi_hi > g.nyquist()) throw ArgumentError("symbol fit: band exceeds the grid's Nyquist frequency");
  if (model.kind == SymbolModel::PrescribedL && !model.L)
    throw ArgumentError("symbol fit: PrescribedL model needs L");

  std::vector<double> xs, ys;
  const auto sym = J.symbol();
  for (std::size_t i = 0; i < sym.size(); ++i) {
    const double xi = g.frequency_radius(i);
    if (xi < xi_lo || xi > xi_hi) continue;
    const double deficit = 1.0 - sym[i].real();
    if (!(deficit > 0.0))
      throw FitError("symbol fit: 1 - J^(xi) <= 0 at xi = " + std::to_string(xi));
    xs.push_back(xi);
    ys.push_back(std::log(deficit));
  }
  std::vector<double> radii = xs;
  std::sort(radii.begin(), radii.end());
  const auto distinct = std::unique(radii.begin(), radii.end(), [](double a, double b) { return b - a <= 1e-12 * b; });
  if (distinct - radii.begin() < 16) throw ArgumentError("symbol fit: fewer than 16 distinct frequencies in band");

  const bool with_log = model.kind == SymbolModel::PowerLog;
  const Eigen::Index rows = static_cast<Eigen::Index>(xs.size()), cols = with_log ? 3 : 2;
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double xi = xs[static_cast<std::size_t>(r)];
    X(r, 0) = 1.0;
    X(r, 1) = std::log(xi);
    if (with_log) X(r, 2) = std::log(std::log(std::numbers::e + 1.0 / xi));
    y(r) = ys[static_cast<std::size_t>(r)];
    if (model.kind == SymbolModel::PrescribedL)
      y(r) -= model.L->log_eval(std::max(std::pow(xi, -model.gamma), model.L->domain_start()));
  }
  const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);

  SymbolExpansion e;
  e.A = std::exp(c(0));
  e.sigma = c(1);
  e.mu = with_log ? c(2) : 0.0;
  if (model.kind == SymbolModel::PrescribedL) {
    e.gamma = model.gamma;
    e.L = model.L;
  }
  e.samples_used = xs.size();
  for (std::size_t i = 0; i < xs.size(); ++i)
    e.fit_residual = std::max(e.fit_residual, std::abs(e.deficit(xs[i]) - std::exp(ys[i])));
  return e;
}

/// Symbol parameters realizing the decay (tL(t))^{-beta} in L^p on R^n.
struct PrescribedDesign {
  double sigma;
  double gamma;
  bool L_increasing;
};

enum class Monotonicity { Increasing, Decreasing, Constant, NonMonotone };

/// Eventual monotonicity of L, judged on s = 10^3, 10^6, ..., 10^300 (the
/// Oscillating family is non-monotone by construction).
inline Monotonicity eventual_monotonicity(const SlowVarying& L) {
  if (L.family() == SlowFamily::Oscillating) return Monotonicity::NonMonotone;
  std::vector<double> v;
  for (double s = std::max(1e3, L.domain_start()); s <= 1e300; s *= 1e3) v.push_back(L.log_eval(s));
  bool inc = true, dec = true, flat = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    inc = inc && v[i] > v[i - 1];
    dec = dec && v[i] < v[i - 1];
    flat = flat && v[i] == v[i - 1];
  }
  if (flat) return Monotonicity::Constant;
  if (inc) return Monotonicity::Increasing;
  if (dec) return Monotonicity::Decreasing;
  return Monotonicity::NonMonotone;
}

/// gamma > sigma for eventually increasing L, gamma = sigma for decreasing L.
inline bool gamma_rule_holds(const SlowVarying& L, double sigma, double gamma) {
  switch (eventual_monotonicity(L)) {
    case Monotonicity::Increasing: return gamma > sigma;
    case Monotonicity::Decreasing: return std::abs(gamma - sigma) <= 1e-12 * sigma;
    case Monotonicity::Constant: return gamma > 0.0;
    case Monotonicity::NonMonotone: return false;
  }
  return false;
}

inline PrescribedDesign prescribed_symbol_design(double beta, int n, double p, const SlowVarying& L) {
  if (!(beta > 0.0)) throw ArgumentError("prescribed design: beta must be positive");
  if (!(p > 1.0)) throw ArgumentError("prescribed design: p must exceed 1");
  if (n - 2.0 * beta > 0.0 && p > n / (n - 2.0 * beta))
    throw ArgumentError("prescribed design: p exceeds n/(n - 2 beta)");
  const double sigma = std::isinf(p) ? n / beta : (n / beta) * (1.0 - 1.0 / p);
  if (!(sigma > 0.0 && sigma <= 2.0 + 1e-12)) throw ArgumentError("prescribed design: sigma outside (0, 2]");
  const auto mono = eventual_monotonicity(L);
  if (mono == Monotonicity::NonMonotone) throw ArgumentError("prescribed design: L must be eventually monotone");
  const bool inc = mono == Monotonicity::Increasing;
  return {std::min(sigma, 2.0), inc ? 2.0 * std::min(sigma, 2.0) : std::min(sigma, 2.0), inc};
}

/// Half-width X = M h / 2 with h = 1/cells_per_unit; an odd cells_per_unit
/// puts the unit box edges on cell boundaries so it is sampled exactly.
inline double box_aligned_half_width(std::size_t points, std::size_t cells_per_unit) {
  return static_cast<double>(points) / (2.0 * static_cast<double>(cells_per_unit));
}

}  // namespace nldecay
