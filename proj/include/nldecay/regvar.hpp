#pragma once

// Slowly and regularly varying functions, and numerical checks of the
// Karamata-type sup/inf checks.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nldecay/error.hpp"

namespace nldecay {

enum class SlowFamily { Constant, IterLogPower, ExpLogPower, Oscillating, Karamata };

inline const char* to_string(SlowFamily f) {
  switch (f) {
    case SlowFamily::Constant: return "Constant";
    case SlowFamily::IterLogPower: return "IterLogPower";
    case SlowFamily::ExpLogPower: return "ExpLogPower";
    case SlowFamily::Oscillating: return "Oscillating";
    case SlowFamily::Karamata: return "Karamata";
  }
  return "?";
}

namespace detail {
/// exp applied m times starting from 0: 1, e, e^e, ...  The m-fold iterated
/// logarithm is >= 1 exactly from tower(m) on.
inline double tower(std::size_t m) {
  double v = 1.0;
  for (std::size_t i = 0; i < m; ++i) v = std::exp(v);
  return v;
}
}  // namespace detail

/// Evaluable slowly varying function  L(s) = scale * family(s)  (or its
/// reciprocal when `inverted`), defined on [domain_start, inf).
class SlowVarying {
 public:
  using Fn = std::function<double(double)>;

  static SlowVarying constant(double c0) {
    if (!(c0 > 0.0) || !std::isfinite(c0)) throw ArgumentError("Constant: c0 must be positive");
    SlowVarying L(SlowFamily::Constant);
    L.scale_ = c0;
    L.domain_start_ = 0.0;
    return L;
  }

  /// (ln s)^{mu_1} (ln ln s)^{mu_2} ...
  static SlowVarying iter_log_power(std::vector<double> mu) {
    if (mu.empty()) throw ArgumentError("IterLogPower: needs at least one exponent");
    SlowVarying L(SlowFamily::IterLogPower);
    L.domain_start_ = detail::tower(mu.size());
    L.exponents_ = std::move(mu);
    return L;
  }

  /// exp((ln s)^{mu_1} (ln ln s)^{mu_2} ...)
  static SlowVarying exp_log_power(std::vector<double> mu) {
    if (mu.empty()) throw ArgumentError("ExpLogPower: needs at least one exponent");
    SlowVarying L(SlowFamily::ExpLogPower);
    L.domain_start_ = detail::tower(mu.size());
    L.exponents_ = std::move(mu);
    return L;
  }

  /// exp(cbrt(ln s) cos(cbrt(ln s))): slowly varying, with liminf 0 and limsup infinity.
  static SlowVarying oscillating() {
    SlowVarying L(SlowFamily::Oscillating);
    L.domain_start_ = std::numbers::e;
    return L;
  }

  /// c(s) exp(∫_{s0}^s eps(tau)/tau dtau); c must tend to a positive limit and eps to 0.
  static SlowVarying karamata(Fn c, Fn eps, double s0) {
    if (!(s0 > 0.0)) throw ArgumentError("Karamata: s0 must be positive");
    if (!c || !eps) throw ArgumentError("Karamata: c and eps must be callable");
    SlowVarying L(SlowFamily::Karamata);
    L.c_ = std::move(c);
    L.eps_ = std::move(eps);
    L.domain_start_ = s0;
    L.s0_ = s0;
    return L;
  }

  /// Serializable Karamata member: c(s) = c0 (1 + c1/ln s), eps(s) = e1 (ln s)^{-e2}.
  static SlowVarying karamata_preset(double c0, double c1, double e1, double e2, double s0) {
    if (!(c0 > 0.0)) throw ArgumentError("Karamata: c0 must be positive");
    if (!(e2 > 0.0)) throw ArgumentError("Karamata: e2 must be positive so eps -> 0");
    if (!(s0 > 1.0)) throw ArgumentError("Karamata: s0 must exceed 1");
    if (c1 <= -std::log(s0)) throw ArgumentError("Karamata: c(s) must stay positive on [s0, inf)");
    auto L = karamata([c0, c1](double s) { return c0 * (1.0 + c1 / std::log(s)); },
                      [e1, e2](double s) { return e1 * std::pow(std::log(s), -e2); }, s0);
    L.preset_ = std::vector<double>{c0, c1, e1, e2, s0};
    return L;
  }

  SlowFamily family() const { return family_; }
  const std::vector<double>& exponents() const { return exponents_; }
  double scale() const { return scale_; }
  bool inverted() const { return inverted_; }
  double domain_start() const { return domain_start_; }

  /// Copy defined on [n0, inf). n0 may lie below the default guard but must stay
  /// where every iterated logarithm is positive (s > exp^{m-1}(0) for m logs).
  SlowVarying with_domain_start(double n0) const {
    if (!(n0 >= domain_start_ || n0 > hard_floor()))
      throw ArgumentError("domain start " + std::to_string(n0) + " lies at or below the family's singularity");
    SlowVarying L = *this;
    L.domain_start_ = n0;
    return L;
  }

  SlowVarying scaled(double c) const {
    if (!(c > 0.0) || !std::isfinite(c)) throw ArgumentError("scale must be positive");
    SlowVarying L = *this;
    if (inverted_)
      L.scale_ /= c;
    else
      L.scale_ *= c;
    return L;
  }

  /// K = 1/L. Constant and IterLogPower stay in their family.
  SlowVarying reciprocal() const {
    SlowVarying K = *this;
    if (family_ == SlowFamily::Constant || family_ == SlowFamily::IterLogPower) {
      K.scale_ = 1.0 / scale_;
      for (double& m : K.exponents_) m = -m;
    } else {
      K.inverted_ = !inverted_;
    }
    return K;
  }

  double log_eval(double s) const {
    if (!(s >= domain_start_)) {
      throw DomainError("slowly varying " + std::string(to_string(family_)) + ": s = " +
                        std::to_string(s) + " below domain start " + std::to_string(domain_start_));
    }
    double v = std::log(scale_) + family_log(s);
    if (inverted_) v = -v;
    if (!std::isfinite(v))
      throw EvaluationError("slowly varying " + std::string(to_string(family_)) +
                            ": non-finite value at s = " + std::to_string(s));
    return v;
  }

  double eval(double s) const {
    const double v = std::exp(log_eval(s));
    if (!std::isfinite(v) || v <= 0.0)
      throw EvaluationError("slowly varying value overflows at s = " + std::to_string(s));
    return v;
  }

  double operator()(double s) const { return eval(s); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["family"] = to_string(family_);
    switch (family_) {
      case SlowFamily::Constant: j["params"] = std::vector<double>{scale_}; break;
      case SlowFamily::IterLogPower:
      case SlowFamily::ExpLogPower: j["params"] = exponents_; break;
      case SlowFamily::Oscillating: j["params"] = nlohmann::json::array(); break;
      case SlowFamily::Karamata:
        if (!preset_) throw ArgumentError("Karamata with user callables is not serializable");
        j["params"] = *preset_;
        break;
    }
    if (family_ != SlowFamily::Constant) j["scale"] = scale_;
    j["inverted"] = inverted_;
    j["domain_start"] = domain_start_;
    return j;
  }

  static SlowVarying from_json(const nlohmann::json& j);

 private:
  explicit SlowVarying(SlowFamily f) : family_(f) {}

  double hard_floor() const {
    switch (family_) {
      case SlowFamily::Constant: return 0.0;
      case SlowFamily::IterLogPower:
      case SlowFamily::ExpLogPower: return detail::tower(exponents_.size() - 1);
      case SlowFamily::Oscillating: return 1.0;
      case SlowFamily::Karamata: return s0_;
    }
    return 0.0;
  }

  double family_log(double s) const {
    switch (family_) {
      case SlowFamily::Constant: return 0.0;
      case SlowFamily::IterLogPower: {
        double acc = 0.0, ell = s;
        for (double m : exponents_) {
          ell = std::log(ell);
          acc += m * std::log(ell);
        }
        return acc;
      }
      case SlowFamily::ExpLogPower: {
        double prod = 1.0, ell = s;
        for (double m : exponents_) {
          ell = std::log(ell);
          prod *= std::pow(ell, m);
        }
        return prod;
      }
      case SlowFamily::Oscillating: {
        const double v = std::cbrt(std::log(s));
        return v * std::cos(v);
      }
      case SlowFamily::Karamata: {
        const double c = c_(s);
        if (!(c > 0.0)) throw EvaluationError("Karamata: c(s) not positive");
        const double a = std::log(s0_), b = std::log(s);
        double integral = 0.0;
        if (b > a) {
          auto f = [this](double u) { return eps_(std::exp(u)); };
          integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 25,
                                                                                   1e-10);
        }
        return std::log(c) + integral;
      }
    }
    return 0.0;
  }

  SlowFamily family_;
  std::vector<double> exponents_;
  double scale_ = 1.0;
  bool inverted_ = false;
  double domain_start_ = std::numbers::e;
  Fn c_, eps_;
  double s0_ = 1.0;
  std::optional<std::vector<double>> preset_;
};

namespace detail {
inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!j.is_object()) throw ArgumentError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ArgumentError(where + ": unknown field '" + it.key() + "'");
  }
}

inline double json_number(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ArgumentError(where + ": missing field '" + key + "'");
  if (!j.at(key).is_number()) throw ArgumentError(where + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}
}  // namespace detail

inline SlowVarying SlowVarying::from_json(const nlohmann::json& j) {
  const std::string where = "slow";
  detail::reject_unknown(j, {"family", "params", "scale", "inverted", "domain_start"}, where);
  if (!j.contains("family") || !j["family"].is_string())
    throw ArgumentError(where + ": missing field 'family'");
  const std::string fam = j["family"].get<std::string>();
  std::vector<double> p;
  if (j.contains("params")) {
    if (!j["params"].is_array()) throw ArgumentError(where + ": field 'params' must be an array");
    for (const auto& v : j["params"]) {
      if (!v.is_number()) throw ArgumentError(where + ": field 'params' must hold numbers");
      p.push_back(v.get<double>());
    }
  }
  auto need = [&](std::size_t n) {
    if (p.size() != n)
      throw ArgumentError(where + ": family " + fam + " expects " + std::to_string(n) +
                          " entries in 'params'");
  };
  SlowVarying L = SlowVarying::constant(1.0);
  if (fam == "Constant") {
    need(1);
    L = SlowVarying::constant(p[0]);
  } else if (fam == "IterLogPower") {
    L = SlowVarying::iter_log_power(p);
  } else if (fam == "ExpLogPower") {
    L = SlowVarying::exp_log_power(p);
  } else if (fam == "Oscillating") {
    need(0);
    L = SlowVarying::oscillating();
  } else if (fam == "Karamata") {
    need(5);
    L = SlowVarying::karamata_preset(p[0], p[1], p[2], p[3], p[4]);
  } else {
    throw ArgumentError(where + ": unknown family '" + fam + "'");
  }
  if (j.contains("scale")) {
    if (fam == "Constant") throw ArgumentError(where + ": Constant takes its value in 'params'");
    L.scale_ = detail::json_number(j, "scale", where);
    if (!(L.scale_ > 0.0)) throw ArgumentError(where + ": field 'scale' must be positive");
  }
  if (j.contains("inverted")) {
    if (!j["inverted"].is_boolean()) throw ArgumentError(where + ": field 'inverted' must be boolean");
    if (j["inverted"].get<bool>()) {
      if (fam == "Constant" || fam == "IterLogPower")
        throw ArgumentError(where + ": " + fam + " encodes reciprocals through its parameters");
      L.inverted_ = true;
    }
  }
  if (j.contains("domain_start"))
    L = L.with_domain_start(detail::json_number(j, "domain_start", where));
  return L;
}

/// R(s) = s^index L(s).
struct RegVarying {
  double index = 0.0;
  SlowVarying slow = SlowVarying::constant(1.0);

  double domain_start() const { return slow.domain_start(); }

  double log_eval(double s) const {
    if (s == 0.0 && slow.domain_start() <= 0.0) {
      if (index > 0.0) return -std::numeric_limits<double>::infinity();
      if (index == 0.0) return slow.log_eval(0.0);
      throw DomainError("regularly varying: negative index at s = 0");
    }
    if (!(s > 0.0)) throw DomainError("regularly varying: s must be positive");
    return index * std::log(s) + slow.log_eval(s);
  }
  double eval(double s) const {
    const double v = std::exp(log_eval(s));
    if (!std::isfinite(v)) throw EvaluationError("regularly varying value overflows");
    return v;
  }
  double operator()(double s) const { return eval(s); }

  nlohmann::json to_json() const { return {{"index", index}, {"slow", slow.to_json()}}; }
  static RegVarying from_json(const nlohmann::json& j) {
    detail::reject_unknown(j, {"index", "slow"}, "regvar");
    RegVarying r;
    r.index = detail::json_number(j, "index", "regvar");
    if (!j.contains("slow")) throw ArgumentError("regvar: missing field 'slow'");
    r.slow = SlowVarying::from_json(j["slow"]);
    return r;
  }
};

/// |f(lambda s)/f(s) - 1| for slowly varying f.
inline double slow_variation_defect(const SlowVarying& L, double lambda, double s) {
  return std::abs(std::exp(L.log_eval(lambda * s) - L.log_eval(s)) - 1.0);
}

/// |R(lambda s)/R(s) - lambda^index|, relative to lambda^index.
inline double regular_variation_defect(const RegVarying& R, double lambda, double s) {
  const double ratio = std::exp(R.log_eval(lambda * s) - R.log_eval(s));
  return std::abs(ratio / std::pow(lambda, R.index) - 1.0);
}

namespace detail {

constexpr int kMeshPerDecade = 512;
constexpr int kEndpointRefinement = 4;

/// Log-spaced tau-mesh on [lo, s]; the final decade is refined kEndpointRefinement times.
inline std::vector<double> karamata_mesh(double lo, double s) {
  std::vector<double> mesh;
  const double l0 = std::log10(lo), l1 = std::log10(s);
  const auto coarse = static_cast<long>(std::ceil((l1 - l0) * kMeshPerDecade));
  for (long i = 0; i <= coarse; ++i)
    mesh.push_back(std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(i) / std::max(coarse, 1L)));
  const double r0 = std::max(l0, l1 - 1.0);
  const auto fine = static_cast<long>(std::ceil((l1 - r0) * kMeshPerDecade * kEndpointRefinement));
  for (long i = 0; i <= fine; ++i)
    mesh.push_back(std::pow(10.0, r0 + (l1 - r0) * static_cast<double>(i) / std::max(fine, 1L)));
  for (double& t : mesh) t = std::clamp(t, lo, s);
  mesh.push_back(lo);
  mesh.push_back(s);
  std::sort(mesh.begin(), mesh.end());
  mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());
  return mesh;
}

template <class Better>
std::vector<double> karamata_extremum(const SlowVarying& L, double eps, const std::vector<double>& s_grid,
                                      double sign, Better better, const char* what) {
  if (s_grid.empty()) throw ArgumentError(std::string(what) + ": empty s grid");
  if (!(eps > 0.0)) throw ArgumentError(std::string(what) + ": eps must be positive");
  const double lo = std::max(L.domain_start(), std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] >= lo)) throw DomainError(std::string(what) + ": grid point below N0");
    if (i > 0 && !(s_grid[i] > s_grid[i - 1]))
      throw ArgumentError(std::string(what) + ": s grid must be increasing");
  }
  std::vector<double> ratios;
  ratios.reserve(s_grid.size());
  for (double s : s_grid) {
    const double at_s = sign * eps * std::log(s) + L.log_eval(s);
    double best = at_s;
    for (double tau : karamata_mesh(lo, s)) {
      const double v = sign * eps * std::log(tau) + L.log_eval(tau);
      if (better(v, best)) best = v;
    }
    ratios.push_back(std::exp(best - at_s));
  }
  return ratios;
}
}  // namespace detail

/// For each s: sup_{N0 <= tau <= s} tau^eps L(tau) / (s^eps L(s)).
inline std::vector<double> karamata_sup_check(const SlowVarying& L, double eps,
                                              const std::vector<double>& s_grid) {
  return detail::karamata_extremum(L, eps, s_grid, 1.0, std::greater<double>{}, "karamata_sup_check");
}

/// For each s: inf_{N0 <= tau <= s} tau^{-eps} L(tau) / (s^{-eps} L(s)).
inline std::vector<double> karamata_inf_check(const SlowVarying& L, double eps,
                                              const std::vector<double>& s_grid) {
  return detail::karamata_extremum(L, eps, s_grid, -1.0, std::less<double>{}, "karamata_inf_check");
}

/// Default convergence tolerance for the Karamata checks of a family.
inline double karamata_tolerance(const SlowVarying& L) {
  return L.family() == SlowFamily::Oscillating ? 5e-2 : 1e-6;
}

}  // namespace nldecay
