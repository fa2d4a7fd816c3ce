#pragma once

// Default decay scenarios. Grids are sized so that each kernel is resolved
// by at least four cells and the fit window ends well before the grid's
// flattening time.

#include <string>
#include <vector>

#include "nldecay/decayfit.hpp"

namespace nldecay {

namespace detail {

inline ScenarioSpec symbol_scenario(std::string name, TheoremId src, KernelFamily fam, std::size_t M, double X) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.source = src;
  s.kernel.family = fam;
  s.kernel.grid = Grid{1, X, M};
  return s;
}

}  // namespace detail

inline ScenarioSpec box_scenario() {
  ScenarioSpec s;
  s.name = "box";
  s.source = TheoremId::Thm4_3;
  s.kernel.family = KernelFamily::Box;
  s.kernel.grid = Grid{1, box_aligned_half_width(1u << 16, 63), 1u << 16};
  s.kernel.params.width = 1.0;
  s.norms = {Norm::Inf, Norm::L2, Norm::L1};
  return s;
}

inline ScenarioSpec gaussian_scenario() {
  ScenarioSpec s;
  s.name = "gaussian";
  s.source = TheoremId::Thm4_3;
  s.kernel.family = KernelFamily::Gaussian;
  s.kernel.grid = Grid{1, 1024.0, 1u << 14};
  s.kernel.params.variance = 1.0;
  s.norms = {Norm::Inf, Norm::L2, Norm::L1};
  return s;
}

/// StableSymbol scenario for sigma in {0.5, 1, 1.5}; tolerance is 7% of the predicted exponent.
inline ScenarioSpec stable_scenario(double sigma) {
  ScenarioSpec s;
  if (sigma == 0.5) {
    s = detail::symbol_scenario("stable_sigma0.5", TheoremId::Cor5_2, KernelFamily::StableSymbol, 1u << 20, 524288.0);
    s.kernel.params.A = 2.0;
    s.u0.width = 4.0;
    s.t_lo = s.window_lo = 10.0;
    s.t_hi = s.window_hi = 320.0;
  } else if (sigma == 1.0) {
    s = detail::symbol_scenario("stable_sigma1", TheoremId::Cor5_2, KernelFamily::StableSymbol, 1u << 19, 131072.0);
    s.kernel.params.A = 2.0;
    s.u0.width = 2.0;
  } else if (sigma == 1.5) {
    s = detail::symbol_scenario("stable_sigma1.5", TheoremId::Cor5_2, KernelFamily::StableSymbol, 1u << 16, 8192.0);
    s.kernel.params.A = 1.0;
  } else {
    throw ArgumentError("stable_scenario: sigma must be one of 0.5, 1, 1.5");
  }
  s.kernel.params.sigma = sigma;
  s.tolerance = 0.07 / sigma;
  return s;
}

inline ScenarioSpec log_perturbed_scenario(double mu) {
  auto s = detail::symbol_scenario(mu > 0 ? "log_perturbed_mu+1" : "log_perturbed_mu-1", TheoremId::Thm5_4,
                                   KernelFamily::LogPerturbedSymbol, 1u << 17, 16384.0);
  s.kernel.params.sigma = 2.0;
  s.kernel.params.mu = mu;
  s.kernel.params.A = 1.0;
  return s;
}

/// Prescribed decay (t L(t))^{-1/2} in sup norm on the line, so sigma = 2.
inline ScenarioSpec prescribed_scenario(bool increasing_log) {
  const auto ln = SlowVarying::iter_log_power({1.0});
  auto s = detail::symbol_scenario(increasing_log ? "prescribed_ln" : "prescribed_inv_ln", TheoremId::Sec6,
                                   KernelFamily::PrescribedSymbol, 1u << 17, 16384.0);
  const auto design = prescribed_symbol_design(0.5, 1, std::numeric_limits<double>::infinity(),
                                               increasing_log ? ln : ln.reciprocal());
  s.kernel.params.sigma = design.sigma;
  s.kernel.params.gamma = design.gamma;
  s.kernel.params.A = 1.0;
  s.kernel.params.L = increasing_log ? ln : ln.reciprocal();
  return s;
}

/// Box kernel with R(k) calibrated at k = N to the measured ||J^N u0||_inf and index -1/2.
inline ScenarioSpec abstract_scenario() {
  auto s = box_scenario();
  s.name = "abstract_box";
  s.source = TheoremId::H1H2_abstract;
  s.norms = {Norm::Inf};
  s.abstract = AbstractSpec{};
  return s;
}

inline std::vector<ScenarioSpec> default_scenarios() {
  return {box_scenario(),
          gaussian_scenario(),
          stable_scenario(0.5),
          stable_scenario(1.0),
          stable_scenario(1.5),
          log_perturbed_scenario(1.0),
          log_perturbed_scenario(-1.0),
          prescribed_scenario(true),
          prescribed_scenario(false),
          abstract_scenario()};
}

}  // namespace nldecay
