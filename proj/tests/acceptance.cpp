// Acceptance run: one line per criterion, exit status 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nldecay/decayfit.hpp"
#include "nldecay/kernels.hpp"
#include "nldecay/regvar.hpp"
#include "nldecay/scenarios.hpp"
#include "nldecay/solver.hpp"
#include "nldecay/xseries.hpp"

using namespace nldecay;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[violated] " << what << "; ";
    }
  }
};

using Body = std::function<void(Outcome&)>;

double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

bool run(int id, const char* title, const Body& body) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << "[exception] " << e.what();
  }
  std::printf("criterion %2d: %s  %s (%.1f s) %s\n", id, o.pass ? "PASS" : "FAIL", title, elapsed(start),
              o.detail.str().c_str());
  std::fflush(stdout);
  return o.pass;
}

KernelDescriptor descriptor(KernelFamily f, int n, double X, std::size_t M) {
  KernelDescriptor d;
  d.family = f;
  d.grid = Grid{n, X, M};
  return d;
}

KernelDescriptor box(std::size_t M) {
  auto d = descriptor(KernelFamily::Box, 1, box_aligned_half_width(M, 63), M);
  d.params.width = 1.0;
  return d;
}

KernelDescriptor stable(double sigma, double A, double X, std::size_t M, int n = 1) {
  auto d = descriptor(KernelFamily::StableSymbol, n, X, M);
  d.params.sigma = sigma;
  d.params.A = A;
  return d;
}

std::vector<KernelDescriptor> zoo() {
  std::vector<KernelDescriptor> z{box(1u << 13)};
  auto tent = descriptor(KernelFamily::Tent, 1, 64.0, 1u << 12);
  tent.params.tent_radius = 1.0;
  z.push_back(tent);
  z.push_back(descriptor(KernelFamily::Gaussian, 1, 128.0, 1u << 12));
  z.push_back(stable(1.0, 1.0, 512.0, 1u << 13));
  z.push_back(stable(0.5, 2.0, 4096.0, 1u << 13));
  z.push_back(stable(1.5, 1.0, 512.0, 1u << 12));
  auto lp = descriptor(KernelFamily::LogPerturbedSymbol, 1, 256.0, 1u << 12);
  lp.params.sigma = 2.0;
  lp.params.mu = 1.0;
  z.push_back(lp);
  auto ps = descriptor(KernelFamily::PrescribedSymbol, 1, 256.0, 1u << 12);
  ps.params.sigma = 2.0;
  ps.params.gamma = 4.0;
  ps.params.L = SlowVarying::iter_log_power({1.0});
  z.push_back(ps);
  z.push_back(descriptor(KernelFamily::PathologicalLogTail, 1, 256.0, 1u << 12));
  z.push_back(descriptor(KernelFamily::Gaussian, 2, 32.0, 256));
  z.push_back(stable(1.0, 1.0, 32.0, 256, 2));
  return z;
}

const DecayReport& report_for(const ScenarioResult& r, Norm p) {
  for (const auto& rep : r.reports)
    if (rep.p == p) return rep;
  throw ArgumentError("scenario " + r.spec.name + " has no report for p = " + to_string(p));
}

std::string fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void series_asymptotics(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto ln = SlowVarying::iter_log_power({1.0});
  const std::vector<std::pair<const char*, SlowVarying>> Ls{
      {"1", SlowVarying::constant(1.0)}, {"ln", ln}, {"ln^2", SlowVarying::iter_log_power({2.0})}, {"1/ln", ln.reciprocal()}};
  const auto grid = geometric_grid(1e2, 1e4, std::pow(10.0, 0.1));
  double worst = 0.0;
  int combos = 0;
  for (double beta : {-2.0, -1.0, -0.5, 0.0}) {
    for (const auto& [name, L] : Ls) {
      SeriesSpec spec;
      spec.start = 3;
      spec.R = RegVarying{beta, L};
      const auto res = verify_series_asymptotics(spec, grid);
      ++combos;
      worst = std::max(worst, res.top_decade_spread);
      o.require(res.verdict == SeriesVerdict::Bounded,
                "beta " + fixed(beta, 1) + ", L = " + name + " verdict " + to_string(res.verdict));
      o.require(res.top_decade_spread <= 1.25, "beta " + fixed(beta, 1) + ", L = " + name + " top-decade spread " +
                                                   fixed(res.top_decade_spread, 6));
    }
  }
  const double secs = elapsed(start);
  o.require(secs < 10.0, "runtime " + fixed(secs, 2) + " s exceeds 10 s");
  o.detail << combos << " (beta, L) combinations, worst top-decade spread " << fixed(worst, 6);
}

void kummer_bridge(Outcome& o) {
  double worst_closed = 0.0;
  for (double s : {1.0, 10.0, 100.0}) {
    // ln(M(1,2,s) s / (e^s - 1)), all in the log domain.
    const double log_ratio = log_kummer_M(1.0, 2.0, s) + std::log(s) - (s + std::log(-std::expm1(-s)));
    worst_closed = std::max(worst_closed, std::abs(std::expm1(log_ratio)));
  }
  o.require(worst_closed <= 1e-12, "closed form deviation " + std::to_string(worst_closed));
  double worst_asym = 0.0;
  for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{0.5, 3.0}}) {
    const double s = 500.0;
    const double lead = std::lgamma(b) - std::lgamma(a) + (a - b) * std::log(s) + s;
    worst_asym = std::max(worst_asym, std::abs(std::expm1(log_kummer_M(a, b, s) - lead)));
  }
  o.require(worst_asym <= 0.01, "asymptotic ratio deviation " + fixed(worst_asym, 6));
  o.detail << "M(1,2,s) s/(e^s-1) off by " << worst_closed << ", asymptotic ratio at s = 500 off by "
           << fixed(worst_asym, 5);
}

void box_power_rate(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto J = make_kernel(box(1u << 15));
  Transform tr(J.grid());
  std::vector<double> x, y;
  long violations = 0;
  for (long k = 1; k <= 1024; ++k) {
    const auto p = convolution_power(J, k, tr);
    if (p.sup_norm > sharp_young_bound(J, k, 1.0).bound) ++violations;
    if (k >= 64) {
      x.push_back(std::log(static_cast<double>(k)));
      y.push_back(std::log(p.sup_norm));
    }
  }
  const double slope = least_squares_line(x, y).slope;
  const double secs = elapsed(start);
  o.require(std::abs(slope + 0.5) <= 0.02, "slope " + fixed(slope));
  o.require(violations == 0, std::to_string(violations) + " powers above the sharp Young bound");
  o.require(secs < 30.0, "runtime " + fixed(secs, 1) + " s exceeds 30 s");
  o.detail << "slope over [64, 1024] " << fixed(slope) << ", sharp Young bound held for k = 1..1024";
}

void l1_contraction(Outcome& o) {
  long checked = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& d : zoo()) {
    const auto J = make_kernel(d);
    const long km = k_max(J);
    Transform tr(J.grid());
    const auto sym = J.symbol();
    std::vector<Complex> cur(sym.begin(), sym.end());
    for (long k = 1; k <= km; ++k) {
      if (k > 1)
        for (std::size_t i = 0; i < cur.size(); ++i) cur[i] *= sym[i];
      const double l1 = lp_norm(J.grid(), tr.from_symbol(cur), 1);
      const double excess = l1 - std::pow(J.l1_norm(), static_cast<double>(k));
      worst = std::max(worst, excess);
      ++checked;
      if (excess > 1e-8) {
        o.require(false, std::string(to_string(d.family)) + " k = " + std::to_string(k) + " excess " +
                             std::to_string(excess));
        break;
      }
    }
    o.detail << to_string(d.family) << "(n=" << d.grid.dim << ") k_max " << km << "; ";
  }
  o.detail << checked << " powers checked, largest ||J_k||_1 - ||J||_1^k = " << worst;
}

void cross_validation(Outcome& o) {
  std::vector<KernelDescriptor> kernels{box(1u << 13), descriptor(KernelFamily::Gaussian, 1, 256.0, 1u << 12),
                                        stable(1.0, 1.0, 2048.0, 1u << 14)};
  double worst = 0.0;
  int pairs = 0;
  for (const auto& d : kernels) {
    const auto J = make_kernel(d);
    const auto u0 = InitialData::gaussian(J.grid(), 1.0);
    for (double t : {1.0, 10.0, 100.0}) {
      const auto a = solve_series(J, u0, 1.0, t);
      const auto b = solve_spectral(J, u0, 1.0, t);
      double diff = 0.0;
      for (std::size_t i = 0; i < a.u.size(); ++i) diff = std::max(diff, std::abs(a.u[i] - b.u[i]));
      const double rel = diff / u0.sup_norm();
      worst = std::max(worst, rel);
      ++pairs;
      o.require(rel <= 1e-8, std::string(to_string(d.family)) + " t = " + fixed(t, 0) + " relative difference " +
                                 std::to_string(rel));
    }
  }
  o.detail << pairs << " (kernel, t) pairs, worst sup|series - spectral| / ||u0||_inf = " << worst;
}

void box_gaussian_decay(Outcome& o) {
  for (const auto& spec : {box_scenario(), gaussian_scenario()}) {
    const auto r = run_theorem_suite(spec);
    const auto& inf = report_for(r, Norm::Inf);
    const auto& two = report_for(r, Norm::L2);
    o.require(std::abs(inf.fitted_exponent + 0.5) <= 0.05, spec.name + " p=inf exponent " + fixed(inf.fitted_exponent));
    o.require(std::abs(two.fitted_exponent + 0.25) <= 0.05, spec.name + " p=2 exponent " + fixed(two.fitted_exponent));
    o.detail << spec.name << " p=inf " << fixed(inf.fitted_exponent) << ", p=2 " << fixed(two.fitted_exponent) << "; ";
  }
}

void stable_decay(Outcome& o) {
  for (double sigma : {0.5, 1.0, 1.5}) {
    const auto r = run_theorem_suite(stable_scenario(sigma));
    const double fitted = r.reports.front().fitted_exponent, expected = -1.0 / sigma;
    const double rel = std::abs(fitted / expected - 1.0);
    o.require(rel <= 0.07, "sigma " + fixed(sigma, 1) + " exponent " + fixed(fitted) + " vs " + fixed(expected));
    o.detail << "sigma " << fixed(sigma, 1) << ": " << fixed(fitted) << " (expected " << fixed(expected) << ", off "
             << fixed(100.0 * rel, 2) << "%); ";
  }
}

void log_perturbed_decay(Outcome& o) {
  for (double mu : {-1.0, 1.0}) {
    const auto r = run_theorem_suite(log_perturbed_scenario(mu));
    const auto& rep = r.reports.front();
    o.require(rep.t_lo == 1e2 && rep.t_hi == 1e4, "fit window is not [1e2, 1e4]");
    o.require(rep.ratio_spread <= 2.0, "mu " + fixed(mu, 0) + " compensated spread " + fixed(rep.ratio_spread));
    std::vector<double> power_only;
    for (std::size_t i = 0; i < rep.times.size(); ++i) power_only.push_back(rep.norms[i] * std::sqrt(rep.times[i]));
    // (ln t)^{-mu/2} falls for mu > 0 and rises for mu < 0.
    const int dir = monotone_direction(power_only);
    o.require(dir == (mu > 0 ? -1 : 1), "mu " + fixed(mu, 0) + " power-only compensation is not monotone");
    const double drift = power_only.back() / power_only.front();
    o.detail << "mu " << fixed(mu, 0) << ": log-compensated spread " << fixed(rep.ratio_spread)
             << ", power-only drift x" << fixed(drift) << (dir > 0 ? " rising" : dir < 0 ? " falling" : " mixed") << "; ";
  }
}

void prescribed_decay(Outcome& o) {
  for (bool increasing : {true, false}) {
    const auto s = prescribed_scenario(increasing);
    const auto r = run_theorem_suite(s);
    const auto& rep = r.reports.front();
    o.require(rep.ratio_spread <= 2.0, s.name + " compensated spread " + fixed(rep.ratio_spread));
    o.detail << s.name << " (sigma " << fixed(s.kernel.params.sigma, 1) << ", gamma "
             << fixed(s.kernel.params.gamma, 1) << "): spread " << fixed(rep.ratio_spread) << "; ";
  }
}

void karamata(Outcome& o) {
  const auto ln = SlowVarying::iter_log_power({1.0});
  const std::vector<std::pair<const char*, SlowVarying>> family{
      {"constant", SlowVarying::constant(3.0)},
      {"ln", ln},
      {"1/ln", ln.reciprocal()},
      {"ln^2 lnln", SlowVarying::iter_log_power({2.0, 1.0})},
      {"exp(sqrt ln)", SlowVarying::exp_log_power({0.5})},
      {"karamata", SlowVarying::karamata_preset(1.0, 0.5, 1.0, 1.5, 10.0)},
      {"oscillating", SlowVarying::oscillating()}};
  double worst_mono = 0.0, worst_osc = 0.0;
  for (const auto& [name, L] : family) {
    const double tol = karamata_tolerance(L);
    for (double eps : {0.5, 1.0}) {
      const double sup = karamata_sup_check(L, eps, {1e8})[0];
      const double inf = karamata_inf_check(L, eps, {1e8})[0];
      const double dev = std::max(std::abs(sup - 1.0), std::abs(inf - 1.0));
      (L.family() == SlowFamily::Oscillating ? worst_osc : worst_mono) =
          std::max(L.family() == SlowFamily::Oscillating ? worst_osc : worst_mono, dev);
      o.require(dev <= tol, std::string(name) + " eps " + fixed(eps, 1) + " deviation " + std::to_string(dev));
    }
  }
  o.detail << "at s = 1e8: monotone families within " << worst_mono << ", oscillating within " << fixed(worst_osc, 5);
}

void closure(Outcome& o) {
  std::vector<ScenarioSpec> specs{abstract_scenario()};

  auto gauss = gaussian_scenario();
  gauss.name = "abstract_gaussian";
  gauss.source = TheoremId::H1H2_abstract;
  gauss.norms = {Norm::Inf};
  specs.push_back(gauss);

  auto st = stable_scenario(1.5);
  st.name = "abstract_stable1.5";
  st.source = TheoremId::H1H2_abstract;
  st.abstract.beta = 1.0 / 1.5;
  st.tolerance = 0.05;
  specs.push_back(st);

  auto lp = log_perturbed_scenario(1.0);
  lp.name = "abstract_log_perturbed";
  lp.source = TheoremId::H1H2_abstract;
  lp.abstract.beta = 0.5;
  lp.abstract.L = SlowVarying::iter_log_power({-0.5});
  specs.push_back(lp);

  int holding = 0;
  for (const auto& r : run_scenarios(specs)) {
    const bool h2 = r.h2 && r.h2->holds;
    const auto v = r.reports.front().verdict;
    if (h2) {
      ++holding;
      o.require(v == Verdict::Pass, r.spec.name + ": H2 holds but the fit verdict is " + to_string(v));
    }
    o.detail << r.spec.name << " H2 " << (h2 ? "holds" : "fails") << ", fit " << to_string(v) << " (exponent "
             << fixed(r.reports.front().fitted_exponent) << "); ";
  }
  o.require(holding > 0, "no scenario satisfied H2, the implication was not exercised");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  int failed = 0;
  failed += !run(1, "series asymptotics", series_asymptotics);
  failed += !run(2, "Kummer bridge", kummer_bridge);
  failed += !run(3, "box convolution-power rate", box_power_rate);
  failed += !run(4, "L1 contraction of convolution powers", l1_contraction);
  failed += !run(5, "series vs spectral solver", cross_validation);
  failed += !run(6, "box and Gaussian decay t^-1/2", box_gaussian_decay);
  failed += !run(7, "stable symbol decay t^-1/sigma", stable_decay);
  failed += !run(8, "log-perturbed symbol decay", log_perturbed_decay);
  failed += !run(9, "prescribed decay (t L(t))^-1/2", prescribed_decay);
  failed += !run(10, "Karamata sup/inf checks", karamata);
  failed += !run(11, "H2 implies the fitted decay", closure);
  std::printf("acceptance: %d of 11 criteria passed in %.1f s\n", 11 - failed, elapsed(start));
  return failed == 0 ? 0 : 1;
}
