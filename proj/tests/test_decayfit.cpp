#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nldecay/decayfit.hpp"
#include "nldecay/scenarios.hpp"
#include "nldecay/xseries.hpp"

using namespace nldecay;

namespace {

KernelDescriptor box_desc(std::size_t M = 1u << 15) {
  KernelDescriptor d;
  d.family = KernelFamily::Box;
  d.grid = Grid{1, box_aligned_half_width(M, 63), M};
  d.params.width = 1.0;
  return d;
}

std::vector<double> sample(const std::vector<double>& t, double (*f)(double)) {
  std::vector<double> v;
  for (double s : t) v.push_back(f(s));
  return v;
}

DecayTarget power_target(double beta) {
  DecayTarget d;
  d.beta_expected = beta;
  return d;
}

DecayTarget log_target(double beta, double mu) {
  DecayTarget d;
  d.beta_expected = beta;
  d.L_correction = SlowVarying::iter_log_power({mu});
  d.log_power = -beta;
  return d;
}

// measured(k0) * margin / shape(k0) * shape(k)
RegVarying calibrated(const HypothesisReport& probe, const RegVarying& shape, double margin) {
  const double k0 = static_cast<double>(probe.k.front());
  return {shape.index, shape.slow.scaled(margin * probe.measured.front() / shape.eval(k0))};
}

}  // namespace

TEST(FitDecay, ExactPowerLaw) {
  const auto t = quarter_octave_times(100.0, 1e4);
  const auto r = fit_decay(t, sample(t, [](double s) { return 3.0 / std::sqrt(s); }), power_target(0.5), 100.0, 1e4,
                           0.02);
  EXPECT_NEAR(r.fitted_exponent, -0.5, 1e-12);
  EXPECT_LT(r.exponent_stderr, 1e-12);
  EXPECT_NEAR(r.ratio_spread, 1.0, 1e-12);
  EXPECT_NEAR(r.compensated_ratios.front(), 3.0, 1e-12);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_EQ(r.times.size(), t.size());
}

TEST(FitDecay, LogCorrectionDividedOut) {
  const auto t = quarter_octave_times(100.0, 1e4);
  const auto norm = sample(t, [](double s) { return 1.0 / (s * std::log(s)); });
  const auto r = fit_decay(t, norm, log_target(1.0, 1.0), 100.0, 1e4);
  EXPECT_NEAR(r.fitted_exponent, -1.0, 1e-3);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(FitDecay, MissingLogFactorFails) {
  const auto t = quarter_octave_times(100.0, 1e4);
  const auto r = fit_decay(t, sample(t, [](double s) { return 1.0 / s; }), log_target(1.0, 1.0), 100.0, 1e4, 0.05, 1.5);
  // Compensated ratio is ln t, drifting by ln(t_last)/ln(t_first), close to 2.
  EXPECT_NEAR(r.ratio_spread, std::log(t.back()) / std::log(t.front()), 1e-12);
  EXPECT_GT(r.ratio_spread, 1.5);
  EXPECT_EQ(r.verdict, Verdict::Fail);
}

TEST(FitDecay, NoisyDataIsInconclusive) {
  const auto t = quarter_octave_times(100.0, 1e4);
  std::vector<double> norm;
  for (std::size_t i = 0; i < t.size(); ++i) norm.push_back(std::exp(i % 2 ? 1.5 : -1.5) / std::sqrt(t[i]));
  const auto r = fit_decay(t, norm, power_target(0.5), 100.0, 1e4);
  EXPECT_GT(r.exponent_stderr, 0.05);
  EXPECT_EQ(r.verdict, Verdict::Inconclusive);
}

TEST(FitDecay, WindowAndDataErrors) {
  const auto t = quarter_octave_times(100.0, 1e4);
  auto norm = sample(t, [](double s) { return 1.0 / s; });
  EXPECT_THROW(fit_decay(t, norm, power_target(1.0), 100.0, 100.0 * std::pow(2.0, 2.5)), ArgumentError);
  EXPECT_THROW(fit_decay(t, norm, power_target(1.0), 100.0, 2000.0), ArgumentError);
  EXPECT_THROW(fit_decay(t, std::vector<double>(3, 1.0), power_target(1.0), 100.0, 1e4), ArgumentError);
  EXPECT_THROW(fit_decay(t, norm, power_target(1.0), 0.0, 1e4), ArgumentError);
  EXPECT_THROW(fit_decay(t, norm, power_target(1.0), 100.0, 1e4, 0.0), ArgumentError);
  EXPECT_THROW(fit_decay(t, norm, power_target(1.0), 100.0, 1e4, 0.05, 0.5), ArgumentError);
  norm[5] = 0.0;
  EXPECT_THROW(fit_decay(t, norm, power_target(1.0), 100.0, 1e4), DataError);
  norm[5] = NAN;
  EXPECT_THROW(fit_decay(t, norm, power_target(1.0), 100.0, 1e4), DataError);
  // Points outside the window are ignored even when invalid.
  norm[5] = 1.0 / t[5];
  norm.push_back(-1.0);
  auto tt = t;
  tt.push_back(1e6);
  EXPECT_EQ(fit_decay(tt, norm, power_target(1.0), 100.0, 1e4).verdict, Verdict::Pass);
}

TEST(FitDecay, LineFitAndMonotonicity) {
  const auto f = least_squares_line({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
  EXPECT_NEAR(f.slope, 2.0, 1e-15);
  EXPECT_NEAR(f.intercept, 1.0, 1e-15);
  EXPECT_THROW(least_squares_line({1.0, 1.0}, {0.0, 1.0}), FitError);
  EXPECT_EQ(monotone_direction({1.0, 2.0, 3.0}), 1);
  EXPECT_EQ(monotone_direction({3.0, 2.0, 1.0}), -1);
  EXPECT_EQ(monotone_direction({1.0, 2.0, 2.0}), 0);
  EXPECT_EQ(monotone_direction({1.0}), 0);
}

TEST(FitDecay, RecoversSeriesIndex) {
  const auto t = quarter_octave_times(100.0, 1e4);
  for (double index : {-0.5, -1.0, -2.0}) {
    SeriesSpec spec;
    spec.start = 1;
    spec.R = RegVarying{index, SlowVarying::constant(1.0)};
    std::vector<double> norm;
    for (double s : t) norm.push_back(std::exp(poisson_weighted_sum(spec, s)));
    const auto r = fit_decay(t, norm, power_target(-index), 100.0, 1e4);
    EXPECT_NEAR(r.fitted_exponent / index, 1.0, 0.02) << "index " << index;
    EXPECT_EQ(r.verdict, Verdict::Pass);
  }
}

TEST(HypothesisH1, BoxSharpYoungRate) {
  const auto J = make_kernel(box_desc());
  const RegVarying R{-0.5, SlowVarying::constant(std::exp(0.5))};
  const auto rep = hypothesis_H1_check(J, R, 1, 1, 1024);
  EXPECT_TRUE(rep.holds);
  EXPECT_FALSE(rep.first_violation);
  EXPECT_EQ(rep.k.size(), 1024u);
  EXPECT_NEAR(rep.measured.front(), 1.0, 1e-12);
  EXPECT_LE(rep.worst_ratio, 1.0);
}

TEST(HypothesisH1, ConstructedViolation) {
  const auto J = make_kernel(box_desc());
  const auto rep = hypothesis_H1_check(J, RegVarying{-0.5, SlowVarying::constant(0.01)}, 1, 1, 64);
  EXPECT_FALSE(rep.holds);
  ASSERT_TRUE(rep.first_violation);
  EXPECT_EQ(*rep.first_violation, 1);
  EXPECT_GT(rep.worst_ratio, 1.0);
}

TEST(HypothesisH1, GaussianBelowInverseRoot) {
  KernelDescriptor d;
  d.family = KernelFamily::Gaussian;
  d.grid = Grid{1, 256.0, 1u << 13};
  const auto J = make_kernel(d);
  const auto rep = hypothesis_H1_check(J, RegVarying{-0.5, SlowVarying::constant(1.0)}, 1, 1, 512);
  EXPECT_TRUE(rep.holds);
  // Closed form 1/sqrt(2 pi k).
  for (std::size_t i = 0; i < rep.k.size(); i += 37)
    EXPECT_NEAR(rep.measured[i] * std::sqrt(2.0 * std::numbers::pi * rep.k[i]), 1.0, 1e-6);
}

TEST(HypothesisH1, RangeGuards) {
  const auto J = make_kernel(box_desc(1u << 12));
  const RegVarying R{-0.5, SlowVarying::constant(2.0)};
  EXPECT_THROW(hypothesis_H1_check(J, R, 0, 1, 4), ArgumentError);
  EXPECT_THROW(hypothesis_H1_check(J, R, 4, 2, 8), ArgumentError);
  EXPECT_THROW(hypothesis_H1_check(J, R, 1, 8, 4), ArgumentError);
  EXPECT_THROW(hypothesis_H1_check(J, R, 1, 1, 1 << 20), PeriodizationError);
}

TEST(HypothesisH2, L1Contraction) {
  const auto J = make_kernel(box_desc());
  const auto u0 = InitialData::box(J.grid(), 2.0);
  const RegVarying R{0.0, SlowVarying::constant(u0.l1_norm() * 1.0001)};
  EXPECT_TRUE(hypothesis_H2_check(J, u0, R, 1, Norm::L1, 1, 512).holds);
}

TEST(HypothesisH2, StableSymbolInverseK) {
  KernelDescriptor d;
  d.family = KernelFamily::StableSymbol;
  d.grid = Grid{1, 8192.0, 1u << 16};
  d.params.sigma = 1.0;
  d.params.A = 1.0;
  const auto J = make_kernel(d);
  const auto u0 = InitialData::gaussian(J.grid(), 2.0);
  const RegVarying shape{-1.0, SlowVarying::constant(1.0)};
  const auto probe = hypothesis_H2_check(J, u0, shape, 8, Norm::Inf, 8, 8);
  const auto rep = hypothesis_H2_check(J, u0, calibrated(probe, shape, 1.25), 8, Norm::Inf, 8, 512);
  EXPECT_TRUE(rep.holds) << "first violation at k = " << rep.first_violation.value_or(-1);
  // k ||J^k u0||_inf approaches the Cauchy peak 1/pi from below.
  EXPECT_NEAR(rep.measured.back() * 512.0 * std::numbers::pi, 1.0, 0.02);
}

TEST(HypothesisH2, LogPerturbedRate) {
  KernelDescriptor d;
  d.family = KernelFamily::LogPerturbedSymbol;
  d.grid = Grid{1, 2048.0, 1u << 14};
  d.params.sigma = 2.0;
  d.params.mu = 1.0;
  d.params.A = 1.0;
  const auto J = make_kernel(d);
  const auto u0 = InitialData::gaussian(J.grid(), 1.0);
  const RegVarying shape{-0.5, SlowVarying::iter_log_power({-0.5})};
  const auto probe = hypothesis_H2_check(J, u0, shape, 8, Norm::Inf, 8, 8);
  const auto rep = hypothesis_H2_check(J, u0, calibrated(probe, shape, 1.25), 8, Norm::Inf, 8, 512);
  EXPECT_TRUE(rep.holds) << "first violation at k = " << rep.first_violation.value_or(-1);
}

TEST(Targets, ExponentsFollowDimensionOrderAndNorm) {
  auto s = stable_scenario(1.5);
  EXPECT_NEAR(theorem_target(s, Norm::Inf).beta_expected, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(theorem_target(s, Norm::L2).beta_expected, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(theorem_target(s, Norm::L1).beta_expected, 0.0);
  const auto lp = theorem_target(log_perturbed_scenario(-1.0), Norm::Inf);
  EXPECT_NEAR(lp.beta_expected, 0.5, 1e-15);
  EXPECT_NEAR(lp.log_power, -0.5, 1e-15);
  EXPECT_NEAR(lp.log_rate(1e3), -0.5 * std::log(1e3) + 0.5 * std::log(std::log(1e3)), 1e-12);
  s.source = TheoremId::Thm4_3;
  EXPECT_THROW(theorem_target(s, Norm::Inf), ArgumentError);
  for (auto id : {TheoremId::Thm4_3, TheoremId::Cor5_2, TheoremId::Thm5_4, TheoremId::Sec6, TheoremId::H1H2_abstract})
    EXPECT_EQ(theorem_from_string(to_string(id)), id);
  EXPECT_THROW(theorem_from_string("Unknown"), ArgumentError);
}

TEST(Targets, FlatteningTime) {
  const auto s = stable_scenario(1.0);
  const double xi = std::numbers::pi / s.kernel.grid.half_width;
  EXPECT_NEAR(*flattening_time(s.kernel), 1.0 / (2.0 * xi), 1e-9);
  KernelDescriptor p;
  p.family = KernelFamily::PathologicalLogTail;
  EXPECT_FALSE(flattening_time(p));
}

TEST(Suite, BoxNormsInterpolate) {
  const auto res = run_theorem_suite(box_scenario());
  ASSERT_EQ(res.reports.size(), 3u);
  std::map<Norm, double> beta;
  for (const auto& r : res.reports) {
    beta[r.p] = -r.fitted_exponent;
    EXPECT_EQ(r.verdict, Verdict::Pass) << to_string(r.p);
  }
  EXPECT_NEAR(beta[Norm::Inf], 0.5, 0.03);
  EXPECT_NEAR(beta[Norm::L2], 0.5 * beta[Norm::Inf], 0.05);
  EXPECT_NEAR(beta[Norm::L1], 0.0, 0.05);
  EXPECT_EQ(res.verdict(), Verdict::Pass);
}

TEST(Suite, StableSymbolOrderOne) {
  const auto res = run_theorem_suite(stable_scenario(1.0));
  EXPECT_NEAR(res.reports.front().fitted_exponent, -1.0, 0.05);
  EXPECT_EQ(res.verdict(), Verdict::Pass);
}

TEST(Suite, LogPerturbedCompensatedRatioBounded) {
  const auto res = run_theorem_suite(log_perturbed_scenario(1.0));
  const auto& r = res.reports.front();
  EXPECT_LE(r.ratio_spread, 2.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_EQ(r.t_lo, 100.0);
  EXPECT_EQ(r.t_hi, 1e4);
}

TEST(Suite, PrescribedGammaRuleEnforced) {
  auto s = prescribed_scenario(true);
  s.kernel.params.gamma = s.kernel.params.sigma;
  EXPECT_THROW(run_theorem_suite(s), ArgumentError);
  auto d = prescribed_scenario(false);
  d.kernel.params.gamma = 2.0 * d.kernel.params.sigma;
  EXPECT_THROW(run_theorem_suite(d), ArgumentError);
}

TEST(Suite, AbstractClosure) {
  const auto res = run_theorem_suite(abstract_scenario());
  ASSERT_TRUE(res.h2);
  EXPECT_TRUE(res.h2->holds);
  EXPECT_EQ(res.reports.front().verdict, Verdict::Pass);
}

TEST(Suite, ParallelRunKeepsOrder) {
  auto a = box_scenario();
  a.norms = {Norm::Inf};
  auto b = gaussian_scenario();
  b.norms = {Norm::Inf};
  const auto serial = run_scenarios({a, b}, 1);
  const auto parallel = run_scenarios({a, b}, 2);
  ASSERT_EQ(parallel.size(), 2u);
  EXPECT_EQ(parallel[0].spec.name, "box");
  EXPECT_EQ(parallel[1].spec.name, "gaussian");
  for (std::size_t i = 0; i < 2; ++i)
    EXPECT_EQ(parallel[i].reports.front().fitted_exponent, serial[i].reports.front().fitted_exponent);
}

TEST(Suite, ReportJson) {
  const auto t = quarter_octave_times(100.0, 1e4);
  auto r = fit_decay(t, sample(t, [](double s) { return 1.0 / s; }), power_target(1.0), 100.0, 1e4);
  r.scenario = "synthetic";
  r.t_flat = 5e5;
  const auto j = r.to_json();
  EXPECT_EQ(j.at("verdict"), "pass");
  EXPECT_EQ(j.at("scenario"), "synthetic");
  EXPECT_EQ(j.at("window")[1], 1e4);
  EXPECT_EQ(j.at("t_flat"), 5e5);
}
