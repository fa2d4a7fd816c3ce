// Command-line runner: series, kernel, solve, suite and check subcommands.
//
// Exit codes: 0 pass, 1 verdict failure or manifest mismatch, 2 usage,
// configuration or argument error, 3 numerical guard.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nldecay/config.hpp"
#include "nldecay/decayfit.hpp"
#include "nldecay/io.hpp"
#include "nldecay/kernels.hpp"
#include "nldecay/scenarios.hpp"
#include "nldecay/solver.hpp"
#include "nldecay/xseries.hpp"

namespace fs = std::filesystem;
using namespace nldecay;

namespace {

struct Options {
  std::string config_path;
  std::string out;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
  bool plot = false;
  bool check = false;
};

class Stopwatch {
 public:
  void lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    stages_[name] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }
  const nlohmann::json& stages() const { return stages_; }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  nlohmann::json stages_ = nlohmann::json::object();
};

ExperimentConfig load_config(const Options& o) {
  ExperimentConfig c;
  if (!o.config_path.empty()) c = ExperimentConfig::parse(read_file(o.config_path));
  if (o.seed) c.seed = *o.seed;
  return c;
}

fs::path out_dir(const Options& o, const ExperimentConfig& c) { return o.out.empty() ? fs::path(c.output) : fs::path(o.out); }

// Writes outputs and manifest, or with --check compares them with the manifest already in place.
int finish(const Options& o, const fs::path& dir, const FileCollector& files, nlohmann::json manifest, int status) {
  if (o.check) {
    const auto bad = files.check(dir);
    for (const auto& b : bad) std::cerr << "check: " << b << '\n';
    if (!bad.empty()) return 1;
    std::cout << "check: " << files.files().size() << " files match " << (dir / "manifest.json").string() << '\n';
    return status;
  }
  manifest["version"] = kVersion;
  files.write(dir, manifest);
  return status;
}

std::vector<std::string> row(std::initializer_list<std::string> cells) { return cells; }

int cmd_series(const Options& o) {
  Stopwatch sw;
  const auto c = load_config(o);
  if (!c.series) throw ArgumentError("config: series command needs a 'series' section");
  const auto grid = geometric_grid(c.series->t_lo, c.series->t_hi, c.series->ratio);
  sw.lap("setup");
  const auto res = verify_series_asymptotics(c.series->spec, grid);
  sw.lap("series");

  CsvTable csv({"t", "ratio"});
  for (std::size_t i = 0; i < res.t_grid.size(); ++i) csv.row(row({fmt(res.t_grid[i]), fmt(res.ratios[i])}));
  FileCollector files;
  files.add("series_ratios.csv", csv.str());
  if (o.plot)
    files.add("series_ratios.svg",
              svg_loglog("series / R(alpha t) e^{alpha t}", {{"ratio", res.t_grid, res.ratios, false}}, c.hash()));

  std::printf("series: verdict %s, top-decade spread %.6g, final ratio %.6g\n", to_string(res.verdict),
              res.top_decade_spread, res.ratios.back());
  nlohmann::json m{{"command", "series"},
                   {"config_hash", c.hash()},
                   {"seed", c.seed},
                   {"stages", sw.stages()},
                   {"verdicts",
                    {{{"verdict", to_string(res.verdict)},
                      {"top_decade_spread", res.top_decade_spread},
                      {"decade_spreads", res.decade_spreads}}}}};
  return finish(o, out_dir(o, c), files, m, res.verdict == SeriesVerdict::Bounded ? 0 : 1);
}

int cmd_kernel(const Options& o) {
  Stopwatch sw;
  const auto c = load_config(o);
  const auto& kr = c.kernel_run;
  const GridKernel J = make_kernel(c.scenario.kernel);
  const long km = k_max(J, kr.k_hi);
  if (kr.k_hi > km)
    throw PeriodizationError("kernel: requested k_hi = " + std::to_string(kr.k_hi) + " exceeds k_max = " +
                                 std::to_string(km) + " for this grid; enlarge X",
                             static_cast<int>(kr.k_hi), 0.0);
  sw.lap("kernel");

  Transform tr(J.grid());
  CsvTable csv({"k", "sup_norm", "l1_norm", "bound", "wraparound_estimate"});
  std::vector<double> ks, sups, bounds, fit_x, fit_y;
  bool bound_holds = true;
  for (long k = kr.k_lo; k <= kr.k_hi; ++k) {
    const auto p = convolution_power(J, k, tr);
    const auto b = sharp_young_bound(J, k, kr.gamma_probe);
    csv.row(row({std::to_string(k), fmt(p.sup_norm), fmt(p.l1_norm), fmt(b.bound), fmt(p.wraparound_estimate)}));
    ks.push_back(static_cast<double>(k));
    sups.push_back(p.sup_norm);
    bounds.push_back(b.bound);
    bound_holds = bound_holds && p.sup_norm <= b.bound;
    if (k >= kr.slope_lo && k <= kr.slope_hi) {
      fit_x.push_back(std::log(static_cast<double>(k)));
      fit_y.push_back(std::log(p.sup_norm));
    }
  }
  sw.lap("powers");
  std::optional<double> slope;
  if (fit_x.size() >= 2) slope = least_squares_line(fit_x, fit_y).slope;

  FileCollector files;
  files.add("kernel_norms.csv", csv.str());
  files.add("kernel.bin", dump_array(c.scenario.kernel.to_json(), {J.samples().begin(), J.samples().end()}));
  if (o.plot)
    files.add("kernel_norms.svg", svg_loglog(std::string("sup |J_k|, ") + to_string(J.family()),
                                             {{"sup_norm", ks, sups, false}, {"sharp Young bound", ks, bounds, true}},
                                             c.hash()));
  std::printf("kernel %s: k_max %ld, slope %s, sup <= bound for all k: %s\n", to_string(J.family()), km,
              slope ? fmt(*slope).c_str() : "n/a", bound_holds ? "yes" : "no");
  for (const auto& a : J.advisories()) std::printf("advisory: %s\n", a.c_str());
  nlohmann::json summary{{"family", to_string(J.family())},
                         {"k_max", km},
                         {"bound_holds", bound_holds},
                         {"entropy", fmt(kernel_entropy(J))},
                         {"symmetry_defect", symmetry_defect(J)},
                         {"signed", J.is_signed()},
                         {"advisories", J.advisories()}};
  if (slope) summary["slope"] = *slope;
  nlohmann::json m{{"command", "kernel"},
                   {"config_hash", c.hash()},
                   {"seed", c.seed},
                   {"stages", sw.stages()},
                   {"verdicts", {summary}}};
  return finish(o, out_dir(o, c), files, m, 0);
}

void add_scenario_files(FileCollector& files, const ScenarioResult& r, const std::string& prefix, bool plot,
                        const std::string& hash) {
  CsvTable norms({"t", "method", "p", "norm"});
  for (const auto& x : r.rows) norms.row(row({fmt(x.t), to_string(x.method), to_string(x.p), fmt(x.norm)}));
  files.add(prefix + "norms.csv", norms.str());
  CsvTable ratios({"t", "p", "compensated_ratio"});
  for (const auto& rep : r.reports)
    for (std::size_t i = 0; i < rep.times.size(); ++i)
      ratios.row(row({fmt(rep.times[i]), to_string(rep.p), fmt(rep.compensated_ratios[i])}));
  files.add(prefix + "ratios.csv", ratios.str());
  if (!plot) return;
  std::vector<PlotSeries> series;
  for (Norm p : r.spec.norms) {
    PlotSeries s{std::string("p = ") + to_string(p), {}, {}, false};
    for (const auto& x : r.rows)
      if (x.p == p && x.method == Method::Spectral) {
        s.x.push_back(x.t);
        s.y.push_back(x.norm);
      }
    series.push_back(std::move(s));
  }
  for (const auto& rep : r.reports) {
    if (rep.times.empty()) continue;
    PlotSeries guide{std::string("predicted slope -") + fmt(rep.beta_expected) + ", p = " + to_string(rep.p), {}, {}, true};
    for (double t : {rep.times.front(), rep.times.back()}) {
      guide.x.push_back(t);
      guide.y.push_back(rep.norms.front() * std::pow(t / rep.times.front(), -rep.beta_expected));
    }
    series.push_back(std::move(guide));
  }
  files.add(prefix + "norms.svg", svg_loglog(r.spec.name.empty() ? to_string(r.spec.source) : r.spec.name, series, hash));
}

void print_reports(const ScenarioResult& r) {
  for (const auto& rep : r.reports)
    std::printf("%-18s p=%-3s expected -%.4f fitted %.4f (stderr %.2g) ratio spread %.4f: %s\n",
                (r.spec.name.empty() ? to_string(r.spec.source) : r.spec.name.c_str()), to_string(rep.p),
                rep.beta_expected, rep.fitted_exponent, rep.exponent_stderr, rep.ratio_spread, to_string(rep.verdict));
}

nlohmann::json reports_json(const ScenarioResult& r) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& rep : r.reports) a.push_back(rep.to_json());
  return a;
}

int cmd_solve(const Options& o) {
  Stopwatch sw;
  const auto c = load_config(o);
  const auto res = run_theorem_suite(c.scenario);
  sw.lap("solve_and_fit");
  FileCollector files;
  add_scenario_files(files, res, "", o.plot, c.hash());
  print_reports(res);
  nlohmann::json m{{"command", "solve"},
                   {"config_hash", c.hash()},
                   {"seed", c.seed},
                   {"stages", sw.stages()},
                   {"verdicts", reports_json(res)}};
  return finish(o, out_dir(o, c), files, m, res.verdict() == Verdict::Pass ? 0 : 1);
}

int cmd_suite(const Options& o) {
  Stopwatch sw;
  const auto c = load_config(o);
  const auto specs = default_scenarios();
  nlohmann::json all = nlohmann::json::array();
  for (const auto& s : specs) {
    ExperimentConfig sc;
    sc.scenario = s;
    sc.seed = c.seed;
    all.push_back(sc.to_json());
  }
  const std::string hash = hex64(fnv1a64(all.dump()));
  const auto results = run_scenarios(specs, o.workers);
  sw.lap("scenarios");

  FileCollector files;
  CsvTable summary({"scenario", "p", "beta_expected", "fitted_exponent", "exponent_stderr", "ratio_spread", "verdict"});
  nlohmann::json verdicts = nlohmann::json::array();
  bool ok = true;
  for (const auto& r : results) {
    add_scenario_files(files, r, r.spec.name + "_", o.plot, hash);
    print_reports(r);
    for (const auto& rep : r.reports) {
      summary.row(row({r.spec.name, to_string(rep.p), fmt(rep.beta_expected), fmt(rep.fitted_exponent),
                       fmt(rep.exponent_stderr), fmt(rep.ratio_spread), to_string(rep.verdict)}));
      verdicts.push_back(rep.to_json());
    }
    ok = ok && r.verdict() == Verdict::Pass;
  }
  files.add("suite.csv", summary.str());
  nlohmann::json m{{"command", "suite"},
                   {"config_hash", hash},
                   {"seed", c.seed},
                   {"workers", o.workers},
                   {"stages", sw.stages()},
                   {"verdicts", verdicts}};
  return finish(o, o.out.empty() ? fs::path(c.output) : fs::path(o.out), files, m, ok ? 0 : 1);
}

int cmd_check(const Options& o) {
  if (o.out.empty()) throw ArgumentError("check: --out DIR is required");
  const auto bad = verify_manifest(o.out);
  for (const auto& b : bad) std::cerr << "check: " << b << '\n';
  if (bad.empty()) std::cout << "check: all files in " << o.out << " match the manifest\n";
  return bad.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decay experiments for nonlocal diffusion equations"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides the config)");
    sub->add_option("--workers", o.workers, "scenario-level worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "seed recorded with the run (overrides the config)");
    sub->add_flag("--plot", o.plot, "also emit SVG plots");
    sub->add_flag("--check", o.check, "compare outputs with the existing manifest instead of writing");
  };
  auto* series = app.add_subcommand("series", "ratio of the modified exponential series to R(alpha t) e^{alpha t}");
  auto* kernel = app.add_subcommand("kernel", "convolution-power norms and sharp Young bounds");
  auto* solve = app.add_subcommand("solve", "evolve one scenario and fit its decay rate");
  auto* suite = app.add_subcommand("suite", "run every built-in decay scenario");
  auto* check = app.add_subcommand("check", "verify output hashes against a manifest");
  for (auto* s : {series, kernel, solve, suite, check}) common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (series->parsed()) return cmd_series(o);
    if (kernel->parsed()) return cmd_kernel(o);
    if (solve->parsed()) return cmd_solve(o);
    if (suite->parsed()) return cmd_suite(o);
    if (check->parsed()) return cmd_check(o);
  } catch (const PeriodizationError& e) {
    std::cerr << "periodization error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalGuard& e) {
    std::cerr << "numerical guard: " << e.what() << '\n';
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
