// hrtsim: command-line front end for the simulator and its experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hrtsim/dynamics.hpp"
#include "hrtsim/errors.hpp"
#include "hrtsim/experiments.hpp"
#include "hrtsim/io.hpp"
#include "hrtsim/metrics.hpp"
#include "hrtsim/validation.hpp"

namespace fs = std::filesystem;
using namespace hrtsim;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::optional<int> ticks;
  std::string out = "out";
  std::string config;
};

SimParams base_params(const Common& c) {
  SimParams p = c.config.empty() ? SimParams{} : parse_config(c.config);
  if (c.ticks) {
    p.ticks = *c.ticks;
    p.validate();
  }
  return p;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Base seed");
  app->add_option("--ticks", c.ticks, "Ticks per run (overrides the config)");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_option("--config", c.config, "Flat JSON parameter file");
}

void finish(const fs::path& dir, const std::string& experiment, std::uint64_t seed, const SimParams& params,
            const std::vector<RunRecord>& records, const std::string& started) {
  write_file_atomic(dir / "runs.csv", runs_csv(records));
  auto m = make_manifest(experiment, seed, params, records);
  m.started_at = started;
  m.finished_at = utc_timestamp();
  write_file_atomic(dir / "manifest.json", manifest_json(m));
}

void print_metrics(const RunMetrics& m) {
  std::printf("completed %ld (succeeded %ld), success %.2f%%\n", m.completed, m.succeeded, m.task_success_rate);
  std::printf("trust %.2f (SD %.2f), calibration error %.2f, asymmetry %s\n", m.trust_mean, m.trust_sd,
              m.calibration_error, format_g6(m.asymmetry_ratio).c_str());
  std::printf("productivity %.3f per 1000 agent-ticks, utilization %.1f%%, CPI %.3f\n", m.productivity, m.utilization,
              m.cpi);
}

int cmd_run(const Common& c, bool log) {
  const auto started = utc_timestamp();
  const SimParams p = base_params(c);
  const auto result = run_simulation(p, c.seed, log);
  const auto m = compute_run_metrics(result, p);
  const fs::path dir = c.out;
  write_file_atomic(dir / "run.json", run_result_to_json(result).dump() + "\n");
  finish(dir, "run", c.seed, p, {{"run", "single", 0, c.seed, m, p}}, started);
  print_metrics(m);
  return 0;
}

int cmd_scenario(const Common& c, const std::string& which, int reps) {
  const auto started = utc_timestamp();
  const SimParams p = base_params(c);
  std::vector<ScenarioSpec> specs;
  if (which == "all") {
    specs = builtin_scenarios();
  } else if (const auto* s = find_builtin_scenario(which)) {
    specs.push_back(*s);
  } else if (fs::exists(which)) {
    specs.push_back(parse_scenario_config(which, p));
  } else {
    throw ConfigError(ConfigError::Kind::invalid, "scenario", "no built-in scenario or file named " + which);
  }
  const auto res = scenario_suite(specs, reps, c.seed, p);
  const fs::path dir = c.out;
  write_file_atomic(dir / "scenarios.csv", scenario_summary_csv(res.summaries));
  finish(dir, "scenario", c.seed, p, res.records, started);
  std::printf("%-16s %8s %8s %8s %8s %8s %8s %8s\n", "scenario", "success", "trust", "(sd)", "prod", "util", "calib",
              "cpi");
  for (const auto& s : res.summaries) {
    std::printf("%-16s %8.2f %8.2f %8.2f %8.3f %8.1f %8.2f %8.3f\n", s.name.c_str(), s.mean.task_success_rate,
                s.mean.trust_mean, s.trust_mean_sd, s.mean.productivity, s.mean.utilization, s.mean.calibration_error,
                s.mean.cpi);
  }
  return 0;
}

int cmd_sweep(const Common& c, const std::string& factor, const std::string& levels, int reps) {
  const auto started = utc_timestamp();
  const SimParams p = base_params(c);
  std::vector<Factor> factors;
  if (factor == "all") {
    factors.assign(kAllFactors.begin(), kAllFactors.end());
  } else {
    factors.push_back(require_factor(factor));
  }
  const fs::path dir = c.out;
  std::vector<RunRecord> all;
  for (Factor f : factors) {
    SweepSpec spec;
    spec.factor = f;
    spec.replications = reps;
    spec.base_seed = c.seed;
    if (!levels.empty()) spec.levels = parse_levels(levels);
    const auto res = ofat_sweep(spec, p);
    write_file_atomic(dir / ("sweep_" + std::string(factor_name(f)) + ".csv"), sweep_csv(res));
    all.insert(all.end(), res.records.begin(), res.records.end());
    const auto& s = res.summary;
    std::printf("%-14s r=%.3f [%.3f, %.3f]  eta2 trust=%.3f success=%.3f productivity=%.3f\n",
                std::string(factor_name(f)).c_str(), s.trust_r.r, s.trust_r.ci_lo, s.trust_r.ci_hi, s.eta_trust,
                s.eta_success, s.eta_productivity);
  }
  finish(dir, "ofat", c.seed, p, all, started);
  return 0;
}

int cmd_factorial(const Common& c, const std::string& spec_path, std::optional<int> reps) {
  const auto started = utc_timestamp();
  const SimParams p = base_params(c);
  FactorialSpec spec = spec_path.empty() ? FactorialSpec::defaults() : parse_factorial_spec(spec_path);
  if (reps) spec.replications = *reps;
  spec.base_seed = c.seed;
  const auto res = factorial_experiment(spec, p);
  const fs::path dir = c.out;
  write_file_atomic(dir / "anova.csv", anova_csv(res.anova));
  finish(dir, "factorial", c.seed, p, res.records, started);
  std::printf("%-16s %5s %12s %10s %9s %8s %6s\n", "effect", "df", "SS", "MS", "F", "p", "eta2");
  for (const auto& r : res.anova.effects) {
    std::printf("%-16s %5d %12.2f %10.2f %9.2f %8s %6.3f\n", r.label.c_str(), r.df, r.ss, r.ms, r.f,
                format_p(r.p).c_str(), r.eta_squared);
  }
  const auto& r = res.anova.residual;
  std::printf("%-16s %5d %12.2f %10.2f %9s %8s %6.3f\n", "Residual", r.df, r.ss, r.ms, "", "", r.eta_squared);
  for (const auto& s : summarize_effects(res.anova)) {
    if (s.order == 0) {
      std::printf("residual share %.3f\n", s.eta_squared);
    } else {
      std::printf("order-%d effects share %.3f\n", s.order, s.eta_squared);
    }
  }
  return 0;
}

int cmd_asymmetry(const Common& c, const std::string& levels, int reps) {
  const auto started = utc_timestamp();
  const SimParams p = base_params(c);
  const auto lv = parse_levels(levels);
  const auto res = asymmetry_experiment(lv, reps, c.seed, p);
  const fs::path dir = c.out;
  write_file_atomic(dir / "asymmetry.csv", asymmetry_csv(res));
  finish(dir, "asymmetry", c.seed, p, res.records, started);
  for (const auto& l : res.levels) std::printf("reliability %5.1f  ratio %.3f (SD %.3f)\n", l.reliability, l.mean, l.sd);
  std::printf("overall           ratio %.3f\n", res.overall_mean);
  return 0;
}

int cmd_validate(const Common& c, const std::string& sweeps_dir, const std::string& benchmarks_path) {
  const auto benchmarks = benchmarks_path.empty() ? default_benchmarks() : load_benchmarks(benchmarks_path);
  std::map<std::string, double> model_rs;
  std::vector<SweepSummary> summaries;
  for (const auto& b : benchmarks) {
    const fs::path file = fs::path(sweeps_dir) / ("sweep_" + b.factor + ".csv");
    if (!fs::exists(file)) throw IoError("missing sweep file " + file.string());
    const auto parsed = parse_sweep_csv(read_file(file));
    const auto s = summarize_sweep(parsed.factor, parsed.rows);
    model_rs[b.factor] = s.trust_r.r;
    summaries.push_back(s);
  }
  const auto report = validate(model_rs, benchmarks);
  const fs::path dir = c.out;
  write_file_atomic(dir / "validation_report.json", validation_report_json(report, summaries));
  write_file_atomic(dir / "forest_plot.csv", forest_plot_csv(forest_plot_data(report, benchmarks)));
  std::printf("%-14s %6s %16s %8s %7s  %s\n", "factor", "r_meta", "CI", "r_model", "delta", "status");
  for (const auto& f : report.factors) {
    std::printf("%-14s %6.2f   [%.2f, %.2f] %8.3f %7.3f  %s\n", f.factor.c_str(), f.r_meta, f.ci_lo, f.ci_hi, f.r_model,
                f.delta_r, f.validated ? "validated" : "not validated");
  }
  std::printf("interval validity %d of %zu, Spearman rho (midranks) %.3f\n", report.validated_count,
              report.factors.size(), report.spearman_rho);
  return 0;
}

int cmd_replay(const Common& c, const std::string& manifest_path) {
  const auto m = parse_manifest(read_file(manifest_path));
  const auto records = replay_manifest(m);
  write_file_atomic(fs::path(c.out) / "runs.csv", runs_csv(records));
  std::printf("replayed %zu runs\n", records.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-based simulator of trust dynamics in human-robot teams"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common common;

  auto* run = app.add_subcommand("run", "Run one simulation");
  add_common(run, common);
  bool log = false;
  run->add_flag("--log", log, "Keep the per-event log in run.json");

  auto* scen = app.add_subcommand("scenario", "Run built-in or file-defined scenarios");
  add_common(scen, common);
  std::string which = "all";
  int scen_reps = 50;
  scen->add_option("name", which, "Scenario name, scenario file, or 'all'")->capture_default_str();
  scen->add_option("--reps", scen_reps, "Replications per scenario")->capture_default_str()->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "One-factor-at-a-time sensitivity sweep");
  add_common(sweep, common);
  std::string factor = "all";
  std::string sweep_levels;
  int sweep_reps = 50;
  sweep->add_option("--factor", factor, "Factor name or 'all'")->capture_default_str();
  sweep->add_option("--levels", sweep_levels, "a:b:k or comma list (default: 10 levels over the factor range)");
  sweep->add_option("--reps", sweep_reps, "Replications per level")->capture_default_str();

  auto* fact = app.add_subcommand("factorial", "Full-factorial experiment with ANOVA on final trust");
  add_common(fact, common);
  std::string spec_path;
  std::optional<int> fact_reps;
  fact->add_option("--spec", spec_path, "Factorial spec JSON (default: 3^4 design)");
  fact->add_option("--reps", fact_reps, "Replications per cell");

  auto* asym = app.add_subcommand("asymmetry", "Trust asymmetry ratio by reliability level");
  add_common(asym, common);
  std::string asym_levels = "30,50,70,90";
  int asym_reps = 50;
  asym->add_option("--levels", asym_levels, "Reliability levels")->capture_default_str();
  asym->add_option("--reps", asym_reps, "Replications per level")->capture_default_str();

  auto* val = app.add_subcommand("validate", "Compare sweep correlations with meta-analytic benchmarks");
  add_common(val, common);
  std::string sweeps_dir;
  std::string benchmarks_path;
  val->add_option("--sweeps", sweeps_dir, "Directory holding sweep_<factor>.csv files")->required();
  val->add_option("--benchmarks", benchmarks_path, "Benchmark CSV (default: embedded set)");

  auto* replay = app.add_subcommand("replay", "Re-run every run listed in a manifest");
  add_common(replay, common);
  std::string manifest_path;
  replay->add_option("--manifest", manifest_path, "manifest.json to replay")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(common, log);
    if (*scen) return cmd_scenario(common, which, scen_reps);
    if (*sweep) return cmd_sweep(common, factor, sweep_levels, sweep_reps);
    if (*fact) return cmd_factorial(common, spec_path, fact_reps);
    if (*asym) return cmd_asymmetry(common, asym_levels, asym_reps);
    if (*val) return cmd_validate(common, sweeps_dir, benchmarks_path);
    if (*replay) return cmd_replay(common, manifest_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  }
  return 0;
}
