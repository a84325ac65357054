#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hrtsim/metrics.hpp"
#include "hrtsim/stats.hpp"
#include "hrtsim/world.hpp"

namespace hrtsim {

/// The eight trust antecedents varied in sensitivity sweeps.
enum class Factor { reliability, transparency, warmth, communication, expertise, propensity, tenure, collaboration };

inline constexpr std::array<Factor, 8> kAllFactors{
    Factor::reliability, Factor::transparency, Factor::warmth,     Factor::communication,
    Factor::expertise,   Factor::propensity,   Factor::tenure,     Factor::collaboration,
};

std::string_view factor_name(Factor f) noexcept;
/// Accepts the short name ("reliability") or the config key ("robot-reliability").
std::optional<Factor> parse_factor(std::string_view name) noexcept;
/// Throws ConfigError(invalid) naming the factor when it is unknown.
Factor require_factor(std::string_view name);

/// Sets the SimParams field a factor maps to.
void set_factor(SimParams& params, Factor f, double value) noexcept;
double get_factor(const SimParams& params, Factor f) noexcept;

/// Ten evenly spaced levels over the factor's range.
std::vector<double> default_levels(Factor f);

// ---------------------------------------------------------------------------

/// Scenario-level settings; warmth stays at the defaults' value.
struct ScenarioSpec {
  std::string name;
  int initial_tasks = 30;
  double reliability = 70.0;
  double transparency = 50.0;
  double autonomy = 70.0;
  double communication = 40.0;
  double collaboration = 40.0;
  double initial_trust = 50.0;
  double initial_tenure = 0.0;

  SimParams apply(SimParams base) const;
  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Baseline, Trust Recovery, High Workload, Unreliable, Optimal.
const std::vector<ScenarioSpec>& builtin_scenarios();
/// Case-insensitive; spaces, dashes and underscores are interchangeable.
const ScenarioSpec* find_builtin_scenario(std::string_view name) noexcept;

struct SweepSpec {
  Factor factor = Factor::reliability;
  std::vector<double> levels;  // empty means default_levels(factor)
  int replications = 50;
  std::uint64_t base_seed = 1;
};

struct FactorialFactor {
  Factor factor = Factor::reliability;
  std::string label;  // short row label, e.g. "R"
  std::vector<double> levels;
};

struct FactorialSpec {
  std::vector<FactorialFactor> factors;
  int replications = 30;
  std::uint64_t base_seed = 1;

  /// Reliability {40,70,90}, transparency {30,60,90}, communication and collaboration {20,50,80}; 30 reps.
  static FactorialSpec defaults();
  std::size_t cell_count() const noexcept;
};

// ---------------------------------------------------------------------------

/// One simulation to run.
struct RunJob {
  SimParams params;
  std::uint64_t seed = 0;
};

/// Worker count from HRTSIM_THREADS (unset or 0 = hardware concurrency).
unsigned worker_count();

/// Runs every job, in parallel when allowed; result i always belongs to job i.
std::vector<RunMetrics> run_jobs(const std::vector<RunJob>& jobs, unsigned threads = 0);

/// n runs with seeds derive_seed(base_seed, i).
std::vector<RunMetrics> run_replications(const SimParams& params, int n, std::uint64_t base_seed);

/// One row of any experiment's long table.
struct RunRecord {
  std::string experiment;  // "run", "scenario", "ofat", "factorial", "asymmetry"
  std::string cell;        // scenario name, "reliability=70", "R=40;T=30;..."
  int run_id = 0;          // replicate index within the cell
  std::uint64_t seed = 0;
  RunMetrics metrics;
  SimParams params;  // exact inputs of this run
};

struct SweepRow {
  int level_index = 0;
  double level = 0.0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double trust_mean = 0.0;
  double task_success_rate = 0.0;
  double productivity = 0.0;
};

struct SweepSummary {
  Factor factor = Factor::reliability;
  Correlation trust_r;  // level vs final trust over all rows
  double eta_trust = 0.0;
  double eta_success = 0.0;
  double eta_productivity = 0.0;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRow> rows;
  std::vector<RunRecord> records;
  SweepSummary summary;
};

SweepResult ofat_sweep(SweepSpec spec, const SimParams& defaults);
/// Recomputes the correlation and eta squared from rows alone (e.g. rows read back from CSV).
SweepSummary summarize_sweep(Factor factor, const std::vector<SweepRow>& rows);

struct FactorialRow {
  std::vector<int> level_index;
  int replicate = 0;
  std::uint64_t seed = 0;
  double trust_mean = 0.0;
};

struct FactorialResult {
  FactorialSpec spec;
  std::vector<FactorialRow> rows;
  std::vector<RunRecord> records;
  AnovaTable anova;
};

FactorialResult factorial_experiment(const FactorialSpec& spec, const SimParams& defaults);

struct ScenarioSummary {
  std::string name;
  std::size_t runs = 0;
  RunMetrics mean;               // field-wise mean; completed/succeeded rounded
  double trust_mean_sd = 0.0;    // SD of per-run trust_mean across runs
  double trust_sd_mean = 0.0;    // mean within-run SD of trust over humans
};

struct ScenarioSuiteResult {
  std::vector<ScenarioSummary> summaries;
  std::vector<RunRecord> records;
};

ScenarioSuiteResult scenario_suite(const std::vector<ScenarioSpec>& scenarios, int reps, std::uint64_t base_seed,
                                   const SimParams& defaults = {});

struct AsymmetryLevel {
  double reliability = 0.0;
  std::size_t runs = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample SD across runs
};

struct AsymmetryResult {
  std::vector<AsymmetryLevel> levels;
  double overall_mean = 0.0;  // pooled over every run
  std::vector<RunRecord> records;
};

AsymmetryResult asymmetry_experiment(const std::vector<double>& reliability_levels, int reps, std::uint64_t base_seed,
                                     const SimParams& defaults = {});

}  // namespace hrtsim
