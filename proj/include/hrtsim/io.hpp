#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hrtsim/dynamics.hpp"
#include "hrtsim/experiments.hpp"
#include "hrtsim/stats.hpp"
#include "hrtsim/validation.hpp"

namespace hrtsim {

inline constexpr std::string_view kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Configuration. Files are flat JSON objects with kebab-case keys
// ("robot-reliability": 40). Omitted keys keep the base value.

/// Throws ConfigError: syntax for malformed JSON, unknown_key naming the key,
/// invalid for a wrongly typed value, out_of_range from SimParams::validate.
SimParams parse_config_text(std::string_view text, SimParams base = {});
/// As above; a missing file is ConfigError::missing_file.
SimParams parse_config(const std::filesystem::path& path, SimParams base = {});

/// Every key with its current value.
nlohmann::json params_to_json(const SimParams& p);
/// Applies the keys of `j` onto `base` without validating ranges.
SimParams apply_params_json(const nlohmann::json& j, SimParams base);
/// Only the keys whose values differ from `base`.
nlohmann::json params_diff(const SimParams& base, const SimParams& p);

/// Scenario file: optional "name" plus any SimParams keys; the Table-8 keys fill the spec.
ScenarioSpec parse_scenario_config(const std::filesystem::path& path, const SimParams& defaults = {});

/// {"replications": 30, "seed": 1, "factors": [{"factor": "reliability", "label": "R", "levels": [40, 70, 90]}, ...]}
FactorialSpec parse_factorial_spec_text(std::string_view text);
FactorialSpec parse_factorial_spec(const std::filesystem::path& path);

/// Parses "a:b:k" (k evenly spaced values from a to b) or a comma list "10,40,70".
std::vector<double> parse_levels(std::string_view text);

// ---------------------------------------------------------------------------
// Tabular outputs.

/// Six significant digits; infinities as "inf".
std::string format_g6(double v);

std::string runs_csv(const std::vector<RunRecord>& records);
std::string anova_csv(const AnovaTable& table);
std::string forest_plot_csv(const std::vector<ForestRecord>& records);
std::string validation_report_json(const ValidationReport& report, const std::vector<SweepSummary>& sweeps = {});
std::string scenario_summary_csv(const std::vector<ScenarioSummary>& summaries);
std::string asymmetry_csv(const AsymmetryResult& result);

/// Long sweep table at full precision so summaries recomputed from it match exactly.
std::string sweep_csv(const SweepResult& sweep);
struct ParsedSweep {
  Factor factor = Factor::reliability;
  std::vector<SweepRow> rows;
};
ParsedSweep parse_sweep_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Manifests and replay.

struct ManifestRun {
  std::string experiment;
  std::string cell;
  int run_id = 0;
  std::uint64_t seed = 0;
  nlohmann::json overrides = nlohmann::json::object();  // keys differing from the manifest params
};

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string experiment;
  std::uint64_t base_seed = 0;
  SimParams params;
  std::vector<ManifestRun> runs;
  std::string started_at;
  std::string finished_at;
};

RunManifest make_manifest(std::string experiment, std::uint64_t base_seed, const SimParams& params,
                          const std::vector<RunRecord>& records);
std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest(std::string_view text);
/// Re-executes every run listed in the manifest, in manifest order.
std::vector<RunRecord> replay_manifest(const RunManifest& m);

/// UTC, ISO 8601.
std::string utc_timestamp();

// ---------------------------------------------------------------------------
// Full run serialization.

nlohmann::json run_result_to_json(const RunResult& r);
RunResult run_result_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Files. Failures raise IoError carrying the path.

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace hrtsim
