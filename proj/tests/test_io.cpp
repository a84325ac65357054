#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "hrtsim/errors.hpp"
#include "hrtsim/io.hpp"

using namespace hrtsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("hrtsim_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

ConfigError::Kind config_kind(std::string_view text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.kind();
  }
  FAIL("expected ConfigError");
  return ConfigError::Kind::invalid;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("config: scenario keys override defaults") {
  const SimParams p = parse_config_text(
      R"({"robot-reliability": 40, "robot-transparency": 30, "robot-autonomy": 90, "initial-trust": 70})");
  const SimParams expect = find_builtin_scenario("Unreliable")->apply(SimParams{});
  CHECK(p.robot_reliability == 40);
  CHECK(p.robot_transparency == 30);
  CHECK(p.robot_autonomy == 90);
  CHECK(p.initial_trust == 70);
  CHECK(p == expect);
}

TEST_CASE("config: errors are categorized") {
  try {
    parse_config_text(R"({"robot-reliability": 150})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigError::Kind::out_of_range);
    CHECK(e.field() == "robot-reliability");
  }
  try {
    parse_config_text(R"({"robot-charm": 1})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigError::Kind::unknown_key);
    CHECK(e.field() == "robot-charm");
  }
  CHECK(config_kind("{\"robot-reliability\": ") == ConfigError::Kind::syntax);
  CHECK(config_kind("[1, 2]") == ConfigError::Kind::syntax);
  CHECK(config_kind(R"({"ticks": "many"})") == ConfigError::Kind::invalid);
  CHECK(config_kind(R"({"ticks": 2.5})") == ConfigError::Kind::invalid);
  CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), ConfigError);
  try {
    parse_config("/nonexistent/config.json");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigError::Kind::missing_file);
  }
}

TEST_CASE("config: empty file gives defaults") {
  TempDir dir;
  const fs::path f = dir.path / "empty.json";
  std::ofstream(f).close();
  CHECK(parse_config(f) == SimParams{});
  CHECK(parse_config_text("{}") == SimParams{});
}

TEST_CASE("config round-trip for random valid params") {
  Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    SimParams p;
    p.num_humans = static_cast<int>(rng.index(20));
    p.ticks = static_cast<int>(rng.index(5000));
    p.robot_reliability = rng.uniform(0, 100);
    p.robot_transparency = rng.uniform(0, 100);
    p.communication_frequency = rng.uniform(0, 100);
    p.initial_tenure = rng.uniform(0, 900);
    p.alpha = rng.uniform(0.01, 5);
    p.lambda = rng.uniform(0.01, 5);
    p.comm_gain_base = rng.uniform(0, 1);
    p.drift_rate = rng.uniform(0, 1);
    p.loss_mode = rng.bernoulli(0.5) ? LossMode::beta : LossMode::lambda;
    p.battery_floor_effect = rng.bernoulli(0.5);
    p.team_patience = static_cast<int>(rng.index(1000));
    const double w0 = rng.uniform(0, 1);
    p.cpi_weights = {w0, 0, 0, 1 - w0};
    REQUIRE_NOTHROW(p.validate());
    const std::string text = params_to_json(p).dump(2);
    REQUIRE(parse_config_text(text) == p);
    REQUIRE(apply_params_json(params_diff(SimParams{}, p), SimParams{}) == p);
  }
}

TEST_CASE("levels syntax") {
  CHECK(parse_levels("10:100:10") == std::vector<double>{10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
  CHECK(parse_levels("30,50,70") == std::vector<double>{30, 50, 70});
  CHECK_THROWS_AS(parse_levels("10:100"), ConfigError);
  CHECK_THROWS_AS(parse_levels("10:100:1"), ConfigError);
  CHECK_THROWS_AS(parse_levels("10,abc"), ConfigError);
}

TEST_CASE("factorial spec files") {
  const auto spec = parse_factorial_spec_text(
      R"({"replications": 4, "seed": 9, "factors": [{"factor": "reliability", "label": "R", "levels": [40, 90]},
                                                   {"factor": "warmth", "label": "W", "levels": [10, 50, 90]}]})");
  CHECK(spec.replications == 4);
  CHECK(spec.base_seed == 9);
  REQUIRE(spec.factors.size() == 2);
  CHECK(spec.factors[1].factor == Factor::warmth);
  CHECK(spec.cell_count() == 6);
  CHECK(parse_factorial_spec_text("{}").cell_count() == 81);
  CHECK_THROWS_AS(parse_factorial_spec_text(R"({"reps": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_factorial_spec_text(R"({"replications": 1})"), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_g6(3.3) == "3.3");
  CHECK(format_g6(58.6234567) == "58.6235");
  CHECK(format_g6(1.0 / 0.0) == "inf");
  CHECK(format_g6(0.0) == "0");
}

TEST_CASE("runs.csv schema") {
  SimParams p;
  p.ticks = 200;
  const auto suite = scenario_suite(builtin_scenarios(), 2, 1, p);
  const auto lines = lines_of(runs_csv(suite.records));
  REQUIRE(lines.size() == 11);
  CHECK(lines[0] ==
        "experiment,scenario_or_cell,run_id,seed,task_success_rate,trust_mean,trust_sd,productivity,utilization,"
        "calibration_error,asymmetry_ratio,cpi,completed,succeeded");
  for (const auto& l : lines) CHECK(std::count(l.begin(), l.end(), ',') == 13);
  CHECK(lines[1].rfind("scenario,Baseline,0,", 0) == 0);
  CHECK(lines_of(runs_csv({})).size() == 1);
}

TEST_CASE("anova.csv has one row per effect plus the residual") {
  FactorialSpec spec;
  spec.factors = {{Factor::reliability, "R", {40, 90}}, {Factor::transparency, "T", {30, 90}},
                  {Factor::communication, "C", {20, 80}}};
  spec.replications = 2;
  SimParams p;
  p.ticks = 150;
  const auto res = factorial_experiment(spec, p);
  const auto lines = lines_of(anova_csv(res.anova));
  REQUIRE(lines.size() == 1 + 7 + 1);
  CHECK(lines[0] == "effect,df,ss,ms,f,p,eta_squared");
  CHECK(lines[4].rfind("R x T,", 0) == 0);
  CHECK(lines.back().rfind("Residual,8,", 0) == 0);
}

TEST_CASE("sweep CSV round-trip reproduces the summary and validation report exactly") {
  SimParams p;
  p.ticks = 300;
  std::map<std::string, double> live, reread;
  for (Factor f : {Factor::reliability, Factor::warmth}) {
    SweepSpec spec;
    spec.factor = f;
    spec.levels = {20, 50, 80};
    spec.replications = 3;
    const auto res = ofat_sweep(spec, p);
    const auto parsed = parse_sweep_csv(sweep_csv(res));
    CHECK(parsed.factor == f);
    REQUIRE(parsed.rows.size() == res.rows.size());
    for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
      CHECK(parsed.rows[i].trust_mean == res.rows[i].trust_mean);
      CHECK(parsed.rows[i].seed == res.rows[i].seed);
    }
    const auto again = summarize_sweep(parsed.factor, parsed.rows);
    CHECK(again.trust_r.r == res.summary.trust_r.r);
    CHECK(again.eta_trust == res.summary.eta_trust);
    CHECK(again.eta_success == res.summary.eta_success);
    live[std::string(factor_name(f))] = res.summary.trust_r.r;
    reread[std::string(factor_name(f))] = again.trust_r.r;
  }
  std::vector<BenchmarkEntry> bench;
  for (const auto& b : default_benchmarks()) {
    if (live.count(b.factor)) bench.push_back(b);
  }
  CHECK(validation_report_json(validate(live, bench)) == validation_report_json(validate(reread, bench)));
  CHECK_THROWS_AS(parse_sweep_csv("nonsense\n"), ConfigError);
}

TEST_CASE("manifest replay reproduces runs.csv byte for byte") {
  SimParams p;
  p.ticks = 250;
  SweepSpec spec;
  spec.factor = Factor::transparency;
  spec.levels = {10, 90};
  spec.replications = 2;
  const auto res = ofat_sweep(spec, p);
  RunManifest m = make_manifest("ofat", 1, p, res.records);
  m.started_at = utc_timestamp();
  m.finished_at = utc_timestamp();
  const RunManifest back = parse_manifest(manifest_json(m));
  CHECK(back.runs.size() == 4);
  CHECK(back.params == p);
  CHECK(back.tool_version == kToolVersion);
  CHECK(runs_csv(replay_manifest(back)) == runs_csv(res.records));
  CHECK_THROWS_AS(parse_manifest(R"({"experiment": "x"})"), ConfigError);
}

TEST_CASE("RunResult JSON round-trip") {
  SimParams p;
  p.ticks = 400;
  const RunResult r = run_simulation(p, 8);
  const auto j = run_result_to_json(r);
  CHECK(run_result_from_json(nlohmann::json::parse(j.dump())) == r);
  CHECK(run_result_to_json(run_simulation(p, 8)).dump() == j.dump());
}

TEST_CASE("file helpers surface the path on failure") {
  TempDir dir;
  const fs::path f = dir.path / "sub" / "out.txt";
  write_file_atomic(f, "hello\n");
  CHECK(read_file(f) == "hello\n");
  write_file_atomic(f, "again\n");
  CHECK(read_file(f) == "again\n");
  try {
    read_file(dir.path / "missing.txt");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("missing.txt") != std::string::npos);
  }
  // A regular file where a directory is needed.
  CHECK_THROWS_AS(write_file_atomic(f / "x.csv", "x"), IoError);
}
