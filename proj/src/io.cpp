#include "hrtsim/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "hrtsim/errors.hpp"
#include "hrtsim/metrics.hpp"

namespace hrtsim {

using nlohmann::json;

namespace {

[[noreturn]] void bad_type(const std::string& key, const char* expected) {
  throw ConfigError(ConfigError::Kind::invalid, key, key + " must be " + expected);
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) bad_type(key, "a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (v.is_number_integer()) {
    const auto i = v.get<long long>();
    if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) bad_type(key, "a 32-bit integer");
    return static_cast<int>(i);
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 2e9) return static_cast<int>(d);
  }
  bad_type(key, "an integer");
}

struct Field {
  const char* key;
  std::function<json(const SimParams&)> get;
  std::function<void(SimParams&, const json&)> set;
};

Field real(const char* key, double SimParams::*m) {
  return {key, [m](const SimParams& p) { return json(p.*m); },
          [m, key](SimParams& p, const json& v) { p.*m = as_number(v, key); }};
}

Field integer(const char* key, int SimParams::*m) {
  return {key, [m](const SimParams& p) { return json(p.*m); },
          [m, key](SimParams& p, const json& v) { p.*m = as_int(v, key); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f{
        integer("num-humans", &SimParams::num_humans),
        integer("num-robots", &SimParams::num_robots),
        integer("ticks", &SimParams::ticks),
        integer("initial-tasks", &SimParams::initial_tasks),
        real("robot-reliability", &SimParams::robot_reliability),
        real("robot-transparency", &SimParams::robot_transparency),
        real("robot-autonomy", &SimParams::robot_autonomy),
        real("robot-warmth", &SimParams::robot_warmth_mean),
        real("communication-frequency", &SimParams::communication_frequency),
        real("collaboration-rate", &SimParams::collaboration_rate),
        real("initial-trust", &SimParams::initial_trust),
        real("initial-tenure", &SimParams::initial_tenure),
        real("task-difficulty-mean", &SimParams::task_difficulty_mean),
        real("trust-propensity-mean", &SimParams::trust_propensity_mean),
        real("trust-propensity-sd", &SimParams::trust_propensity_sd),
        real("expertise-mean", &SimParams::expertise_mean),
        real("expertise-sd", &SimParams::expertise_sd),
        real("alpha", &SimParams::alpha),
        real("beta", &SimParams::beta),
        real("lambda", &SimParams::lambda),
        real("eta", &SimParams::eta),
        real("delta", &SimParams::delta),
        real("stress-threshold", &SimParams::stress_threshold),
        real("familiarity-growth", &SimParams::familiarity_growth),
        real("comm-radius", &SimParams::comm_radius),
        real("trust-radius", &SimParams::trust_radius),
        real("propensity-trust-coeff", &SimParams::propensity_trust_coeff),
        real("propensity-drift-coeff", &SimParams::propensity_drift_coeff),
        real("comm-gain-base", &SimParams::comm_gain_base),
        real("drift-rate", &SimParams::drift_rate),
        real("extent", &SimParams::extent),
        integer("spawn-interval", &SimParams::spawn_interval),
        real("move-speed", &SimParams::move_speed),
        real("arrival-radius", &SimParams::arrival_radius),
        real("battery-drain", &SimParams::battery_drain),
        integer("team-patience", &SimParams::team_patience),
    };
    f.push_back({"loss-mode",
                 [](const SimParams& p) { return json(p.loss_mode == LossMode::beta ? "beta" : "lambda"); },
                 [](SimParams& p, const json& v) {
                   if (v == "lambda") {
                     p.loss_mode = LossMode::lambda;
                   } else if (v == "beta") {
                     p.loss_mode = LossMode::beta;
                   } else {
                     bad_type("loss-mode", "\"lambda\" or \"beta\"");
                   }
                 }});
    f.push_back({"battery-floor-effect", [](const SimParams& p) { return json(p.battery_floor_effect); },
                 [](SimParams& p, const json& v) {
                   if (!v.is_boolean()) bad_type("battery-floor-effect", "true or false");
                   p.battery_floor_effect = v.get<bool>();
                 }});
    f.push_back({"cpi-weights", [](const SimParams& p) { return json(p.cpi_weights); },
                 [](SimParams& p, const json& v) {
                   if (!v.is_array() || v.size() != 4) bad_type("cpi-weights", "an array of 4 numbers");
                   for (std::size_t i = 0; i < 4; ++i) p.cpi_weights[i] = as_number(v[i], "cpi-weights");
                 }});
    return f;
  }();
  return all;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

json parse_json_object(std::string_view text, const char* what) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigError::Kind::syntax, "", std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(ConfigError::Kind::syntax, "", std::string(what) + ": top level must be an object");
  return j;
}

std::string read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(ConfigError::Kind::missing_file, "", "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }
std::optional<int> read_optional_int(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<int>();
}

}  // namespace

// ---------------------------------------------------------------------------

SimParams apply_params_json(const json& j, SimParams base) {
  for (const auto& [key, value] : j.items()) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError(ConfigError::Kind::unknown_key, key, "unknown config key: " + key);
    f->set(base, value);
  }
  return base;
}

SimParams parse_config_text(std::string_view text, SimParams base) {
  const json j = parse_json_object(text, "config");
  SimParams p = apply_params_json(j, std::move(base));
  p.validate();
  return p;
}

SimParams parse_config(const std::filesystem::path& path, SimParams base) {
  return parse_config_text(read_config_file(path), std::move(base));
}

json params_to_json(const SimParams& p) {
  json j = json::object();
  for (const auto& f : fields()) j[f.key] = f.get(p);
  return j;
}

json params_diff(const SimParams& base, const SimParams& p) {
  json j = json::object();
  for (const auto& f : fields()) {
    json a = f.get(base), b = f.get(p);
    if (a != b) j[f.key] = std::move(b);
  }
  return j;
}

ScenarioSpec parse_scenario_config(const std::filesystem::path& path, const SimParams& defaults) {
  json j = parse_json_object(read_config_file(path), "scenario");
  std::string name = path.stem().string();
  if (j.contains("name")) {
    if (!j["name"].is_string()) bad_type("name", "a string");
    name = j["name"].get<std::string>();
    j.erase("name");
  }
  SimParams p = apply_params_json(j, defaults);
  p.validate();
  ScenarioSpec s;
  s.name = name;
  s.initial_tasks = p.initial_tasks;
  s.reliability = p.robot_reliability;
  s.transparency = p.robot_transparency;
  s.autonomy = p.robot_autonomy;
  s.communication = p.communication_frequency;
  s.collaboration = p.collaboration_rate;
  s.initial_trust = p.initial_trust;
  s.initial_tenure = p.initial_tenure;
  return s;
}

FactorialSpec parse_factorial_spec_text(std::string_view text) {
  const json j = parse_json_object(text, "factorial spec");
  FactorialSpec spec = FactorialSpec::defaults();
  for (const auto& [key, value] : j.items()) {
    if (key == "replications") {
      spec.replications = as_int(value, key);
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) bad_type(key, "a nonnegative integer");
      spec.base_seed = value.get<std::uint64_t>();
    } else if (key == "factors") {
      if (!value.is_array() || value.empty()) bad_type(key, "a nonempty array");
      spec.factors.clear();
      for (const auto& fj : value) {
        if (!fj.is_object() || !fj.contains("factor") || !fj["factor"].is_string()) {
          bad_type("factors", "objects with a \"factor\" name");
        }
        FactorialFactor f;
        f.factor = require_factor(fj["factor"].get<std::string>());
        f.label = fj.value("label", std::string(factor_name(f.factor)));
        if (!fj.contains("levels") || !fj["levels"].is_array()) bad_type("levels", "an array of numbers");
        for (const auto& lv : fj["levels"]) f.levels.push_back(as_number(lv, "levels"));
        for (const auto& [k2, v2] : fj.items()) {
          (void)v2;
          if (k2 != "factor" && k2 != "label" && k2 != "levels") {
            throw ConfigError(ConfigError::Kind::unknown_key, k2, "unknown factor key: " + k2);
          }
        }
        spec.factors.push_back(std::move(f));
      }
    } else {
      throw ConfigError(ConfigError::Kind::unknown_key, key, "unknown factorial spec key: " + key);
    }
  }
  if (spec.replications < 2) {
    throw ConfigError(ConfigError::Kind::out_of_range, "replications", "replications must be >= 2");
  }
  for (const auto& f : spec.factors) {
    if (f.levels.size() < 2) throw ConfigError(ConfigError::Kind::out_of_range, "levels", "each factor needs >= 2 levels");
  }
  return spec;
}

FactorialSpec parse_factorial_spec(const std::filesystem::path& path) {
  return parse_factorial_spec_text(read_config_file(path));
}

std::vector<double> parse_levels(std::string_view text) {
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(ConfigError::Kind::invalid, "levels", "bad level value '" + s + "'");
    }
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError(ConfigError::Kind::invalid, "levels", "levels must be a:b:k");
    const double a = number(parts[0]), b = number(parts[1]);
    const double kd = number(parts[2]);
    if (kd < 2 || kd != std::floor(kd)) throw ConfigError(ConfigError::Kind::invalid, "levels", "level count must be an integer >= 2");
    const int k = static_cast<int>(kd);
    for (int i = 0; i < k; ++i) out.push_back(a + i * (b - a) / (k - 1));
  } else {
    for (const auto& p : split(text, ',')) out.push_back(number(p));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string format_g6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string runs_csv(const std::vector<RunRecord>& records) {
  std::string out =
      "experiment,scenario_or_cell,run_id,seed,task_success_rate,trust_mean,trust_sd,productivity,utilization,"
      "calibration_error,asymmetry_ratio,cpi,completed,succeeded\n";
  for (const auto& r : records) {
    const auto& m = r.metrics;
    out += csv_field(r.experiment) + ',' + csv_field(r.cell) + ',' + std::to_string(r.run_id) + ',' +
           std::to_string(r.seed) + ',' + format_g6(m.task_success_rate) + ',' + format_g6(m.trust_mean) + ',' +
           format_g6(m.trust_sd) + ',' + format_g6(m.productivity) + ',' + format_g6(m.utilization) + ',' +
           format_g6(m.calibration_error) + ',' + format_g6(m.asymmetry_ratio) + ',' + format_g6(m.cpi) + ',' +
           std::to_string(m.completed) + ',' + std::to_string(m.succeeded) + '\n';
  }
  return out;
}

std::string anova_csv(const AnovaTable& t) {
  std::string out = "effect,df,ss,ms,f,p,eta_squared\n";
  for (const auto& r : t.effects) {
    out += csv_field(r.label) + ',' + std::to_string(r.df) + ',' + format_g6(r.ss) + ',' + format_g6(r.ms) + ',' +
           format_g6(r.f) + ',' + format_g6(r.p) + ',' + format_g6(r.eta_squared) + '\n';
  }
  const auto& r = t.residual;
  out += "Residual," + std::to_string(r.df) + ',' + format_g6(r.ss) + ',' + format_g6(r.ms) + ",,," +
         format_g6(r.eta_squared) + '\n';
  return out;
}

std::string forest_plot_csv(const std::vector<ForestRecord>& records) {
  std::string out = "factor,r_meta,ci_lo,ci_hi,r_model,status\n";
  for (const auto& r : records) {
    out += csv_field(r.factor) + ',' + format_g6(r.r_meta) + ',' + format_g6(r.ci_lo) + ',' + format_g6(r.ci_hi) +
           ',' + format_g6(r.r_model) + ',' + r.status + '\n';
  }
  return out;
}

std::string validation_report_json(const ValidationReport& report, const std::vector<SweepSummary>& sweeps) {
  json j;
  j["factors"] = json::array();
  for (const auto& f : report.factors) {
    j["factors"].push_back({{"factor", f.factor},
                            {"r_meta", f.r_meta},
                            {"ci_lo", f.ci_lo},
                            {"ci_hi", f.ci_hi},
                            {"r_model", f.r_model},
                            {"delta_r", f.delta_r},
                            {"status", f.validated ? "validated" : "not_validated"}});
  }
  j["validated"] = report.validated_count;
  j["total"] = report.factors.size();
  j["interval_validity"] = std::to_string(report.validated_count) + " of " + std::to_string(report.factors.size());
  j["spearman_rho"] = report.spearman_rho;
  j["top_model_factor"] = report.top_model_factor;
  j["notes"] = report.notes;
  if (!sweeps.empty()) {
    json s = json::array();
    for (const auto& w : sweeps) {
      s.push_back({{"factor", factor_name(w.factor)},
                   {"r", w.trust_r.r},
                   {"r_ci_lo", w.trust_r.ci_lo},
                   {"r_ci_hi", w.trust_r.ci_hi},
                   {"n", w.trust_r.n},
                   {"eta_squared_trust", w.eta_trust},
                   {"eta_squared_success", w.eta_success},
                   {"eta_squared_productivity", w.eta_productivity}});
    }
    j["sweeps"] = std::move(s);
  }
  return j.dump(2) + "\n";
}

std::string scenario_summary_csv(const std::vector<ScenarioSummary>& summaries) {
  std::string out =
      "scenario,runs,task_success_rate,trust_mean,trust_mean_sd_across_runs,trust_sd_within_run,productivity,"
      "utilization,calibration_error,asymmetry_ratio,cpi,completed,succeeded\n";
  for (const auto& s : summaries) {
    const auto& m = s.mean;
    out += csv_field(s.name) + ',' + std::to_string(s.runs) + ',' + format_g6(m.task_success_rate) + ',' +
           format_g6(m.trust_mean) + ',' + format_g6(s.trust_mean_sd) + ',' + format_g6(s.trust_sd_mean) + ',' +
           format_g6(m.productivity) + ',' + format_g6(m.utilization) + ',' + format_g6(m.calibration_error) + ',' +
           format_g6(m.asymmetry_ratio) + ',' + format_g6(m.cpi) + ',' + std::to_string(m.completed) + ',' +
           std::to_string(m.succeeded) + '\n';
  }
  return out;
}

std::string asymmetry_csv(const AsymmetryResult& result) {
  std::string out = "reliability,runs,mean_asymmetry_ratio,sd\n";
  for (const auto& l : result.levels) {
    out += format_g6(l.reliability) + ',' + std::to_string(l.runs) + ',' + format_g6(l.mean) + ',' + format_g6(l.sd) +
           '\n';
  }
  std::size_t total = 0;
  for (const auto& l : result.levels) total += l.runs;
  out += "Overall," + std::to_string(total) + ',' + format_g6(result.overall_mean) + ",\n";
  return out;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "factor,level_index,level,replicate,seed,trust_mean,task_success_rate,productivity\n";
  const std::string name(factor_name(sweep.spec.factor));
  for (const auto& r : sweep.rows) {
    out += name + ',' + std::to_string(r.level_index) + ',' + format_full(r.level) + ',' + std::to_string(r.replicate) +
           ',' + std::to_string(r.seed) + ',' + format_full(r.trust_mean) + ',' + format_full(r.task_success_rate) +
           ',' + format_full(r.productivity) + '\n';
  }
  return out;
}

ParsedSweep parse_sweep_csv(std::string_view text) {
  ParsedSweep out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool have_factor = false;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(ConfigError::Kind::syntax, "sweep", "sweep CSV line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != "factor,level_index,level,replicate,seed,trust_mean,task_success_rate,productivity") {
        fail("unexpected header");
      }
      continue;
    }
    const auto c = split(line, ',');
    if (c.size() != 8) fail("expected 8 columns");
    const auto f = parse_factor(c[0]);
    if (!f) fail("unknown factor '" + c[0] + "'");
    if (have_factor && *f != out.factor) fail("mixed factors in one sweep file");
    out.factor = *f;
    have_factor = true;
    try {
      SweepRow r;
      r.level_index = std::stoi(c[1]);
      r.level = std::stod(c[2]);
      r.replicate = std::stoi(c[3]);
      r.seed = std::stoull(c[4]);
      r.trust_mean = std::stod(c[5]);
      r.task_success_rate = std::stod(c[6]);
      r.productivity = std::stod(c[7]);
      if (r.level_index < 0) fail("negative level index");
      out.rows.push_back(r);
    } catch (const std::logic_error&) {
      fail("malformed number");
    }
  }
  if (out.rows.empty()) throw ConfigError(ConfigError::Kind::syntax, "sweep", "sweep CSV has no rows");
  return out;
}

// ---------------------------------------------------------------------------

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest make_manifest(std::string experiment, std::uint64_t base_seed, const SimParams& params,
                          const std::vector<RunRecord>& records) {
  RunManifest m;
  m.experiment = std::move(experiment);
  m.base_seed = base_seed;
  m.params = params;
  for (const auto& r : records) m.runs.push_back({r.experiment, r.cell, r.run_id, r.seed, params_diff(params, r.params)});
  return m;
}

std::string manifest_json(const RunManifest& m) {
  json j;
  j["tool"] = "hrtsim";
  j["tool_version"] = m.tool_version;
  j["experiment"] = m.experiment;
  j["base_seed"] = m.base_seed;
  j["params"] = params_to_json(m.params);
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["runs"] = json::array();
  for (const auto& r : m.runs) {
    j["runs"].push_back(
        {{"experiment", r.experiment}, {"cell", r.cell}, {"run_id", r.run_id}, {"seed", r.seed}, {"overrides", r.overrides}});
  }
  return j.dump(1) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  const json j = parse_json_object(text, "manifest");
  RunManifest m;
  try {
    m.tool_version = j.at("tool_version").get<std::string>();
    m.experiment = j.at("experiment").get<std::string>();
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    m.params = apply_params_json(j.at("params"), SimParams{});
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    for (const auto& r : j.at("runs")) {
      m.runs.push_back({r.at("experiment").get<std::string>(), r.at("cell").get<std::string>(), r.at("run_id").get<int>(),
                        r.at("seed").get<std::uint64_t>(), r.value("overrides", json::object())});
    }
  } catch (const json::exception& e) {
    throw ConfigError(ConfigError::Kind::syntax, "manifest", std::string("manifest: ") + e.what());
  }
  return m;
}

std::vector<RunRecord> replay_manifest(const RunManifest& m) {
  std::vector<RunJob> jobs;
  std::vector<RunRecord> records;
  for (const auto& r : m.runs) {
    SimParams p = apply_params_json(r.overrides, m.params);
    p.validate();
    jobs.push_back({p, r.seed});
    records.push_back({r.experiment, r.cell, r.run_id, r.seed, {}, p});
  }
  const auto metrics = run_jobs(jobs);
  for (std::size_t i = 0; i < metrics.size(); ++i) records[i].metrics = metrics[i];
  return records;
}

// ---------------------------------------------------------------------------

json run_result_to_json(const RunResult& r) {
  json j;
  j["params"] = params_to_json(r.params);
  j["seed"] = r.seed;
  j["ticks"] = r.ticks;
  j["completed"] = r.completed;
  j["succeeded"] = r.succeeded;
  j["spawned"] = r.spawned;

  json humans = json::array();
  for (const auto& h : r.humans) {
    humans.push_back({{"id", h.id},
                      {"x", h.pos.x},
                      {"y", h.pos.y},
                      {"trust", h.trust},
                      {"stress", h.stress},
                      {"expertise", h.expertise},
                      {"tenure", h.tenure},
                      {"propensity", h.propensity},
                      {"workload", h.workload},
                      {"assignment", optional_int(h.assignment)},
                      {"cum_trust_gain", h.cum_trust_gain},
                      {"cum_trust_loss", h.cum_trust_loss},
                      {"busy_ticks", h.busy_ticks},
                      {"contributed_last_tick", h.contributed_last_tick},
                      {"declined_task", optional_int(h.declined_task)}});
  }
  j["humans"] = std::move(humans);

  json robots = json::array();
  for (const auto& b : r.robots) {
    robots.push_back({{"id", b.id},
                      {"x", b.pos.x},
                      {"y", b.pos.y},
                      {"reliability", b.reliability},
                      {"transparency", b.transparency},
                      {"capability", b.capability},
                      {"warmth", b.warmth},
                      {"comm_frequency", b.comm_frequency},
                      {"autonomy", b.autonomy},
                      {"battery", b.battery},
                      {"assignment", optional_int(b.assignment)},
                      {"busy_ticks", b.busy_ticks},
                      {"lone_wait", b.lone_wait}});
  }
  j["robots"] = std::move(robots);

  json outcomes = json::array();
  for (const auto& o : r.outcomes) {
    json obs = json::array();
    for (const auto& w : o.observers) obs.push_back({w.human_id, w.vis});
    outcomes.push_back({{"tick", o.tick},
                        {"task_id", o.task_id},
                        {"x", o.task_x},
                        {"y", o.task_y},
                        {"robots", o.robot_ids},
                        {"participants", o.participant_ids},
                        {"success", o.success},
                        {"visibility", o.visibility},
                        {"observers", std::move(obs)}});
  }
  j["outcomes"] = std::move(outcomes);

  // Events as compact rows: [tick, phase, kind, subject, object, value].
  json events = json::array();
  for (const auto& e : r.events) {
    events.push_back({e.tick, static_cast<int>(e.phase), static_cast<int>(e.kind), e.subject, e.object,
                      number_or_null(e.value)});
  }
  j["events"] = std::move(events);

  json trace = json::array();
  for (const auto& t : r.trace) trace.push_back({t.tick, t.trust_mean, t.trust_sd, t.stress_mean});
  j["trace"] = std::move(trace);
  return j;
}

RunResult run_result_from_json(const json& j) {
  RunResult r;
  try {
    r.params = apply_params_json(j.at("params"), SimParams{});
    r.seed = j.at("seed").get<std::uint64_t>();
    r.ticks = j.at("ticks").get<long>();
    r.completed = j.at("completed").get<long>();
    r.succeeded = j.at("succeeded").get<long>();
    r.spawned = j.at("spawned").get<long>();
    for (const auto& h : j.at("humans")) {
      HumanState s;
      s.id = h.at("id");
      s.pos = {h.at("x"), h.at("y")};
      s.trust = h.at("trust");
      s.stress = h.at("stress");
      s.expertise = h.at("expertise");
      s.tenure = h.at("tenure");
      s.propensity = h.at("propensity");
      s.workload = h.at("workload");
      s.assignment = read_optional_int(h.at("assignment"));
      s.cum_trust_gain = h.at("cum_trust_gain");
      s.cum_trust_loss = h.at("cum_trust_loss");
      s.busy_ticks = h.at("busy_ticks");
      s.contributed_last_tick = h.at("contributed_last_tick");
      s.declined_task = read_optional_int(h.at("declined_task"));
      r.humans.push_back(std::move(s));
    }
    for (const auto& b : j.at("robots")) {
      RobotState s;
      s.id = b.at("id");
      s.pos = {b.at("x"), b.at("y")};
      s.reliability = b.at("reliability");
      s.transparency = b.at("transparency");
      s.capability = b.at("capability");
      s.warmth = b.at("warmth");
      s.comm_frequency = b.at("comm_frequency");
      s.autonomy = b.at("autonomy");
      s.battery = b.at("battery");
      s.assignment = read_optional_int(b.at("assignment"));
      s.busy_ticks = b.at("busy_ticks");
      s.lone_wait = b.at("lone_wait");
      r.robots.push_back(std::move(s));
    }
    for (const auto& o : j.at("outcomes")) {
      OutcomeEvent e;
      e.tick = o.at("tick");
      e.task_id = o.at("task_id");
      e.task_x = o.at("x");
      e.task_y = o.at("y");
      e.robot_ids = o.at("robots").get<std::vector<int>>();
      e.participant_ids = o.at("participants").get<std::vector<int>>();
      e.success = o.at("success");
      e.visibility = o.at("visibility");
      for (const auto& w : o.at("observers")) e.observers.push_back({w.at(0).get<int>(), w.at(1).get<double>()});
      r.outcomes.push_back(std::move(e));
    }
    for (const auto& e : j.at("events")) {
      LogEntry l;
      l.tick = e.at(0);
      l.phase = static_cast<Phase>(e.at(1).get<int>());
      l.kind = static_cast<EventKind>(e.at(2).get<int>());
      l.subject = e.at(3);
      l.object = e.at(4);
      l.value = e.at(5).is_null() ? std::numeric_limits<double>::quiet_NaN() : e.at(5).get<double>();
      r.events.push_back(l);
    }
    for (const auto& t : j.at("trace")) {
      r.trace.push_back({t.at(0).get<long>(), t.at(1).get<double>(), t.at(2).get<double>(), t.at(3).get<double>()});
    }
  } catch (const json::exception& e) {
    throw ConfigError(ConfigError::Kind::syntax, "run", std::string("run result: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace hrtsim
