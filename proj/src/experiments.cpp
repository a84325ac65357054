#include "hrtsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "hrtsim/dynamics.hpp"
#include "hrtsim/errors.hpp"

namespace hrtsim {

namespace {

struct FactorInfo {
  Factor factor;
  std::string_view name;
  std::string_view config_key;
  double SimParams::*field;
  double lo;
  double hi;
};

// Expertise spans its clamp range; tenure has no natural maximum, 900 ticks
// takes damping down to 0.36.
constexpr std::array<FactorInfo, 8> kFactorInfo{{
    {Factor::reliability, "reliability", "robot-reliability", &SimParams::robot_reliability, 10, 100},
    {Factor::transparency, "transparency", "robot-transparency", &SimParams::robot_transparency, 10, 100},
    {Factor::warmth, "warmth", "robot-warmth", &SimParams::robot_warmth_mean, 10, 100},
    {Factor::communication, "communication", "communication-frequency", &SimParams::communication_frequency, 10,
     100},
    {Factor::expertise, "expertise", "expertise-mean", &SimParams::expertise_mean, 20, 100},
    {Factor::propensity, "propensity", "trust-propensity-mean", &SimParams::trust_propensity_mean, 10, 100},
    {Factor::tenure, "tenure", "initial-tenure", &SimParams::initial_tenure, 0, 900},
    {Factor::collaboration, "collaboration", "collaboration-rate", &SimParams::collaboration_rate, 10, 100},
}};

const FactorInfo& info(Factor f) noexcept { return kFactorInfo[static_cast<std::size_t>(f)]; }

std::string normalize(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string level_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string_view factor_name(Factor f) noexcept { return info(f).name; }

std::optional<Factor> parse_factor(std::string_view name) noexcept {
  for (const auto& fi : kFactorInfo) {
    if (name == fi.name || name == fi.config_key) return fi.factor;
  }
  return std::nullopt;
}

Factor require_factor(std::string_view name) {
  if (auto f = parse_factor(name)) return *f;
  throw ConfigError(ConfigError::Kind::invalid, std::string(name), "unknown factor: " + std::string(name));
}

void set_factor(SimParams& params, Factor f, double value) noexcept { params.*(info(f).field) = value; }

double get_factor(const SimParams& params, Factor f) noexcept { return params.*(info(f).field); }

std::vector<double> default_levels(Factor f) {
  const auto& fi = info(f);
  std::vector<double> levels;
  for (int i = 0; i < 10; ++i) levels.push_back(fi.lo + i * (fi.hi - fi.lo) / 9.0);
  return levels;
}

// ---------------------------------------------------------------------------

SimParams ScenarioSpec::apply(SimParams base) const {
  base.initial_tasks = initial_tasks;
  base.robot_reliability = reliability;
  base.robot_transparency = transparency;
  base.robot_autonomy = autonomy;
  base.communication_frequency = communication;
  base.collaboration_rate = collaboration;
  base.initial_trust = initial_trust;
  base.initial_tenure = initial_tenure;
  return base;
}

const std::vector<ScenarioSpec>& builtin_scenarios() {
  static const std::vector<ScenarioSpec> all{
      {"Baseline", 30, 70, 50, 70, 40, 40, 50, 0},
      {"Trust Recovery", 30, 90, 80, 70, 70, 40, 20, 0},
      {"High Workload", 60, 70, 50, 30, 40, 80, 50, 0},
      {"Unreliable", 30, 40, 30, 90, 40, 40, 70, 0},
      {"Optimal", 30, 82, 75, 70, 50, 50, 50, 500},
  };
  return all;
}

const ScenarioSpec* find_builtin_scenario(std::string_view name) noexcept {
  const std::string key = normalize(name);
  for (const auto& s : builtin_scenarios()) {
    if (normalize(s.name) == key) return &s;
  }
  return nullptr;
}

FactorialSpec FactorialSpec::defaults() {
  FactorialSpec spec;
  spec.factors = {
      {Factor::reliability, "R", {40, 70, 90}},
      {Factor::transparency, "T", {30, 60, 90}},
      {Factor::communication, "C", {20, 50, 80}},
      {Factor::collaboration, "L", {20, 50, 80}},
  };
  return spec;
}

std::size_t FactorialSpec::cell_count() const noexcept {
  std::size_t n = factors.empty() ? 0 : 1;
  for (const auto& f : factors) n *= f.levels.size();
  return n;
}

// ---------------------------------------------------------------------------

unsigned worker_count() {
  unsigned n = 0;
  if (const char* env = std::getenv("HRTSIM_THREADS")) n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

std::vector<RunMetrics> run_jobs(const std::vector<RunJob>& jobs, unsigned threads) {
  std::vector<RunMetrics> out(jobs.size());
  if (threads == 0) threads = worker_count();
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto run = run_simulation(jobs[i].params, jobs[i].seed, false);
        out[i] = compute_run_metrics(run, jobs[i].params);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<RunMetrics> run_replications(const SimParams& params, int n, std::uint64_t base_seed) {
  if (n < 1) throw std::invalid_argument("replications must be >= 1");
  params.validate();
  std::vector<RunJob> jobs;
  for (int i = 0; i < n; ++i) jobs.push_back({params, derive_seed(base_seed, static_cast<std::uint64_t>(i))});
  return run_jobs(jobs);
}

// ---------------------------------------------------------------------------

SweepSummary summarize_sweep(Factor factor, const std::vector<SweepRow>& rows) {
  SweepSummary s;
  s.factor = factor;
  int levels = 0;
  for (const auto& r : rows) levels = std::max(levels, r.level_index + 1);
  std::vector<std::vector<double>> trust(levels), success(levels), prod(levels);
  std::vector<double> x, y;
  for (const auto& r : rows) {
    trust[r.level_index].push_back(r.trust_mean);
    success[r.level_index].push_back(r.task_success_rate);
    prod[r.level_index].push_back(r.productivity);
    x.push_back(r.level);
    y.push_back(r.trust_mean);
  }
  s.trust_r = pearson_r(x, y);
  s.eta_trust = eta_squared_oneway(trust);
  s.eta_success = eta_squared_oneway(success);
  s.eta_productivity = eta_squared_oneway(prod);
  return s;
}

SweepResult ofat_sweep(SweepSpec spec, const SimParams& defaults) {
  if (spec.levels.empty()) spec.levels = default_levels(spec.factor);
  if (spec.levels.size() < 2) throw std::invalid_argument("a sweep needs at least 2 levels");
  if (spec.replications < 2) throw std::invalid_argument("a sweep needs at least 2 replications per level");
  if (std::all_of(spec.levels.begin(), spec.levels.end(), [&](double v) { return v == spec.levels.front(); })) {
    throw std::invalid_argument("sweep levels are all identical");
  }

  const std::string tag = "ofat:" + std::string(factor_name(spec.factor));
  std::vector<RunJob> jobs;
  SweepResult res;
  for (std::size_t l = 0; l < spec.levels.size(); ++l) {
    SimParams p = defaults;
    set_factor(p, spec.factor, spec.levels[l]);
    p.validate();
    for (int r = 0; r < spec.replications; ++r) {
      const auto seed = experiment_seed(spec.base_seed, tag, l, static_cast<std::uint64_t>(r));
      jobs.push_back({p, seed});
      res.rows.push_back({static_cast<int>(l), spec.levels[l], r, seed, 0, 0, 0});
    }
  }
  const auto metrics = run_jobs(jobs);
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    auto& row = res.rows[i];
    row.trust_mean = metrics[i].trust_mean;
    row.task_success_rate = metrics[i].task_success_rate;
    row.productivity = metrics[i].productivity;
    res.records.push_back({"ofat", std::string(factor_name(spec.factor)) + "=" + level_text(row.level), row.replicate,
                           row.seed, metrics[i], jobs[i].params});
  }
  res.summary = summarize_sweep(spec.factor, res.rows);
  res.spec = std::move(spec);
  return res;
}

FactorialResult factorial_experiment(const FactorialSpec& spec, const SimParams& defaults) {
  if (spec.factors.empty()) throw std::invalid_argument("factorial spec has no factors");
  if (spec.replications < 2) throw std::invalid_argument("factorial needs at least 2 replications per cell");
  std::vector<int> design;
  std::vector<std::string> names;
  for (const auto& f : spec.factors) {
    if (f.levels.size() < 2) throw std::invalid_argument("factor " + f.label + " needs at least 2 levels");
    design.push_back(static_cast<int>(f.levels.size()));
    names.push_back(f.label.empty() ? std::string(factor_name(f.factor)) : f.label);
  }

  FactorialResult res;
  res.spec = spec;
  std::vector<RunJob> jobs;
  std::vector<std::string> cell_names;
  const std::size_t cells = spec.cell_count();
  for (std::size_t c = 0; c < cells; ++c) {
    // Last factor varies fastest, so rows read like nested loops over the spec.
    std::vector<int> idx(spec.factors.size());
    std::size_t rem = c;
    for (std::size_t i = spec.factors.size(); i-- > 0;) {
      idx[i] = static_cast<int>(rem % spec.factors[i].levels.size());
      rem /= spec.factors[i].levels.size();
    }
    SimParams p = defaults;
    std::string cell_name;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double v = spec.factors[i].levels[static_cast<std::size_t>(idx[i])];
      set_factor(p, spec.factors[i].factor, v);
      if (i) cell_name += ';';
      cell_name += names[i] + "=" + level_text(v);
    }
    p.validate();
    for (int r = 0; r < spec.replications; ++r) {
      const auto seed = experiment_seed(spec.base_seed, "factorial", c, static_cast<std::uint64_t>(r));
      jobs.push_back({p, seed});
      res.rows.push_back({idx, r, seed, 0.0});
      cell_names.push_back(cell_name);
    }
  }

  const auto metrics = run_jobs(jobs);
  std::vector<FactorialObservation> obs;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    res.rows[i].trust_mean = metrics[i].trust_mean;
    res.records.push_back(
        {"factorial", cell_names[i], res.rows[i].replicate, res.rows[i].seed, metrics[i], jobs[i].params});
    obs.push_back({res.rows[i].level_index, metrics[i].trust_mean});
  }
  res.anova = factorial_anova(obs, design, names);
  return res;
}

ScenarioSuiteResult scenario_suite(const std::vector<ScenarioSpec>& scenarios, int reps, std::uint64_t base_seed,
                                   const SimParams& defaults) {
  if (reps < 1) throw std::invalid_argument("replications must be >= 1");
  ScenarioSuiteResult res;
  std::vector<RunJob> jobs;
  for (const auto& s : scenarios) {
    const SimParams p = s.apply(defaults);
    p.validate();
    for (int r = 0; r < reps; ++r) {
      const auto seed = experiment_seed(base_seed, "scenario:" + s.name, 0, static_cast<std::uint64_t>(r));
      jobs.push_back({p, seed});
      res.records.push_back({"scenario", s.name, r, seed, {}, p});
    }
  }
  const auto metrics = run_jobs(jobs);
  for (std::size_t i = 0; i < metrics.size(); ++i) res.records[i].metrics = metrics[i];

  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    ScenarioSummary sum;
    sum.name = scenarios[k].name;
    sum.runs = static_cast<std::size_t>(reps);
    std::vector<double> trusts;
    double completed = 0.0, succeeded = 0.0;
    auto& m = sum.mean;
    for (int r = 0; r < reps; ++r) {
      const auto& x = metrics[k * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
      m.task_success_rate += x.task_success_rate;
      m.trust_mean += x.trust_mean;
      m.trust_sd += x.trust_sd;
      m.productivity += x.productivity;
      m.utilization += x.utilization;
      m.calibration_error += x.calibration_error;
      m.asymmetry_ratio += x.asymmetry_ratio;
      m.cpi += x.cpi;
      completed += static_cast<double>(x.completed);
      succeeded += static_cast<double>(x.succeeded);
      trusts.push_back(x.trust_mean);
    }
    const double n = reps;
    m.task_success_rate /= n;
    m.trust_mean /= n;
    m.trust_sd /= n;
    m.productivity /= n;
    m.utilization /= n;
    m.calibration_error /= n;
    m.asymmetry_ratio /= n;
    m.cpi /= n;
    m.completed = std::lround(completed / n);
    m.succeeded = std::lround(succeeded / n);
    sum.trust_mean_sd = sample_sd(trusts);
    sum.trust_sd_mean = m.trust_sd;
    res.summaries.push_back(std::move(sum));
  }
  return res;
}

AsymmetryResult asymmetry_experiment(const std::vector<double>& reliability_levels, int reps, std::uint64_t base_seed,
                                     const SimParams& defaults) {
  if (reliability_levels.size() < 2) throw std::invalid_argument("asymmetry experiment needs at least 2 levels");
  if (reps < 1) throw std::invalid_argument("replications must be >= 1");
  AsymmetryResult res;
  std::vector<RunJob> jobs;
  for (std::size_t l = 0; l < reliability_levels.size(); ++l) {
    SimParams p = defaults;
    p.robot_reliability = reliability_levels[l];
    p.validate();
    for (int r = 0; r < reps; ++r) {
      const auto seed = experiment_seed(base_seed, "asymmetry", l, static_cast<std::uint64_t>(r));
      jobs.push_back({p, seed});
      res.records.push_back({"asymmetry", "reliability=" + level_text(reliability_levels[l]), r, seed, {}, p});
    }
  }
  const auto metrics = run_jobs(jobs);
  std::vector<double> all;
  for (std::size_t l = 0; l < reliability_levels.size(); ++l) {
    std::vector<double> ratios;
    for (int r = 0; r < reps; ++r) {
      const std::size_t i = l * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r);
      res.records[i].metrics = metrics[i];
      ratios.push_back(metrics[i].asymmetry_ratio);
    }
    all.insert(all.end(), ratios.begin(), ratios.end());
    res.levels.push_back({reliability_levels[l], ratios.size(), mean_of(ratios), sample_sd(ratios)});
  }
  res.overall_mean = mean_of(all);
  return res;
}

}  // namespace hrtsim
