#include "hrtsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hrtsim/errors.hpp"

namespace hrtsim {

double wrap_coordinate(double v, double extent) noexcept {
  double r = std::fmod(v, extent);
  if (r < 0.0) r += extent;
  // fmod of a tiny negative value can round up to extent itself.
  if (r >= extent) r = 0.0;
  return r;
}

Position wrap(Position p, double extent) noexcept {
  return {wrap_coordinate(p.x, extent), wrap_coordinate(p.y, extent)};
}

double wrapped_delta(double a, double b, double extent) noexcept {
  double d = b - a;
  const double half = extent / 2.0;
  if (d > half) {
    d -= extent;
  } else if (d < -half) {
    d += extent;
  }
  return d;
}

double toroidal_distance(Position a, Position b, double extent) noexcept {
  return std::hypot(wrapped_delta(a.x, b.x, extent), wrapped_delta(a.y, b.y, extent));
}

namespace {

[[noreturn]] void range_error(const std::string& field, const std::string& requirement) {
  throw ConfigError(ConfigError::Kind::out_of_range, field, field + " must be " + requirement);
}

void require_percent(double v, const char* field) {
  if (!(v >= 0.0 && v <= 100.0)) range_error(field, "in [0, 100]");
}

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) range_error(field, "> 0");
}

void require_nonnegative(double v, const char* field) {
  if (!(v >= 0.0) || !std::isfinite(v)) range_error(field, ">= 0");
}

}  // namespace

void SimParams::validate() const {
  if (num_humans < 0) range_error("num-humans", ">= 0");
  if (num_robots < 0) range_error("num-robots", ">= 0");
  if (ticks < 0) range_error("ticks", ">= 0");
  if (initial_tasks < 0) range_error("initial-tasks", ">= 0");

  require_percent(robot_reliability, "robot-reliability");
  require_percent(robot_transparency, "robot-transparency");
  require_percent(robot_autonomy, "robot-autonomy");
  require_percent(robot_warmth_mean, "robot-warmth");
  require_percent(communication_frequency, "communication-frequency");
  require_percent(collaboration_rate, "collaboration-rate");
  require_percent(initial_trust, "initial-trust");
  require_nonnegative(initial_tenure, "initial-tenure");
  require_percent(task_difficulty_mean, "task-difficulty-mean");
  require_percent(trust_propensity_mean, "trust-propensity-mean");
  require_percent(trust_propensity_sd, "trust-propensity-sd");
  require_percent(expertise_mean, "expertise-mean");
  require_percent(expertise_sd, "expertise-sd");

  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  require_positive(lambda, "lambda");
  require_positive(eta, "eta");
  require_positive(delta, "delta");
  if (delta > 100.0) range_error("delta", "<= 100");
  require_percent(stress_threshold, "stress-threshold");
  require_nonnegative(familiarity_growth, "familiarity-growth");
  require_nonnegative(comm_radius, "comm-radius");
  require_nonnegative(trust_radius, "trust-radius");

  require_nonnegative(propensity_trust_coeff, "propensity-trust-coeff");
  require_nonnegative(propensity_drift_coeff, "propensity-drift-coeff");
  require_nonnegative(comm_gain_base, "comm-gain-base");
  require_nonnegative(drift_rate, "drift-rate");
  if (drift_rate > 1.0) range_error("drift-rate", "<= 1");

  require_positive(extent, "extent");
  if (spawn_interval < 1) range_error("spawn-interval", ">= 1");
  require_positive(move_speed, "move-speed");
  require_nonnegative(arrival_radius, "arrival-radius");
  require_nonnegative(battery_drain, "battery-drain");
  if (team_patience < 0) range_error("team-patience", ">= 0");

  double total = 0.0;
  for (double w : cpi_weights) {
    if (!(w >= 0.0)) range_error("cpi-weights", "nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) range_error("cpi-weights", "summing to 1");
}

void TaskState::add_work(int agent_id, AgentKind kind, double work) {
  progress += work;
  for (auto& c : contributors) {
    if (c.agent_id == agent_id) {
      c.work += work;
      return;
    }
  }
  contributors.push_back({agent_id, kind, work});
}

HumanState* World::find_human(int id) noexcept {
  if (id < 0 || id >= static_cast<int>(humans.size())) return nullptr;
  return &humans[static_cast<std::size_t>(id)];
}

RobotState* World::find_robot(int id) noexcept {
  const int idx = id - params.num_humans;
  if (idx < 0 || idx >= static_cast<int>(robots.size())) return nullptr;
  return &robots[static_cast<std::size_t>(idx)];
}

const RobotState* World::find_robot(int id) const noexcept {
  return const_cast<World*>(this)->find_robot(id);
}

TaskState* World::find_task(int id) noexcept {
  auto it = std::find_if(tasks.begin(), tasks.end(), [id](const TaskState& t) { return t.id == id; });
  return it == tasks.end() ? nullptr : &*it;
}

int World::open_count() const noexcept {
  return static_cast<int>(std::count_if(tasks.begin(), tasks.end(),
                                        [](const TaskState& t) { return t.status == TaskStatus::open; }));
}

double sample_bounded_normal(double mean, double sd, double lo, double hi, Rng& rng) {
  return std::clamp(rng.normal(mean, sd), lo, hi);
}

Position random_position(double extent, Rng& rng) {
  const double x = rng.uniform(0.0, extent);
  const double y = rng.uniform(0.0, extent);
  return {x, y};
}

double collaboration_probability(double collaboration_rate, double difficulty) noexcept {
  return std::clamp(collaboration_rate / 100.0 + (difficulty - 50.0) / 200.0, 0.0, 1.0);
}

TaskState spawn_task(const SimParams& params, Rng& rng) {
  TaskState task;
  task.pos = random_position(params.extent, rng);
  task.difficulty = sample_bounded_normal(params.task_difficulty_mean, 20.0, 10.0, 100.0, rng);
  task.collaborative = rng.bernoulli(collaboration_probability(params.collaboration_rate, task.difficulty));
  task.visibility = rng.uniform(40.0, 100.0);
  return task;
}

World init_world(const SimParams& params, std::uint64_t seed) {
  params.validate();

  World w;
  w.params = params;
  w.seed = seed;
  w.rng = Rng(seed);
  Rng& rng = w.rng;

  w.humans.reserve(static_cast<std::size_t>(params.num_humans));
  for (int i = 0; i < params.num_humans; ++i) {
    HumanState h;
    h.id = i;
    h.pos = random_position(params.extent, rng);
    h.propensity = sample_bounded_normal(params.trust_propensity_mean, params.trust_propensity_sd, 0.0, 100.0, rng);
    h.trust = std::clamp(params.initial_trust + params.propensity_trust_coeff * (h.propensity - 50.0), 0.0, 100.0);
    h.expertise = sample_bounded_normal(params.expertise_mean, params.expertise_sd, 20.0, 100.0, rng);
    h.tenure = std::lround(params.initial_tenure);
    h.stress = rng.uniform(0.0, 30.0);
    w.humans.push_back(h);
  }

  w.robots.reserve(static_cast<std::size_t>(params.num_robots));
  for (int j = 0; j < params.num_robots; ++j) {
    RobotState r;
    r.id = params.num_humans + j;
    r.pos = random_position(params.extent, rng);
    r.reliability = sample_bounded_normal(params.robot_reliability, 5.0, 0.0, 100.0, rng);
    r.transparency = sample_bounded_normal(params.robot_transparency, 5.0, 0.0, 100.0, rng);
    r.warmth = sample_bounded_normal(params.robot_warmth_mean, 10.0, 0.0, 100.0, rng);
    r.capability = rng.uniform(60.0, 90.0);
    r.comm_frequency = params.communication_frequency;
    r.autonomy = params.robot_autonomy;
    r.battery = 100.0;
    w.robots.push_back(r);
  }

  w.tasks.reserve(static_cast<std::size_t>(params.initial_tasks) + 8);
  for (int k = 0; k < params.initial_tasks; ++k) {
    TaskState t = spawn_task(params, rng);
    t.id = w.next_task_id++;
    t.created_tick = 0;
    w.tasks.push_back(std::move(t));
  }
  return w;
}

}  // namespace hrtsim
