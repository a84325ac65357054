#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hrtsim/events.hpp"
#include "hrtsim/rng.hpp"

namespace hrtsim {

/// Point in the square toroidal workspace. Coordinates are kept in [0, extent).
struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

/// Reduce a coordinate into [0, extent).
double wrap_coordinate(double v, double extent) noexcept;
Position wrap(Position p, double extent) noexcept;

/// Shortest signed displacement from a to b along one wrapped axis, in [-extent/2, extent/2].
double wrapped_delta(double a, double b, double extent) noexcept;

/// Euclidean distance under wraparound.
double toroidal_distance(Position a, Position b, double extent) noexcept;

/// How failures are scaled in trust updates.
enum class LossMode {
  lambda,  // loss rate = lambda * alpha, so |failure| / |success| = lambda at matched moderators
  beta,    // loss rate = beta
};

/// Every tunable of the model. Percent fields live in [0, 100].
struct SimParams {
  // Population and schedule.
  int num_humans = 5;
  int num_robots = 5;
  int ticks = 2000;
  int initial_tasks = 30;

  // Scenario-level settings (percent unless noted).
  double robot_reliability = 70.0;
  double robot_transparency = 50.0;
  double robot_autonomy = 70.0;
  double robot_warmth_mean = 50.0;
  double communication_frequency = 40.0;
  double collaboration_rate = 40.0;
  double initial_trust = 50.0;   // trust units
  double initial_tenure = 0.0;   // ticks
  double task_difficulty_mean = 50.0;
  double trust_propensity_mean = 50.0;
  double trust_propensity_sd = 15.0;
  double expertise_mean = 60.0;
  double expertise_sd = 15.0;

  // Trust and stress dynamics.
  double alpha = 1.5;
  double beta = 2.0;
  double lambda = 1.5;
  LossMode loss_mode = LossMode::lambda;
  double eta = 0.1;
  double delta = 5.0;
  double stress_threshold = 70.0;
  double familiarity_growth = 0.002;
  double comm_radius = 5.0;
  double trust_radius = 10.0;

  // Moderator coefficients.
  double propensity_trust_coeff = 0.05;  // initial trust shift per propensity point
  double propensity_drift_coeff = 0.05;  // drift set-point shift per propensity point
  double comm_gain_base = 0.035;
  double drift_rate = 0.0005;

  // Engine constants.
  double extent = 33.0;
  int spawn_interval = 20;
  double move_speed = 1.0;
  double arrival_radius = 1.0;
  double battery_drain = 0.01;
  int team_patience = 300;  // ticks a robot waits alone on a team task before re-matching
  bool battery_floor_effect = false;

  std::array<double, 4> cpi_weights{0.4, 0.2, 0.2, 0.2};

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

enum class AgentKind { human, robot };

struct HumanState {
  int id = 0;
  Position pos;
  double trust = 0.0;
  double stress = 0.0;
  double expertise = 0.0;
  long tenure = 0;
  double propensity = 0.0;
  double workload = 0.0;
  std::optional<int> assignment;
  double cum_trust_gain = 0.0;
  double cum_trust_loss = 0.0;
  long busy_ticks = 0;
  bool contributed_last_tick = false;
  std::optional<int> declined_task;

  friend bool operator==(const HumanState&, const HumanState&) = default;
};

struct RobotState {
  int id = 0;
  Position pos;
  double reliability = 0.0;
  double transparency = 0.0;
  double capability = 0.0;
  double warmth = 0.0;
  double comm_frequency = 0.0;
  double autonomy = 0.0;
  double battery = 100.0;
  std::optional<int> assignment;
  long busy_ticks = 0;
  long lone_wait = 0;  // consecutive ticks holding a team task without a human

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

enum class TaskStatus { open, in_progress, completed };
enum class TaskOutcome { success, failure };

struct Contribution {
  int agent_id = 0;
  AgentKind kind = AgentKind::human;
  double work = 0.0;

  friend bool operator==(const Contribution&, const Contribution&) = default;
};

struct TaskState {
  int id = 0;
  Position pos;
  double difficulty = 0.0;
  bool collaborative = false;
  double visibility = 0.0;
  double progress = 0.0;
  TaskStatus status = TaskStatus::open;
  std::optional<TaskOutcome> outcome;
  std::vector<Contribution> contributors;
  long created_tick = 0;
  std::optional<long> completed_tick;

  // Slot holders. Solo tasks use exactly one of the two.
  std::optional<int> human_slot;
  std::optional<int> robot_slot;
  bool paired = false;  // collaborative task whose human accepted the robot partner

  bool has_assignee() const noexcept { return human_slot.has_value() || robot_slot.has_value(); }
  /// Adds work for a contributor, merging repeat contributions.
  void add_work(int agent_id, AgentKind kind, double work);

  friend bool operator==(const TaskState&, const TaskState&) = default;
};

struct World {
  SimParams params;
  std::uint64_t seed = 0;
  long tick = 0;
  std::vector<HumanState> humans;
  std::vector<RobotState> robots;
  std::vector<TaskState> tasks;            // outstanding (open or in progress)
  std::vector<TaskState> completed_tasks;  // resolved, in completion order
  Rng rng;
  int next_task_id = 0;
  long completed_success = 0;
  long completed_failure = 0;
  long spawned = 0;

  // Outcomes resolved this tick wait for the next tick's trust-update phase.
  std::vector<OutcomeEvent> pending_outcomes;
  std::vector<OutcomeEvent> observed_outcomes;
  std::vector<TracePoint> trace;
  std::vector<LogEntry> log;
  bool record_log = true;

  HumanState* find_human(int id) noexcept;
  RobotState* find_robot(int id) noexcept;
  TaskState* find_task(int id) noexcept;
  const RobotState* find_robot(int id) const noexcept;

  int open_count() const noexcept;

  friend bool operator==(const World&, const World&) = default;
};

/// Draws Normal(mean, sd) and clamps into [lo, hi]. Two uniforms per call.
double sample_bounded_normal(double mean, double sd, double lo, double hi, Rng& rng);

/// Uniform position over the square.
Position random_position(double extent, Rng& rng);

/// New open task. Uses id/created_tick zero; callers stamp them.
TaskState spawn_task(const SimParams& params, Rng& rng);

/// Probability that a task of difficulty d requires a human-robot team.
double collaboration_probability(double collaboration_rate, double difficulty) noexcept;

World init_world(const SimParams& params, std::uint64_t seed);

/// Humans occupy ids [0, num_humans), robots follow.
inline bool is_human_id(const World& w, int id) noexcept { return id < w.params.num_humans; }

}  // namespace hrtsim
