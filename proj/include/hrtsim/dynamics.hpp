#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hrtsim/events.hpp"
#include "hrtsim/world.hpp"

namespace hrtsim {

// ---------------------------------------------------------------------------
// Behavioural rules. Each is a pure function of its inputs (plus the generator
// where a draw is involved) so it can be exercised in isolation.
// ---------------------------------------------------------------------------

/// Working humans accumulate stress in proportion to task difficulty; idle
/// humans recover a fixed fraction per tick.
double update_stress(double stress, std::optional<double> task_difficulty, const SimParams& params) noexcept;

/// Expertise after the high-stress penalty (0.5% per stress point above threshold).
double effective_expertise(double expertise, double stress, double stress_threshold) noexcept;

double tenure_damping(long tenure, const SimParams& params) noexcept;

/// Signed trust change for one observed outcome of one robot.
double trust_delta(bool success, double vis, double transparency, long tenure, const SimParams& params) noexcept;

/// Applies a change with clamping and books the realized change into the gain/loss totals.
void apply_trust_update(HumanState& human, double delta) noexcept;

/// Per-recipient trust gain of one status update.
double communication_gain(double warmth, double transparency, const SimParams& params) noexcept;

/// Trust after one tick of drift toward the propensity-dependent set point.
double trust_drift(const HumanState& human, const SimParams& params) noexcept;
double drift_set_point(double propensity, const SimParams& params) noexcept;

double collaboration_accept_probability(double trust) noexcept;
bool collaboration_accept(double trust, Rng& rng);

double robot_success_probability(double reliability, double difficulty, double capability) noexcept;
double human_success_probability(double difficulty, double effective_expertise) noexcept;

// ---------------------------------------------------------------------------
// Phase operations on a World.
// ---------------------------------------------------------------------------

/// Task seeking: idle agents claim the nearest eligible task, then every assigned
/// agent moves toward its task.
void assign_tasks(World& world);

/// Agents at their tasks contribute work.
void execute_work(World& world);

/// Pairs arrived human-robot teams on collaborative tasks; a human may decline.
void match_collaborators(World& world);

/// One robot's chance to broadcast a status update. Returns true if it spoke.
bool communicate(const RobotState& robot, World& world);

/// Applies one outcome to every human that sees it; fills `event.observers`.
void observe_outcomes(OutcomeEvent& event, World& world);

/// Success probability of a finished task, weighted by each contributor's work.
double task_success_probability(const TaskState& task, const World& world);

/// Resolves a finished task: draws the outcome and releases its agents.
/// Throws std::logic_error if the task has not reached its difficulty.
OutcomeEvent resolve_task(TaskState& task, World& world);

/// Periodic spawning. Returns the number of tasks created.
int generate_tasks(World& world);

/// Advances the world by one tick.
void step(World& world);

// ---------------------------------------------------------------------------

struct RunResult {
  SimParams params;
  std::uint64_t seed = 0;
  long ticks = 0;
  std::vector<LogEntry> events;
  std::vector<OutcomeEvent> outcomes;
  std::vector<HumanState> humans;
  std::vector<RobotState> robots;
  std::vector<TracePoint> trace;
  long completed = 0;
  long succeeded = 0;
  long spawned = 0;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Builds a world and runs it for params.ticks ticks.
RunResult run_simulation(const SimParams& params, std::uint64_t seed, bool record_log = true);

}  // namespace hrtsim
