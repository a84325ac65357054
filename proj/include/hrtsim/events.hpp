#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace hrtsim {

/// The nine phases of a tick, in execution order.
enum class Phase : std::uint8_t {
  state_update,
  task_seeking,
  task_execution,
  collaboration,
  communication,
  trust_update,
  task_completion,
  task_generation,
  metrics,
};

inline constexpr std::array<Phase, 9> kTickPhaseOrder{
    Phase::state_update,  Phase::task_seeking,    Phase::task_execution,
    Phase::collaboration, Phase::communication,   Phase::trust_update,
    Phase::task_completion, Phase::task_generation, Phase::metrics,
};

std::string_view phase_name(Phase p) noexcept;

enum class EventKind : std::uint8_t {
  assignment,     // subject = agent, object = task
  pairing,        // subject = human, object = task
  decline,        // subject = human, object = task
  communication,  // subject = robot, object = recipients, value = per-recipient gain
  observation,    // subject = human, object = task, value = realized trust change
  completion,     // subject = task, object = 1 on success, value = success probability
  spawn,          // subject = task
  sample,         // value = mean trust
};

std::string_view event_kind_name(EventKind k) noexcept;

struct LogEntry {
  long tick = 0;
  Phase phase = Phase::state_update;
  EventKind kind = EventKind::assignment;
  int subject = 0;
  int object = 0;
  double value = 0.0;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct Observer {
  int human_id = 0;
  double vis = 0.0;

  friend bool operator==(const Observer&, const Observer&) = default;
};

/// A resolved task, as seen by the trust-update phase of the following tick.
struct OutcomeEvent {
  long tick = 0;
  int task_id = 0;
  double task_x = 0.0;
  double task_y = 0.0;
  std::vector<int> robot_ids;
  std::vector<int> participant_ids;  // humans who contributed work
  bool success = false;
  double visibility = 0.0;  // task visibility v in [40, 100]
  std::vector<Observer> observers;  // filled when observed

  friend bool operator==(const OutcomeEvent&, const OutcomeEvent&) = default;
};

/// Team-level sample taken by the metrics phase.
struct TracePoint {
  long tick = 0;
  double trust_mean = 0.0;
  double trust_sd = 0.0;
  double stress_mean = 0.0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

}  // namespace hrtsim
