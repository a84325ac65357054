#include "hrtsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace hrtsim {

std::string_view phase_name(Phase p) noexcept {
  switch (p) {
    case Phase::state_update: return "state-update";
    case Phase::task_seeking: return "task-seeking";
    case Phase::task_execution: return "task-execution";
    case Phase::collaboration: return "collaboration";
    case Phase::communication: return "communication";
    case Phase::trust_update: return "trust-update";
    case Phase::task_completion: return "task-completion";
    case Phase::task_generation: return "task-generation";
    case Phase::metrics: return "metrics";
  }
  return "?";
}

std::string_view event_kind_name(EventKind k) noexcept {
  switch (k) {
    case EventKind::assignment: return "assignment";
    case EventKind::pairing: return "pairing";
    case EventKind::decline: return "decline";
    case EventKind::communication: return "communication";
    case EventKind::observation: return "observation";
    case EventKind::completion: return "completion";
    case EventKind::spawn: return "spawn";
    case EventKind::sample: return "sample";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

double update_stress(double stress, std::optional<double> task_difficulty, const SimParams& params) noexcept {
  if (task_difficulty) {
    return std::clamp(stress + params.eta * (*task_difficulty / 50.0), 0.0, 100.0);
  }
  return std::clamp(stress * (1.0 - params.delta / 100.0), 0.0, 100.0);
}

double effective_expertise(double expertise, double stress, double stress_threshold) noexcept {
  return expertise * (1.0 - 0.005 * std::max(0.0, stress - stress_threshold));
}

double tenure_damping(long tenure, const SimParams& params) noexcept {
  return 1.0 / (1.0 + params.familiarity_growth * static_cast<double>(tenure));
}

double trust_delta(bool success, double vis, double transparency, long tenure, const SimParams& params) noexcept {
  const double damp = tenure_damping(tenure, params);
  if (success) {
    const double trans_gain = 0.5 + 0.5 * transparency / 100.0;
    return params.alpha * vis * trans_gain * damp;
  }
  const double trans_loss = 1.25 - 0.75 * transparency / 100.0;
  const double loss_rate = params.loss_mode == LossMode::lambda ? params.lambda * params.alpha : params.beta;
  return -loss_rate * vis * trans_loss * damp;
}

void apply_trust_update(HumanState& human, double delta) noexcept {
  const double before = human.trust;
  human.trust = std::clamp(before + delta, 0.0, 100.0);
  const double realized = human.trust - before;
  if (realized > 0.0) {
    human.cum_trust_gain += realized;
  } else if (realized < 0.0) {
    human.cum_trust_loss -= realized;
  }
}

double communication_gain(double warmth, double transparency, const SimParams& params) noexcept {
  return params.comm_gain_base * (0.3 + 0.7 * warmth / 100.0) * (0.5 + 0.5 * transparency / 100.0);
}

double drift_set_point(double propensity, const SimParams& params) noexcept {
  return 50.0 + params.propensity_drift_coeff * (propensity - 50.0);
}

double trust_drift(const HumanState& human, const SimParams& params) noexcept {
  const double target = drift_set_point(human.propensity, params);
  return std::clamp(human.trust + params.drift_rate * (target - human.trust), 0.0, 100.0);
}

double collaboration_accept_probability(double trust) noexcept {
  return std::clamp(trust / 100.0, 0.1, 1.0);
}

bool collaboration_accept(double trust, Rng& rng) {
  return rng.bernoulli(collaboration_accept_probability(trust));
}

double robot_success_probability(double reliability, double difficulty, double capability) noexcept {
  return (reliability / 100.0) * (1.0 - std::max(0.0, difficulty - capability) / 200.0);
}

double human_success_probability(double difficulty, double eff_expertise) noexcept {
  return std::clamp(0.95 - std::max(0.0, difficulty - eff_expertise) / 100.0, 0.2, 0.95);
}

// ---------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------

namespace {

void log_event(World& w, Phase phase, EventKind kind, int subject, int object, double value) {
  if (w.record_log) w.log.push_back({w.tick, phase, kind, subject, object, value});
}

bool arrived(Position agent, Position task, const SimParams& p) {
  return toroidal_distance(agent, task, p.extent) <= p.arrival_radius;
}

void move_toward(Position& pos, Position target, const SimParams& p) {
  const double dx = wrapped_delta(pos.x, target.x, p.extent);
  const double dy = wrapped_delta(pos.y, target.y, p.extent);
  const double dist = std::hypot(dx, dy);
  if (dist <= p.arrival_radius) return;
  if (dist <= p.move_speed) {
    pos = target;
    return;
  }
  const double s = p.move_speed / dist;
  pos = wrap({pos.x + dx * s, pos.y + dy * s}, p.extent);
}

void release_slot_holders(TaskState& task, World& w) {
  if (task.human_slot) {
    if (auto* h = w.find_human(*task.human_slot)) h->assignment.reset();
  }
  if (task.robot_slot) {
    if (auto* r = w.find_robot(*task.robot_slot)) r->assignment.reset();
  }
  task.human_slot.reset();
  task.robot_slot.reset();
  task.paired = false;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(idx));
  return idx;
}

void state_update(World& w) {
  const SimParams& p = w.params;
  for (auto& h : w.humans) {
    h.stress = update_stress(h.stress, h.contributed_last_tick ? std::optional<double>(h.workload * 50.0) : std::nullopt, p);
    h.tenure += 1;
    h.trust = trust_drift(h, p);
  }
}

void communication_phase(World& w) {
  for (std::size_t j : shuffled_indices(w.robots.size(), w.rng)) {
    communicate(w.robots[j], w);
  }
}

void trust_update_phase(World& w) {
  auto pending = std::move(w.pending_outcomes);
  w.pending_outcomes.clear();
  for (auto& ev : pending) {
    observe_outcomes(ev, w);
    w.observed_outcomes.push_back(std::move(ev));
  }
}

void completion_phase(World& w) {
  for (std::size_t i = 0; i < w.tasks.size();) {
    TaskState& t = w.tasks[i];
    if (t.progress >= t.difficulty) {
      w.pending_outcomes.push_back(resolve_task(t, w));
      w.completed_tasks.push_back(std::move(t));
      w.tasks.erase(w.tasks.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
}

void metrics_phase(World& w) {
  if (w.tick % 10 != 0) return;
  TracePoint tp;
  tp.tick = w.tick;
  const auto n = static_cast<double>(w.humans.size());
  if (n > 0) {
    double sum = 0.0;
    double stress = 0.0;
    for (const auto& h : w.humans) {
      sum += h.trust;
      stress += h.stress;
    }
    tp.trust_mean = sum / n;
    tp.stress_mean = stress / n;
    double ss = 0.0;
    for (const auto& h : w.humans) ss += (h.trust - tp.trust_mean) * (h.trust - tp.trust_mean);
    tp.trust_sd = std::sqrt(ss / n);
  }
  w.trace.push_back(tp);
  log_event(w, Phase::metrics, EventKind::sample, 0, 0, tp.trust_mean);
}

}  // namespace

void assign_tasks(World& w) {
  const SimParams& p = w.params;
  const bool teams_possible = p.num_humans > 0 && p.num_robots > 0;

  // Autonomy is checked once per idle robot per seeking round.
  std::vector<char> may_solo(w.robots.size(), 0);
  for (std::size_t j : shuffled_indices(w.robots.size(), w.rng)) {
    const RobotState& r = w.robots[j];
    if (!r.assignment) may_solo[j] = w.rng.bernoulli(r.autonomy / 100.0) ? 1 : 0;
  }

  struct Candidate {
    double dist;
    int agent_id;
    int task_id;
    std::size_t task_index;
  };
  std::vector<Candidate> candidates;

  for (const auto& h : w.humans) {
    if (h.assignment) continue;
    for (std::size_t k = 0; k < w.tasks.size(); ++k) {
      const TaskState& t = w.tasks[k];
      if (h.declined_task && *h.declined_task == t.id) continue;
      const bool eligible = t.collaborative ? (teams_possible && !t.human_slot) : !t.has_assignee();
      if (eligible) candidates.push_back({toroidal_distance(h.pos, t.pos, p.extent), h.id, t.id, k});
    }
  }
  for (std::size_t j = 0; j < w.robots.size(); ++j) {
    const RobotState& r = w.robots[j];
    if (r.assignment) continue;
    for (std::size_t k = 0; k < w.tasks.size(); ++k) {
      const TaskState& t = w.tasks[k];
      const bool eligible =
          t.collaborative ? (teams_possible && !t.robot_slot) : (may_solo[j] && !t.has_assignee());
      if (eligible) candidates.push_back({toroidal_distance(r.pos, t.pos, p.extent), r.id, t.id, k});
    }
  }

  // Nearest pairs first; ties go to the lower agent id.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.dist, a.agent_id, a.task_id) < std::tie(b.dist, b.agent_id, b.task_id);
  });

  for (const auto& c : candidates) {
    TaskState& t = w.tasks[c.task_index];
    if (is_human_id(w, c.agent_id)) {
      HumanState& h = *w.find_human(c.agent_id);
      if (h.assignment) continue;
      if (t.collaborative ? t.human_slot.has_value() : t.has_assignee()) continue;
      t.human_slot = h.id;
      h.assignment = t.id;
      h.declined_task.reset();
    } else {
      RobotState& r = *w.find_robot(c.agent_id);
      if (r.assignment) continue;
      if (t.collaborative ? t.robot_slot.has_value() : t.has_assignee()) continue;
      t.robot_slot = r.id;
      r.assignment = t.id;
    }
    t.status = TaskStatus::in_progress;
    log_event(w, Phase::task_seeking, EventKind::assignment, c.agent_id, t.id, c.dist);
  }

  for (auto& h : w.humans) {
    if (h.assignment) move_toward(h.pos, w.find_task(*h.assignment)->pos, p);
  }
  for (auto& r : w.robots) {
    if (r.assignment) move_toward(r.pos, w.find_task(*r.assignment)->pos, p);
  }
}

void execute_work(World& w) {
  const SimParams& p = w.params;
  for (auto& h : w.humans) {
    h.contributed_last_tick = false;
    h.workload = 0.0;
  }

  auto human_works = [&](HumanState& h, TaskState& t) {
    const double eff = effective_expertise(h.expertise, h.stress, p.stress_threshold);
    t.add_work(h.id, AgentKind::human, eff / 20.0);
    h.contributed_last_tick = true;
    h.workload = t.difficulty / 50.0;
  };
  auto robot_works = [&](RobotState& r, TaskState& t) {
    double rate = r.capability / 20.0;
    if (p.battery_floor_effect) rate *= r.battery / 100.0;
    t.add_work(r.id, AgentKind::robot, rate);
    r.battery = std::max(0.0, r.battery - p.battery_drain);
  };

  for (auto& t : w.tasks) {
    if (t.status != TaskStatus::in_progress) continue;
    HumanState* h = t.human_slot ? w.find_human(*t.human_slot) : nullptr;
    RobotState* r = t.robot_slot ? w.find_robot(*t.robot_slot) : nullptr;
    if (t.collaborative) {
      if (t.paired && h && r) {
        human_works(*h, t);
        robot_works(*r, t);
      }
    } else if (h && arrived(h->pos, t.pos, p)) {
      human_works(*h, t);
    } else if (r && arrived(r->pos, t.pos, p)) {
      robot_works(*r, t);
    }
  }

  // An agent is busy on every tick it holds a task: travelling, waiting for a
  // partner, or working.
  for (auto& h : w.humans) {
    if (h.assignment) ++h.busy_ticks;
  }
  for (auto& r : w.robots) {
    if (r.assignment) ++r.busy_ticks;
    const TaskState* t = r.assignment ? w.find_task(*r.assignment) : nullptr;
    r.lone_wait = (t && t->collaborative && !t->human_slot) ? r.lone_wait + 1 : 0;
  }
}

void match_collaborators(World& w) {
  const SimParams& p = w.params;

  // Consolidate half-staffed team tasks: a robot holding a team task alone moves
  // to the nearest team task where a human is waiting alone.
  struct Move {
    double dist;
    int robot_id;
    std::size_t from;
    std::size_t to;
  };
  std::vector<Move> moves;
  for (std::size_t a = 0; a < w.tasks.size(); ++a) {
    const TaskState& from = w.tasks[a];
    if (!from.collaborative || !from.robot_slot || from.human_slot) continue;
    const RobotState& r = *w.find_robot(*from.robot_slot);
    if (r.lone_wait < p.team_patience) continue;
    for (std::size_t b = 0; b < w.tasks.size(); ++b) {
      const TaskState& to = w.tasks[b];
      if (!to.collaborative || to.robot_slot || !to.human_slot) continue;
      moves.push_back({toroidal_distance(r.pos, to.pos, p.extent), r.id, a, b});
    }
  }
  std::sort(moves.begin(), moves.end(), [](const Move& x, const Move& y) {
    return std::tie(x.dist, x.robot_id, x.to) < std::tie(y.dist, y.robot_id, y.to);
  });
  for (const auto& m : moves) {
    TaskState& from = w.tasks[m.from];
    TaskState& to = w.tasks[m.to];
    if (from.robot_slot != m.robot_id || to.robot_slot) continue;
    from.robot_slot.reset();
    from.status = TaskStatus::open;
    to.robot_slot = m.robot_id;
    RobotState& r = *w.find_robot(m.robot_id);
    r.assignment = to.id;
    r.lone_wait = 0;
    log_event(w, Phase::collaboration, EventKind::assignment, m.robot_id, to.id, m.dist);
  }

  for (auto& t : w.tasks) {
    if (!t.collaborative || t.paired || !t.human_slot || !t.robot_slot) continue;
    HumanState& h = *w.find_human(*t.human_slot);
    const RobotState& r = *w.find_robot(*t.robot_slot);
    if (!arrived(h.pos, t.pos, p) || !arrived(r.pos, t.pos, p)) continue;
    if (collaboration_accept(h.trust, w.rng)) {
      t.paired = true;
      log_event(w, Phase::collaboration, EventKind::pairing, h.id, t.id, h.trust);
    } else {
      h.assignment.reset();
      h.declined_task = t.id;
      t.human_slot.reset();
      log_event(w, Phase::collaboration, EventKind::decline, h.id, t.id, h.trust);
    }
  }
}

bool communicate(const RobotState& robot, World& w) {
  const SimParams& p = w.params;
  if (!w.rng.bernoulli(robot.comm_frequency / 100.0)) return false;
  const double gain = communication_gain(robot.warmth, robot.transparency, p);
  int recipients = 0;
  for (auto& h : w.humans) {
    if (toroidal_distance(h.pos, robot.pos, p.extent) <= p.comm_radius) {
      apply_trust_update(h, gain);
      ++recipients;
    }
  }
  log_event(w, Phase::communication, EventKind::communication, robot.id, recipients, gain);
  return true;
}

void observe_outcomes(OutcomeEvent& event, World& w) {
  const SimParams& p = w.params;
  event.observers.clear();
  if (event.robot_ids.empty()) return;  // trust here is trust in robots
  const Position where{event.task_x, event.task_y};
  for (auto& h : w.humans) {
    double vis = 0.0;
    const bool participant =
        std::find(event.participant_ids.begin(), event.participant_ids.end(), h.id) != event.participant_ids.end();
    if (participant) {
      vis = 1.0;
    } else if (toroidal_distance(h.pos, where, p.extent) <= p.trust_radius) {
      if (!w.rng.bernoulli(event.visibility / 100.0)) continue;
      vis = event.visibility / 100.0;
    } else {
      continue;
    }
    event.observers.push_back({h.id, vis});
    const double before = h.trust;
    for (int rid : event.robot_ids) {
      const RobotState* r = w.find_robot(rid);
      apply_trust_update(h, trust_delta(event.success, vis, r->transparency, h.tenure, p));
    }
    log_event(w, Phase::trust_update, EventKind::observation, h.id, event.task_id, h.trust - before);
  }
}

double task_success_probability(const TaskState& task, const World& w) {
  double total = 0.0;
  double weighted = 0.0;
  for (const auto& c : task.contributors) {
    double pi = 0.0;
    if (c.kind == AgentKind::robot) {
      const RobotState& r = *w.find_robot(c.agent_id);
      pi = robot_success_probability(r.reliability, task.difficulty, r.capability);
    } else {
      const HumanState& h = w.humans[static_cast<std::size_t>(c.agent_id)];
      pi = human_success_probability(task.difficulty, effective_expertise(h.expertise, h.stress, w.params.stress_threshold));
    }
    weighted += c.work * pi;
    total += c.work;
  }
  return total > 0.0 ? weighted / total : 0.0;
}

OutcomeEvent resolve_task(TaskState& task, World& w) {
  if (task.status == TaskStatus::completed || task.progress < task.difficulty) {
    throw std::logic_error("resolve_task called on an unfinished task");
  }
  const double p_success = task_success_probability(task, w);
  const bool success = w.rng.bernoulli(p_success);

  OutcomeEvent ev;
  ev.tick = w.tick;
  ev.task_id = task.id;
  ev.task_x = task.pos.x;
  ev.task_y = task.pos.y;
  ev.success = success;
  ev.visibility = task.visibility;
  for (const auto& c : task.contributors) {
    (c.kind == AgentKind::robot ? ev.robot_ids : ev.participant_ids).push_back(c.agent_id);
  }

  release_slot_holders(task, w);
  task.status = TaskStatus::completed;
  task.outcome = success ? TaskOutcome::success : TaskOutcome::failure;
  task.completed_tick = w.tick;
  if (success) {
    ++w.completed_success;
  } else {
    ++w.completed_failure;
  }
  log_event(w, Phase::task_completion, EventKind::completion, task.id, success ? 1 : 0, p_success);
  return ev;
}

int generate_tasks(World& w) {
  const SimParams& p = w.params;
  if (w.tick % p.spawn_interval != 0) return 0;
  const int target = (p.initial_tasks + 1) / 2;
  const int n = std::min(5, std::max(0, target - w.open_count()));
  for (int i = 0; i < n; ++i) {
    TaskState t = spawn_task(p, w.rng);
    t.id = w.next_task_id++;
    t.created_tick = w.tick;
    log_event(w, Phase::task_generation, EventKind::spawn, t.id, 0, t.difficulty);
    w.tasks.push_back(std::move(t));
  }
  w.spawned += n;
  return n;
}

void step(World& w) {
  ++w.tick;
  state_update(w);
  assign_tasks(w);
  execute_work(w);
  match_collaborators(w);
  communication_phase(w);
  trust_update_phase(w);
  completion_phase(w);
  generate_tasks(w);
  metrics_phase(w);
}

RunResult run_simulation(const SimParams& params, std::uint64_t seed, bool record_log) {
  World w = init_world(params, seed);
  w.record_log = record_log;
  for (int t = 0; t < params.ticks; ++t) step(w);

  RunResult r;
  r.params = params;
  r.seed = seed;
  r.ticks = w.tick;
  r.events = std::move(w.log);
  r.outcomes = std::move(w.observed_outcomes);
  r.humans = std::move(w.humans);
  r.robots = std::move(w.robots);
  r.trace = std::move(w.trace);
  r.completed = w.completed_success + w.completed_failure;
  r.succeeded = w.completed_success;
  r.spawned = w.spawned;
  return r;
}

}  // namespace hrtsim
