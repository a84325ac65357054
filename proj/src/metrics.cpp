#include "hrtsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hrtsim {

double calibration_error(double trust_mean, double mean_robot_reliability) noexcept {
  return std::abs(trust_mean - mean_robot_reliability);
}

double asymmetry_ratio(double cum_loss, double cum_gain) noexcept {
  if (cum_gain > 0.0) return cum_loss / cum_gain;
  return cum_loss > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

double composite_performance_index(const RunMetrics& m, const std::array<double, 4>& w) noexcept {
  return w[0] * (m.task_success_rate / 100.0) +
         w[1] * std::min(1.0, m.productivity / kCpiProductivityScale) +
         w[2] * (1.0 - m.calibration_error / 100.0) +
         w[3] * (m.utilization / 100.0);
}

RunMetrics compute_run_metrics(const RunResult& run, const SimParams& params) {
  RunMetrics m;
  m.completed = run.completed;
  m.succeeded = run.succeeded;
  m.task_success_rate = run.completed > 0 ? 100.0 * static_cast<double>(run.succeeded) / static_cast<double>(run.completed) : 0.0;

  const double agent_ticks = static_cast<double>(params.num_humans + params.num_robots) * static_cast<double>(run.ticks);
  double busy = 0.0;
  for (const auto& h : run.humans) busy += static_cast<double>(h.busy_ticks);
  for (const auto& r : run.robots) busy += static_cast<double>(r.busy_ticks);
  if (agent_ticks > 0.0) {
    m.productivity = 1000.0 * static_cast<double>(run.completed) / agent_ticks;
    m.utilization = 100.0 * busy / agent_ticks;
  }

  double gain = 0.0;
  double loss = 0.0;
  if (!run.humans.empty()) {
    const auto n = static_cast<double>(run.humans.size());
    double sum = 0.0;
    for (const auto& h : run.humans) {
      sum += h.trust;
      gain += h.cum_trust_gain;
      loss += h.cum_trust_loss;
    }
    m.trust_mean = sum / n;
    double ss = 0.0;
    for (const auto& h : run.humans) ss += (h.trust - m.trust_mean) * (h.trust - m.trust_mean);
    m.trust_sd = std::sqrt(ss / n);
  }

  if (!run.robots.empty()) {
    double rel = 0.0;
    for (const auto& r : run.robots) rel += r.reliability;
    m.calibration_error = calibration_error(m.trust_mean, rel / static_cast<double>(run.robots.size()));
  } else {
    m.calibration_error = m.trust_mean;
  }
  m.asymmetry_ratio = asymmetry_ratio(loss, gain);
  m.cpi = composite_performance_index(m, params.cpi_weights);
  return m;
}

}  // namespace hrtsim
