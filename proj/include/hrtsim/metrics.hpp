#pragma once

#include <array>

#include "hrtsim/dynamics.hpp"

namespace hrtsim {

/// Scalar summary of one run.
struct RunMetrics {
  double task_success_rate = 0.0;  // percent of completed tasks that succeeded
  double trust_mean = 0.0;         // final mean trust over humans
  double trust_sd = 0.0;           // final population SD of trust over humans
  double productivity = 0.0;       // completed tasks per 1000 agent-ticks
  double utilization = 0.0;        // percent of agent-ticks spent busy
  double calibration_error = 0.0;  // |trust_mean - mean robot reliability|
  double asymmetry_ratio = 0.0;    // cumulative loss / cumulative gain; +inf when gain is zero
  double cpi = 0.0;                // composite performance index in [0, 1]
  long completed = 0;
  long succeeded = 0;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// Productivity at which the CPI productivity component saturates.
inline constexpr double kCpiProductivityScale = 6.0;

double calibration_error(double trust_mean, double mean_robot_reliability) noexcept;

/// Loss/gain ratio. 0 when both are zero; +infinity when only the loss is positive.
double asymmetry_ratio(double cum_loss, double cum_gain) noexcept;

double composite_performance_index(const RunMetrics& m, const std::array<double, 4>& weights) noexcept;

RunMetrics compute_run_metrics(const RunResult& run, const SimParams& params);

}  // namespace hrtsim
