#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/control.hpp"
#include "swarmsim/core.hpp"
#include "swarmsim/crlb.hpp"
#include "swarmsim/estimator.hpp"

namespace swarmsim {

enum class Termination { Converged, MaxSlots, SingularFim };
std::string to_string(Termination t);

/// State of one slot: true positions before the step, estimates (world
/// frame), the commanded step, tr(kappa), and how many constraints were
/// active.
struct SlotRecord {
  SwarmState truth;
  std::vector<Point2> estimate;
  ControlSignal control;
  double crlb_trace = 0.0;
  std::size_t constraint_events = 0;
};

struct TrialTrace {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::vector<SlotRecord> records;
  /// Truth after the last applied step.
  SwarmState final_state;
  Termination termination = Termination::MaxSlots;
  std::string failure;

  /// Number of steps applied.
  std::size_t steps() const { return final_state.slot; }
};

/// localize -> constrain -> control -> move until every UAV sits within
/// goal tolerance of its target or max_slots is reached.
TrialTrace run_trial(const Scenario& scenario, std::uint64_t seed);

/// Per-slot formation error of one trial in the baseline frame: entry
/// [k * N + i] is ||theta_i^(k) - theta*_i||^2. Includes the final state.
std::vector<double> squared_errors(const TrialTrace& trace, const Scenario& scenario);

struct AuditReport {
  double min_inter_uav_distance = std::numeric_limits<double>::infinity();
  double min_obstacle_clearance = std::numeric_limits<double>::infinity();
  std::size_t safety_violation_slots = 0;     // min d_ij < d_S - step
  std::size_t clearance_violation_slots = 0;  // min clearance < d_O - step
  std::size_t segment_intersections = 0;      // trajectory segments crossing an obstacle
  std::size_t goal_violations = 0;            // targets inside d_S of each other or d_O of an obstacle
  double final_max_goal_distance = 0.0;
  std::size_t states_checked = 0;

  bool clean() const {
    return safety_violation_slots == 0 && clearance_violation_slots == 0 && segment_intersections == 0 &&
           goal_violations == 0;
  }
  void merge(const AuditReport& other);
};

/// Audit a sequence of true UAV position lists (one per slot, in order).
AuditReport audit_positions(const std::vector<std::vector<Point2>>& states, const Scenario& scenario);
AuditReport trajectory_audit(const TrialTrace& trace, const Scenario& scenario);

struct RmseSeries {
  std::vector<double> values;
  std::vector<double> stderr_values;
  std::size_t n_trials = 0;

  double final_value() const { return values.empty() ? 0.0 : values.back(); }
};

struct MonteCarloOptions {
  std::size_t jobs = 1;
  /// Number of leading trials whose full trace is kept.
  std::size_t keep_traces = 0;
};

struct MonteCarloResult {
  RmseSeries series;
  std::size_t converged = 0;
  std::size_t max_slots = 0;
  std::size_t singular = 0;
  AuditReport audit;
  std::vector<AuditReport> trial_audits;
  std::vector<TrialTrace> traces;
  double wall_seconds = 0.0;
};

/// RMSE^(k) = (1/N) sum_i sqrt(mean_m ||theta_im^(k) - theta*_i||^2) over
/// trials seeded base_seed + m. Trials ending in SingularFim are counted but
/// left out of the series.
MonteCarloResult monte_carlo(const Scenario& scenario, std::size_t n_trials, std::uint64_t base_seed,
                             const MonteCarloOptions& options = {});

struct SweepRow {
  std::size_t n_uavs = 0;
  SensingMode mode = SensingMode::Ranging;
  bool xi = false;
  double rmse = 0.0;
};

/// Network CRLB RMSE for UAVs evenly spaced on a circle, for ranging with
/// xi = 0, ranging with xi = 1, and bearing.
std::vector<SweepRow> localization_sweep(const Scenario& templ, const std::vector<std::size_t>& n_values,
                                         double radius = 45.0);

}  // namespace swarmsim
