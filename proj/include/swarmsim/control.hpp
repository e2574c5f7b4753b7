#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "swarmsim/core.hpp"
#include "swarmsim/estimator.hpp"

namespace swarmsim {

enum class ConstraintKind { Safety, Obstacle };

/// One proximity constraint seen by `subject`. `value` is the signed margin
/// g = distance - threshold (negative when violated). Constraints are picked
/// up once the margin drops below one step, so `value` lies in (-inf, step).
struct ActiveConstraint {
  ConstraintKind kind = ConstraintKind::Safety;
  std::size_t subject = 0;  // UAV index, 0-based (0 is UAV 1)
  std::size_t other = 0;    // UAV index or obstacle index
  double value = 0.0;
  Point2 gradient;  // unit gradient of the distance w.r.t. the subject position

  bool violated() const { return value < 0.0; }
};

struct ActiveConstraintSet {
  std::vector<ActiveConstraint> entries;

  std::size_t violated_count() const;
  bool empty() const { return entries.empty(); }
};

struct ControlSignal {
  std::vector<Point2> steps;
};

/// Unit gradient of ||estimated - desired|| w.r.t. the estimate, i.e. the
/// direction (cos a, sin a) of estimated - desired. Zero within tolerance.
Point2 cost_gradient(Point2 estimated, Point2 desired, double goal_tolerance);

/// Proximity constraints from the true positions: every UAV pair closer than
/// d_S + step (an entry per UAV) and every UAV closer than d_O + step to an
/// obstacle.
ActiveConstraintSet detect_active_constraints(const SwarmState& truth, std::span<const Obstacle> obstacles,
                                              const MotionParams& motion);

/// Projector onto the orthogonal complement of the column space of
/// `gradients`, I - N (N^T N)^-1 N^T, after dropping linearly dependent
/// columns.
Eigen::MatrixXd projection_matrix(const Eigen::MatrixXd& gradients);

/// Column indices of `gradients` retained as linearly independent, in pivot
/// order (threshold 1e-10 * ||N||).
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& gradients);

/// Projection-gradient step for every UAV. Estimates, desired positions, and
/// constraint gradients must share one frame.
ControlSignal control_step(const EstimateState& estimates, std::span<const Point2> desired,
                           const ActiveConstraintSet& constraints, const MotionParams& motion,
                           ControlMode mode = ControlMode::PerUav);

/// Advance every true UAV position by its step; slot increments.
SwarmState apply_control(const SwarmState& truth, const ControlSignal& u);

}  // namespace swarmsim
