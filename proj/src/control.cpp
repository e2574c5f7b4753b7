#include "swarmsim/control.hpp"

#include <algorithm>

namespace swarmsim {

namespace {

constexpr double kRankTol = 1e-10;

// Descent direction projected onto the tangent space of the blocking
// constraints. Primal active-set loop: add the constraint the current
// direction violates most, drop any whose multiplier shows the direction
// already leaves it.
Eigen::VectorXd projected_descent(const Eigen::VectorXd& descent, const Eigen::MatrixXd& normals) {
  const Eigen::Index m = normals.cols();
  if (m == 0 || descent.isZero(0.0)) return descent;

  std::vector<Eigen::Index> active;
  const double scale = descent.norm();
  for (Eigen::Index iter = 0; iter < 4 * m + 4; ++iter) {
    Eigen::VectorXd d = descent;
    if (!active.empty()) {
      Eigen::MatrixXd Na(normals.rows(), static_cast<Eigen::Index>(active.size()));
      for (std::size_t k = 0; k < active.size(); ++k) Na.col(static_cast<Eigen::Index>(k)) = normals.col(active[k]);
      const auto keep = independent_columns(Na);
      if (keep.size() < active.size()) {
        std::vector<Eigen::Index> pruned;
        for (auto c : keep) pruned.push_back(active[static_cast<std::size_t>(c)]);
        std::sort(pruned.begin(), pruned.end());
        active = std::move(pruned);
        continue;
      }
      const Eigen::VectorXd lambda = (Na.transpose() * Na).ldlt().solve(Na.transpose() * descent);
      Eigen::Index worst = -1;
      double worst_val = 1e-15 * scale;
      for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (lambda(k) > worst_val) {
          worst_val = lambda(k);
          worst = k;
        }
      }
      if (worst >= 0) {
        active.erase(active.begin() + worst);
        continue;
      }
      d = descent - Na * lambda;
    }
    if (d.norm() <= 1e-12 * scale) return Eigen::VectorXd::Zero(descent.size());

    Eigen::Index entering = -1;
    double most = -1e-12 * d.norm();
    for (Eigen::Index k = 0; k < m; ++k) {
      if (std::find(active.begin(), active.end(), k) != active.end()) continue;
      const double s = normals.col(k).dot(d);
      if (s < most) {
        most = s;
        entering = k;
      }
    }
    if (entering < 0) return d;
    active.push_back(entering);
    std::sort(active.begin(), active.end());
  }
  return Eigen::VectorXd::Zero(descent.size());
}

// -N (N^T N)^-1 g over the independent violated constraints.
Eigen::VectorXd restoration(const Eigen::MatrixXd& normals, const Eigen::VectorXd& margins) {
  if (normals.cols() == 0) return Eigen::VectorXd::Zero(normals.rows());
  const auto keep = independent_columns(normals);
  Eigen::MatrixXd Nr(normals.rows(), static_cast<Eigen::Index>(keep.size()));
  Eigen::VectorXd gr(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    Nr.col(static_cast<Eigen::Index>(k)) = normals.col(keep[k]);
    gr(static_cast<Eigen::Index>(k)) = margins(keep[k]);
  }
  return -Nr * (Nr.transpose() * Nr).ldlt().solve(gr);
}

Point2 scale_step(Point2 u, double cost_norm, double remaining, double gamma) {
  const double mag = u.norm();
  if (mag <= 1e-12 * gamma) return {0.0, 0.0};
  const double target = cost_norm > 0.0 ? std::min(gamma, remaining) : std::min(gamma, mag);
  return (target / mag) * u;
}

}  // namespace

std::size_t ActiveConstraintSet::violated_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const ActiveConstraint& c) { return c.violated(); }));
}

Point2 cost_gradient(Point2 estimated, Point2 desired, double goal_tolerance) {
  const Point2 d = estimated - desired;
  const double r = d.norm();
  if (r < goal_tolerance || r == 0.0) return {0.0, 0.0};
  return (1.0 / r) * d;
}

ActiveConstraintSet detect_active_constraints(const SwarmState& truth, std::span<const Obstacle> obstacles,
                                              const MotionParams& motion) {
  ActiveConstraintSet set;
  const double gamma = motion.step();
  const auto& p = truth.uavs;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const Point2 delta = p[i] - p[j];
      const double d = delta.norm();
      if (!(d < motion.safety_distance + gamma)) continue;
      const Point2 n = d > 0.0 ? (1.0 / d) * delta : Point2{-1.0, 0.0};
      const double g = d - motion.safety_distance;
      set.entries.push_back({ConstraintKind::Safety, i, j, g, n});
      set.entries.push_back({ConstraintKind::Safety, j, i, g, -1.0 * n});
    }
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      const auto& box = obstacles[k];
      const Point2 c = closest_point(box, p[i]);
      const double l = (p[i] - c).norm();
      if (!(l < motion.obstacle_clearance + gamma)) continue;
      Point2 n;
      if (l > 0.0) {
        n = (1.0 / l) * (p[i] - c);
      } else {
        // Inside the rectangle: leave through the nearest face.
        const double faces[4] = {p[i].x - box.min_corner.x, box.max_corner.x - p[i].x, p[i].y - box.min_corner.y,
                                 box.max_corner.y - p[i].y};
        const Point2 dirs[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        n = dirs[std::min_element(faces, faces + 4) - faces];
      }
      set.entries.push_back({ConstraintKind::Obstacle, i, k, l - motion.obstacle_clearance, n});
    }
  }
  return set;
}

std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& gradients) {
  std::vector<Eigen::Index> out;
  if (gradients.cols() == 0) return out;
  const double tol = kRankTol * gradients.norm();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gradients);
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  const Eigen::Index kmax = std::min(gradients.rows(), gradients.cols());
  for (Eigen::Index k = 0; k < kmax; ++k) {
    if (std::abs(R(k, k)) > tol) out.push_back(qr.colsPermutation().indices()(k));
  }
  return out;
}

Eigen::MatrixXd projection_matrix(const Eigen::MatrixXd& gradients) {
  const Eigen::Index dim = gradients.rows();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(dim, dim);
  const auto keep = independent_columns(gradients);
  if (keep.empty()) return P;
  Eigen::MatrixXd Nr(dim, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) Nr.col(static_cast<Eigen::Index>(k)) = gradients.col(keep[k]);
  // Orthonormal basis of span(Nr); Q Q^T equals N (N^T N)^-1 N^T.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Nr);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, Nr.cols());
  P -= Q * Q.transpose();
  return 0.5 * (P + P.transpose());
}

ControlSignal control_step(const EstimateState& estimates, std::span<const Point2> desired,
                           const ActiveConstraintSet& constraints, const MotionParams& motion, ControlMode mode) {
  const auto& est = estimates.estimated_uavs;
  const std::size_t n = est.size();
  if (desired.size() != n) throw InvalidArgument("control_step: estimates and desired differ in length");
  const double gamma = motion.step();

  std::vector<Point2> grad(n);
  std::vector<double> remaining(n);
  for (std::size_t i = 0; i < n; ++i) {
    grad[i] = cost_gradient(est[i], desired[i], motion.goal_tolerance);
    remaining[i] = (est[i] - desired[i]).norm();
  }

  ControlSignal u;
  u.steps.assign(n, {0.0, 0.0});

  if (mode == ControlMode::PerUav) {
    std::vector<std::vector<const ActiveConstraint*>> by_subject(n);
    for (const auto& c : constraints.entries) by_subject.at(c.subject).push_back(&c);

    for (std::size_t i = 0; i < n; ++i) {
      const auto& mine = by_subject[i];
      Eigen::Vector2d descent(-gamma * grad[i].x, -gamma * grad[i].y);
      Eigen::MatrixXd normals(2, static_cast<Eigen::Index>(mine.size()));
      std::vector<Eigen::Index> violated;
      for (std::size_t k = 0; k < mine.size(); ++k) {
        normals.col(static_cast<Eigen::Index>(k)) << mine[k]->gradient.x, mine[k]->gradient.y;
        if (mine[k]->violated()) violated.push_back(static_cast<Eigen::Index>(k));
      }
      Eigen::MatrixXd Nv(2, static_cast<Eigen::Index>(violated.size()));
      Eigen::VectorXd gv(static_cast<Eigen::Index>(violated.size()));
      for (std::size_t k = 0; k < violated.size(); ++k) {
        Nv.col(static_cast<Eigen::Index>(k)) = normals.col(violated[k]);
        gv(static_cast<Eigen::Index>(k)) = mine[static_cast<std::size_t>(violated[k])]->value;
      }
      const Eigen::VectorXd step = projected_descent(descent, normals) + restoration(Nv, gv);
      u.steps[i] = scale_step({step(0), step(1)}, grad[i].norm(), remaining[i], gamma);
    }
    return u;
  }

  // Joint mode: one stacked 2N problem, each safety pair appearing once.
  const auto dim = static_cast<Eigen::Index>(2 * n);
  Eigen::VectorXd descent(dim);
  for (std::size_t i = 0; i < n; ++i) {
    descent(static_cast<Eigen::Index>(2 * i)) = -gamma * grad[i].x;
    descent(static_cast<Eigen::Index>(2 * i + 1)) = -gamma * grad[i].y;
  }
  std::vector<Eigen::VectorXd> cols;
  std::vector<double> margins;
  for (const auto& c : constraints.entries) {
    if (c.kind == ConstraintKind::Safety && c.subject > c.other) continue;
    Eigen::VectorXd col = Eigen::VectorXd::Zero(dim);
    col(static_cast<Eigen::Index>(2 * c.subject)) = c.gradient.x;
    col(static_cast<Eigen::Index>(2 * c.subject + 1)) = c.gradient.y;
    if (c.kind == ConstraintKind::Safety) {
      col(static_cast<Eigen::Index>(2 * c.other)) = -c.gradient.x;
      col(static_cast<Eigen::Index>(2 * c.other + 1)) = -c.gradient.y;
    }
    cols.push_back(std::move(col));
    margins.push_back(c.value);
  }
  Eigen::MatrixXd normals(dim, static_cast<Eigen::Index>(cols.size()));
  std::vector<Eigen::Index> violated;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    normals.col(static_cast<Eigen::Index>(k)) = cols[k];
    if (margins[k] < 0.0) violated.push_back(static_cast<Eigen::Index>(k));
  }
  Eigen::MatrixXd Nv(dim, static_cast<Eigen::Index>(violated.size()));
  Eigen::VectorXd gv(static_cast<Eigen::Index>(violated.size()));
  for (std::size_t k = 0; k < violated.size(); ++k) {
    Nv.col(static_cast<Eigen::Index>(k)) = normals.col(violated[k]);
    gv(static_cast<Eigen::Index>(k)) = margins[static_cast<std::size_t>(violated[k])];
  }
  const Eigen::VectorXd step = projected_descent(descent, normals) + restoration(Nv, gv);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 ui{step(static_cast<Eigen::Index>(2 * i)), step(static_cast<Eigen::Index>(2 * i + 1))};
    u.steps[i] = scale_step(ui, grad[i].norm(), remaining[i], gamma);
  }
  return u;
}

SwarmState apply_control(const SwarmState& truth, const ControlSignal& u) {
  if (u.steps.size() != truth.uavs.size()) throw InvalidArgument("apply_control: dimension mismatch");
  SwarmState next = truth;
  for (std::size_t i = 0; i < next.uavs.size(); ++i) next.uavs[i] = next.uavs[i] + u.steps[i];
  ++next.slot;
  return next;
}

}  // namespace swarmsim
