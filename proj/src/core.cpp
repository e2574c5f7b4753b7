#include "swarmsim/core.hpp"

#include <algorithm>
#include <sstream>

namespace swarmsim {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::ostringstream os;
  os << "scenario validation failed (" << v.size() << " violation"
     << (v.size() == 1 ? "" : "s") << ")";
  for (const auto& s : v) os << "\n  - " << s;
  return os.str();
}

std::string fmt_point(Point2 p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)),
      violations_(std::move(violations)) {}

Point2 closest_point(const Obstacle& box, Point2 p) {
  return {std::clamp(p.x, box.min_corner.x, box.max_corner.x),
          std::clamp(p.y, box.min_corner.y, box.max_corner.y)};
}

double distance_to_obstacle(const Obstacle& box, Point2 p) {
  return (p - closest_point(box, p)).norm();
}

bool segment_intersects(const Obstacle& box, Point2 a, Point2 b) {
  // Liang-Barsky clipping of a + t (b - a), t in (0, 1).
  const Point2 d = b - a;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {a.x - box.min_corner.x, box.max_corner.x - a.x,
                       a.y - box.min_corner.y, box.max_corner.y - a.y};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return false;
      continue;
    }
    const double r = q[k] / p[k];
    if (p[k] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  // [t0, t1] is the clipped parameter range; exclude the endpoints of the
  // segment itself.
  if (t1 <= 0.0 || t0 >= 1.0) return false;
  return true;
}

bool NoiseParams::noiseless(SensingMode mode) const {
  if (mode == SensingMode::Ranging) {
    return shadowing_std_db == 0.0 && nlos_bias_db == 0.0;
  }
  return bearing_std_rad == 0.0;
}

std::vector<std::string> scenario_violations(const Scenario& s) {
  std::vector<std::string> out;
  auto fail = [&out](std::string msg) { out.push_back(std::move(msg)); };

  if (s.n_uavs < 2) fail("n_uavs must be at least 2");
  if (s.n_known < 1 || s.n_known >= s.n_uavs) {
    fail("n_known must satisfy 1 <= n_known < n_uavs");
  }
  if (s.initial_state.uavs.size() != s.n_uavs) {
    fail("initial_positions has " + std::to_string(s.initial_state.uavs.size()) +
         " entries, expected " + std::to_string(s.n_uavs));
  }
  if (s.desired.size() != s.n_uavs) {
    fail("desired_positions has " + std::to_string(s.desired.size()) +
         " entries, expected " + std::to_string(s.n_uavs));
  }
  if (!(s.initial_state.user == Point2{})) fail("user must be at the origin");

  for (std::size_t i = 0; i < s.initial_state.uavs.size(); ++i) {
    const Point2 p = s.initial_state.uavs[i];
    if (!p.finite()) fail("initial position of UAV " + std::to_string(i + 1) + " is not finite");
    if (p.norm() == 0.0) fail("initial position of UAV " + std::to_string(i + 1) + " coincides with the user");
  }
  for (std::size_t i = 0; i < s.desired.size(); ++i) {
    if (!s.desired[i].finite()) fail("desired position of UAV " + std::to_string(i + 1) + " is not finite");
  }
  if (!s.desired.empty()) {
    const Point2 anchor = s.desired.front();
    if (!(anchor.x > 0.0) || std::abs(anchor.y) > 1e-9) {
      fail("desired position of UAV 1 " + fmt_point(anchor) +
           " must lie on the positive x-axis (it defines the baseline)");
    }
  }

  for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
    const auto& o = s.obstacles[k];
    if (!o.min_corner.finite() || !o.max_corner.finite()) {
      fail("obstacle " + std::to_string(k) + " has non-finite corners");
    } else if (!(o.min_corner.x < o.max_corner.x) || !(o.min_corner.y < o.max_corner.y)) {
      fail("obstacle " + std::to_string(k) + " is degenerate: min " + fmt_point(o.min_corner) +
           ", max " + fmt_point(o.max_corner));
    }
  }

  const auto& n = s.noise;
  if (!(n.shadowing_std_db >= 0.0)) fail("noise.shadowing_std_db must be >= 0");
  if (!(n.nlos_bias_db >= 0.0)) fail("noise.nlos_bias_db must be >= 0");
  if (!(n.bearing_std_rad >= 0.0)) fail("noise.bearing_std must be >= 0");
  if (!(n.path_loss_exponent > 0.0)) fail("noise.path_loss_exponent must be > 0");

  const auto& m = s.motion;
  if (!(m.speed > 0.0)) fail("motion.speed must be > 0");
  if (!(m.slot_duration > 0.0)) fail("motion.slot_duration must be > 0");
  if (!(m.safety_distance > 0.0)) fail("motion.safety_distance must be > 0");
  if (!(m.obstacle_clearance > 0.0)) fail("motion.obstacle_clearance must be > 0");
  if (!(m.goal_tolerance > 0.0)) fail("motion.goal_tolerance must be > 0");
  if (!(m.goal_tolerance < m.safety_distance)) {
    fail("motion.goal_tolerance must be smaller than motion.safety_distance");
  }
  if (m.max_slots == 0) fail("motion.max_slots must be positive");

  for (std::size_t i = 0; i < s.desired.size(); ++i) {
    for (std::size_t j = i + 1; j < s.desired.size(); ++j) {
      const double d = (s.desired[i] - s.desired[j]).norm();
      if (d < m.safety_distance) {
        fail("desired positions of UAVs " + std::to_string(i + 1) + " and " +
             std::to_string(j + 1) + " are " + std::to_string(d) +
             " m apart, below the safety distance");
      }
    }
    for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
      const double l = distance_to_obstacle(s.obstacles[k], s.desired[i]);
      if (l < m.obstacle_clearance) {
        fail("desired position of UAV " + std::to_string(i + 1) + " is " + std::to_string(l) +
             " m from obstacle " + std::to_string(k) + ", below the obstacle clearance");
      }
    }
  }
  return out;
}

const Scenario& validate_scenario(const Scenario& scenario) {
  auto violations = scenario_violations(scenario);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return scenario;
}

std::vector<Point2> circle_topology(std::size_t n, double radius) {
  if (n < 2) throw InvalidArgument("circle_topology: n must be at least 2");
  if (!(radius > 0.0)) throw InvalidArgument("circle_topology: radius must be positive");
  std::vector<Point2> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    pts.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return pts;
}

double baseline_angle(const SwarmState& state) {
  const Point2 p = state.uavs.at(0);
  return std::atan2(p.y, p.x);
}

std::vector<Point2> to_baseline_frame(const SwarmState& state) {
  const double a = baseline_angle(state);
  std::vector<Point2> out;
  out.reserve(state.uavs.size());
  if (a == 0.0) {
    out = state.uavs;
  } else {
    for (const auto& p : state.uavs) out.push_back(rotate(p, -a));
  }
  // Exact by construction.
  out[0] = {state.uavs[0].norm(), 0.0};
  return out;
}

std::string to_string(SensingMode mode) {
  return mode == SensingMode::Ranging ? "ranging" : "bearing";
}

SensingMode sensing_mode_from_string(const std::string& s) {
  if (s == "ranging") return SensingMode::Ranging;
  if (s == "bearing") return SensingMode::Bearing;
  throw InvalidArgument("unknown sensing_mode '" + s + "' (expected ranging|bearing)");
}

}  // namespace swarmsim
