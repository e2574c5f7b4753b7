#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarmsim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two nodes of a link share the same position.
class DegenerateLink : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Fisher information is numerically singular (unlocalizable geometry).
class SingularFim : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPsd : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class FactorizationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;

  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

/// Counter-clockwise rotation about the origin.
inline Point2 rotate(Point2 p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Axis-aligned rectangle.
struct Obstacle {
  Point2 min_corner;
  Point2 max_corner;

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

Point2 closest_point(const Obstacle& box, Point2 p);
/// Euclidean distance from p to the closed rectangle (0 inside).
double distance_to_obstacle(const Obstacle& box, Point2 p);
/// True iff the open segment (a, b) shares at least one point with the closed
/// rectangle. A segment that only grazes a corner counts as intersecting.
bool segment_intersects(const Obstacle& box, Point2 a, Point2 b);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// True planar positions at one slot. Node 0 (the user) sits at the origin;
/// uavs[0] is UAV 1, the baseline anchor.
struct SwarmState {
  Point2 user{};
  std::vector<Point2> uavs;
  std::size_t slot = 0;

  std::size_t n_uavs() const { return uavs.size(); }
  /// Position of node i, where node 0 is the user and node k >= 1 is UAV k.
  Point2 node(std::size_t i) const { return i == 0 ? user : uavs[i - 1]; }

  friend bool operator==(const SwarmState&, const SwarmState&) = default;
};

struct Baseline {
  double anchor_distance = 0.0;
};

enum class SensingMode { Ranging, Bearing };

/// Form of the ranging Fisher coefficient. `Linear` is (1 + 2 xi s0) / s^2;
/// `Exact` is (1 + 2 xi s0^2) / s^2, which is what differentiating a Gaussian
/// with standard deviation s0 * d gives.
enum class RangingInfoModel { Linear, Exact };

struct NoiseParams {
  double shadowing_std_db = 3.4;
  double path_loss_exponent = 2.0;
  double nlos_bias_db = 3.0;
  double bearing_std_rad = deg_to_rad(10.0);
  bool model_aware = false;  // xi
  RangingInfoModel ranging_info = RangingInfoModel::Linear;

  /// Every link has zero measurement noise under `mode`.
  bool noiseless(SensingMode mode) const;

  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

struct MotionParams {
  double speed = 1.0;
  double slot_duration = 0.1;
  double safety_distance = 0.5;
  double obstacle_clearance = 5.0;
  double goal_tolerance = 0.01;
  std::size_t max_slots = 5000;

  double step() const { return speed * slot_duration; }

  friend bool operator==(const MotionParams&, const MotionParams&) = default;
};

enum class ControlMode { PerUav, Joint };

/// Geometry at which the per-slot CRLB is evaluated after the first slot.
enum class KappaGeometry { PreviousEstimate, Truth };

struct SimOptions {
  bool baseline_per_slot = false;
  ControlMode control_mode = ControlMode::PerUav;
  KappaGeometry kappa_geometry = KappaGeometry::PreviousEstimate;

  friend bool operator==(const SimOptions&, const SimOptions&) = default;
};

struct Scenario {
  std::string id = "scenario";
  std::size_t n_uavs = 0;
  SwarmState initial_state;
  std::vector<Point2> desired;
  std::vector<Obstacle> obstacles;
  SensingMode sensing_mode = SensingMode::Ranging;
  NoiseParams noise;
  MotionParams motion;
  std::size_t n_known = 1;
  SimOptions options;

  std::size_t n_unknown() const { return n_uavs - n_known; }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Collects every invariant violation; throws ValidationError if any.
const Scenario& validate_scenario(const Scenario& scenario);
std::vector<std::string> scenario_violations(const Scenario& scenario);

/// n points evenly spaced on a circle about the origin, the first on +x.
std::vector<Point2> circle_topology(std::size_t n, double radius);

// ---------------------------------------------------------------------------
// Baseline frame
// ---------------------------------------------------------------------------

/// Angle of UAV 1 as seen from the user. The relative frame's x-axis points
/// along this direction.
double baseline_angle(const SwarmState& state);

/// Positions of all UAVs expressed in the baseline frame.
std::vector<Point2> to_baseline_frame(const SwarmState& state);

std::string to_string(SensingMode mode);
SensingMode sensing_mode_from_string(const std::string& s);

}  // namespace swarmsim
