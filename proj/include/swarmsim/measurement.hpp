#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "swarmsim/core.hpp"

namespace swarmsim {

/// Random stream owned by one trial.
using Rng = std::mt19937_64;

/// Wrap into [-pi, pi).
double wrap_to_pi(double angle);
/// Wrap into [0, 2 pi).
double wrap_to_2pi(double angle);

/// Node list with the user at index 0 followed by UAV 1..N.
std::vector<Point2> node_positions(const SwarmState& state);

/// Pairwise LOS flags over all nodes, indexed by node.
class LosTable {
 public:
  LosTable() = default;
  explicit LosTable(std::size_t n_nodes, bool all_los = true);
  /// Flags from the geometry of `nodes` against `obstacles`.
  LosTable(std::span<const Point2> nodes, std::span<const Obstacle> obstacles);

  std::size_t n_nodes() const { return n_; }
  bool los(std::size_t i, std::size_t j) const { return flags_[i * n_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool los);
  std::size_t nlos_count() const;

 private:
  std::size_t n_ = 0;
  std::vector<char> flags_;
};

struct LinkGeometry {
  std::size_t i = 0;
  std::size_t j = 0;
  double distance = 0.0;
  double angle = 0.0;  // [-pi, pi), Delta = p_i - p_j
  bool los = true;
};

struct Measurement {
  LinkGeometry link;
  double value = 0.0;
  SensingMode kind = SensingMode::Ranging;
  /// Standard deviation the sample was drawn with.
  double sigma = 0.0;
};

struct MeasurementSet {
  std::size_t slot = 0;
  std::vector<Measurement> entries;
};

double pairwise_distance(Point2 a, Point2 b);

/// Four-quadrant angle of Delta = a - b, wrapped into [-pi, pi).
/// Throws DegenerateLink when a == b.
double pairwise_bearing(Point2 a, Point2 b);

/// True (LOS) iff the open segment a-b misses every obstacle.
bool los_state(Point2 a, Point2 b, std::span<const Obstacle> obstacles);

LinkGeometry make_link(std::span<const Point2> nodes, std::size_t i, std::size_t j, bool los);

/// Log-scale ranging deviation at the 1 m reference distance:
/// ln(10) / (10 alpha) * (sigma_sh + (1 - p) sigma_b).
double ranging_sigma_ref(const NoiseParams& noise, bool los);

/// Ranging: sigma_ref * d (meters). Bearing: the constant bearing deviation.
double link_sigma(const LinkGeometry& link, SensingMode mode, const NoiseParams& noise);

Measurement sample_measurement(const LinkGeometry& link, SensingMode mode, const NoiseParams& noise, Rng& rng);

/// One measurement per unordered node pair (i < j), LOS from the true
/// geometry of `state`.
MeasurementSet generate_measurement_set(const SwarmState& state, const Scenario& scenario, Rng& rng);

/// How the likelihood obtains each link's deviation.
enum class SigmaModel {
  /// Recompute sigma from the hypothesised geometry.
  StateDependent,
  /// Use the deviation stored with each measurement.
  Frozen,
};

/// Expected observation h_ij for link (i, j) under `mode`.
double expected_observation(std::span<const Point2> nodes, std::size_t i, std::size_t j, SensingMode mode);

/// Per-link Gaussian log density; NLOS bearing links add the uniform
/// outlier density -ln(2 pi).
double link_log_likelihood(const Measurement& m, std::span<const Point2> nodes, const NoiseParams& noise,
                           SigmaModel sigma_model);

/// Sum of link_log_likelihood over every entry of z, with LOS flags taken
/// from z.
double log_likelihood(const MeasurementSet& z, const SwarmState& theta, const Scenario& scenario,
                      SigmaModel sigma_model = SigmaModel::StateDependent);

}  // namespace swarmsim
