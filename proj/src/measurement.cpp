#include "swarmsim/measurement.hpp"

#include <numbers>

namespace swarmsim {

double wrap_to_pi(double angle) {
  double r = angle - kTwoPi * std::floor((angle + kPi) / kTwoPi);
  if (r >= kPi) r -= kTwoPi;
  if (r < -kPi) r += kTwoPi;
  return r;
}

double wrap_to_2pi(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

std::vector<Point2> node_positions(const SwarmState& state) {
  std::vector<Point2> nodes;
  nodes.reserve(state.uavs.size() + 1);
  nodes.push_back(state.user);
  nodes.insert(nodes.end(), state.uavs.begin(), state.uavs.end());
  return nodes;
}

LosTable::LosTable(std::size_t n_nodes, bool all_los) : n_(n_nodes), flags_(n_nodes * n_nodes, all_los ? 1 : 0) {}

LosTable::LosTable(std::span<const Point2> nodes, std::span<const Obstacle> obstacles)
    : LosTable(nodes.size(), true) {
  if (obstacles.empty()) return;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) set(i, j, los_state(nodes[i], nodes[j], obstacles));
  }
}

void LosTable::set(std::size_t i, std::size_t j, bool los) {
  flags_[i * n_ + j] = los ? 1 : 0;
  flags_[j * n_ + i] = los ? 1 : 0;
}

std::size_t LosTable::nlos_count() const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) c += los(i, j) ? 0 : 1;
  }
  return c;
}

double pairwise_distance(Point2 a, Point2 b) { return (a - b).norm(); }

double pairwise_bearing(Point2 a, Point2 b) {
  if (a == b) throw DegenerateLink("pairwise_bearing: coincident points");
  const Point2 d = a - b;
  return wrap_to_pi(std::atan2(d.y, d.x));
}

bool los_state(Point2 a, Point2 b, std::span<const Obstacle> obstacles) {
  for (const auto& o : obstacles) {
    if (segment_intersects(o, a, b)) return false;
  }
  return true;
}

LinkGeometry make_link(std::span<const Point2> nodes, std::size_t i, std::size_t j, bool los) {
  const Point2 a = nodes[i];
  const Point2 b = nodes[j];
  if (a == b) {
    throw DegenerateLink("nodes " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
  }
  return {i, j, pairwise_distance(a, b), pairwise_bearing(a, b), los};
}

double ranging_sigma_ref(const NoiseParams& noise, bool los) {
  const double p = los ? 1.0 : 0.0;
  return std::numbers::ln10 / (10.0 * noise.path_loss_exponent) *
         (noise.shadowing_std_db + (1.0 - p) * noise.nlos_bias_db);
}

double link_sigma(const LinkGeometry& link, SensingMode mode, const NoiseParams& noise) {
  if (mode == SensingMode::Ranging) return ranging_sigma_ref(noise, link.los) * link.distance;
  return noise.bearing_std_rad;
}

Measurement sample_measurement(const LinkGeometry& link, SensingMode mode, const NoiseParams& noise, Rng& rng) {
  Measurement m;
  m.link = link;
  m.kind = mode;
  m.sigma = link_sigma(link, mode, noise);
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (mode == SensingMode::Ranging) {
    m.value = link.distance + m.sigma * gauss(rng);
  } else if (link.los) {
    m.value = wrap_to_2pi(link.angle + m.sigma * gauss(rng));
  } else {
    std::uniform_real_distribution<double> outlier(0.0, kTwoPi);
    m.value = wrap_to_2pi(outlier(rng));
  }
  return m;
}

MeasurementSet generate_measurement_set(const SwarmState& state, const Scenario& scenario, Rng& rng) {
  const auto nodes = node_positions(state);
  MeasurementSet z;
  z.slot = state.slot;
  z.entries.reserve(nodes.size() * (nodes.size() - 1) / 2);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const bool los = los_state(nodes[i], nodes[j], scenario.obstacles);
      z.entries.push_back(sample_measurement(make_link(nodes, i, j, los), scenario.sensing_mode, scenario.noise, rng));
    }
  }
  return z;
}

double expected_observation(std::span<const Point2> nodes, std::size_t i, std::size_t j, SensingMode mode) {
  const Point2 d = nodes[i] - nodes[j];
  if (mode == SensingMode::Ranging) return d.norm();
  return std::atan2(d.y, d.x);
}

double link_log_likelihood(const Measurement& m, std::span<const Point2> nodes, const NoiseParams& noise,
                           SigmaModel sigma_model) {
  const auto& link = m.link;
  if (m.kind == SensingMode::Bearing && !link.los) return -std::log(kTwoPi);

  const double h = expected_observation(nodes, link.i, link.j, m.kind);
  double residual = m.value - h;
  if (m.kind == SensingMode::Bearing) residual = wrap_to_pi(residual);

  double sigma = m.sigma;
  if (sigma_model == SigmaModel::StateDependent) {
    LinkGeometry hyp = link;
    hyp.distance = pairwise_distance(nodes[link.i], nodes[link.j]);
    sigma = link_sigma(hyp, m.kind, noise);
  }
  const double u = residual / sigma;
  return -0.5 * u * u - std::log(sigma) - 0.5 * std::log(kTwoPi);
}

double log_likelihood(const MeasurementSet& z, const SwarmState& theta, const Scenario& scenario,
                      SigmaModel sigma_model) {
  const auto nodes = node_positions(theta);
  double sum = 0.0;
  for (const auto& m : z.entries) sum += link_log_likelihood(m, nodes, scenario.noise, sigma_model);
  return sum;
}

}  // namespace swarmsim
