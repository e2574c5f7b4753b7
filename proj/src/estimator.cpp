#include "swarmsim/estimator.hpp"

namespace swarmsim {

double sample_baseline_factor(const Scenario& scenario, bool los, Rng& rng) {
  if (scenario.sensing_mode == SensingMode::Bearing) return 1.0;
  const double s0 = ranging_sigma_ref(scenario.noise, los);
  if (s0 == 0.0) return 1.0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  double factor = 0.0;
  do {
    factor = 1.0 + s0 * gauss(rng);
  } while (!(factor > 0.0));
  return factor;
}

Baseline estimate_baseline(const SwarmState& state, const Scenario& scenario, Rng& rng) {
  const double d1 = pairwise_distance(state.user, state.uavs.at(0));
  const bool los = los_state(state.user, state.uavs.at(0), scenario.obstacles);
  return {d1 * sample_baseline_factor(scenario, los, rng)};
}

CrlbMatrix crlb_at(std::span<const Point2> uavs_frame, const LosTable& los, const Scenario& scenario) {
  if (scenario.noise.noiseless(scenario.sensing_mode)) return CrlbMatrix::zero(scenario.n_unknown());
  std::vector<Point2> nodes;
  nodes.reserve(uavs_frame.size() + 1);
  nodes.push_back({0.0, 0.0});
  nodes.insert(nodes.end(), uavs_frame.begin(), uavs_frame.end());
  const auto fim = assemble_fim(nodes, los, scenario.sensing_mode, scenario.noise, scenario.n_known);
  return invert_fim(fim);
}

CrlbMatrix crlb_for_slot(const EstimateState& previous, const LosTable& los, const Scenario& scenario) {
  return crlb_at(previous.estimated_uavs, los, scenario);
}

CrlbMatrix crlb_for_slot(const SwarmState& truth, const Scenario& scenario) {
  const LosTable los(node_positions(truth), scenario.obstacles);
  return crlb_at(to_baseline_frame(truth), los, scenario);
}

EstimateState sample_estimates(const SwarmState& truth, const CrlbMatrix& kappa, const Baseline& baseline,
                               std::size_t n_known, Rng& rng) {
  const std::size_t n = truth.uavs.size();
  const std::size_t nu = kappa.n_unknown;
  if (n_known + nu != n) throw InvalidArgument("sample_estimates: CRLB size does not match the swarm");

  EstimateState est;
  est.slot = truth.slot;
  est.covariance_used = kappa;
  est.estimated_uavs = to_baseline_frame(truth);
  est.estimated_uavs[0] = {baseline.anchor_distance, 0.0};

  const auto dim = static_cast<Eigen::Index>(2 * nu);
  Eigen::VectorXd eta(dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index k = 0; k < dim; ++k) eta(k) = gauss(rng);

  const double tr = kappa.matrix.trace();
  if (tr == 0.0 && kappa.matrix.isZero(0.0)) return est;

  Eigen::LLT<Eigen::MatrixXd> llt(kappa.matrix);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd jittered = kappa.matrix;
    jittered.diagonal().array() += 1e-9 * tr / static_cast<double>(dim);
    llt.compute(jittered);
    if (llt.info() != Eigen::Success) {
      throw FactorizationFailure("sample_estimates: covariance is not positive semi-definite");
    }
  }
  const Eigen::VectorXd omega = llt.matrixL() * eta;
  for (std::size_t m = 0; m < nu; ++m) {
    auto& p = est.estimated_uavs[n_known + m];
    p.x += omega(static_cast<Eigen::Index>(m));
    p.y += omega(static_cast<Eigen::Index>(nu + m));
  }
  return est;
}

CrlbEstimator::CrlbEstimator(const Scenario& scenario, Rng& rng) : scenario_(scenario), rng_(rng) {}

EstimateState CrlbEstimator::estimate(const SwarmState& truth, const LosTable& los) {
  const bool first = !previous_.has_value();
  if (first || scenario_.options.baseline_per_slot) {
    baseline_factor_ = sample_baseline_factor(scenario_, los.los(0, 1), rng_);
  }
  const bool at_truth = first || scenario_.options.kappa_geometry == KappaGeometry::Truth;
  const CrlbMatrix kappa = at_truth ? crlb_at(to_baseline_frame(truth), los, scenario_)
                                    : crlb_for_slot(*previous_, los, scenario_);
  const Baseline baseline{pairwise_distance(truth.user, truth.uavs[0]) * baseline_factor_};
  previous_ = sample_estimates(truth, kappa, baseline, scenario_.n_known, rng_);
  return *previous_;
}

}  // namespace swarmsim
