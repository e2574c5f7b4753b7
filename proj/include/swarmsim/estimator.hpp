#pragma once

#include <optional>
#include <span>
#include <vector>

#include "swarmsim/core.hpp"
#include "swarmsim/crlb.hpp"
#include "swarmsim/measurement.hpp"

namespace swarmsim {

/// Position estimates of all N UAVs in the baseline frame (UAV 1 on +x).
struct EstimateState {
  std::vector<Point2> estimated_uavs;
  CrlbMatrix covariance_used;
  std::size_t slot = 0;
};

/// Multiplicative error 1 + s0 * eta of one ranging sample, redrawn until
/// positive. Returns exactly 1 for bearing mode, where the baseline length is
/// taken as known.
double sample_baseline_factor(const Scenario& scenario, bool los, Rng& rng);

/// One noisy estimate of the user-to-UAV-1 distance.
Baseline estimate_baseline(const SwarmState& state, const Scenario& scenario, Rng& rng);

/// kappa evaluated at the UAV geometry `uavs_frame` (baseline frame, user at
/// the origin) with the given LOS flags. Zero when the noise model is
/// noiseless. Propagates SingularFim.
CrlbMatrix crlb_at(std::span<const Point2> uavs_frame, const LosTable& los, const Scenario& scenario);

/// kappa for the current slot, evaluated at the previous estimate.
CrlbMatrix crlb_for_slot(const EstimateState& previous, const LosTable& los, const Scenario& scenario);
/// kappa at the true geometry of `truth` (used for the first slot).
CrlbMatrix crlb_for_slot(const SwarmState& truth, const Scenario& scenario);

/// truth (in the baseline frame) + omega, omega ~ N(0, kappa). UAV 1 is put
/// at [d1_hat, 0]; other known UAVs get their exact frame positions.
EstimateState sample_estimates(const SwarmState& truth, const CrlbMatrix& kappa, const Baseline& baseline,
                               std::size_t n_known, Rng& rng);

/// Per-trial estimator: keeps the previous estimate and the baseline error.
class CrlbEstimator {
 public:
  CrlbEstimator(const Scenario& scenario, Rng& rng);

  /// Estimate for `truth` at its slot. LOS flags come from the true geometry.
  EstimateState estimate(const SwarmState& truth, const LosTable& los);

  const std::optional<EstimateState>& previous() const { return previous_; }

 private:
  const Scenario& scenario_;
  Rng& rng_;
  double baseline_factor_ = 1.0;
  std::optional<EstimateState> previous_;
};

}  // namespace swarmsim
