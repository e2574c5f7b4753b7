#pragma once

#include <span>

#include <Eigen/Dense>

#include "swarmsim/core.hpp"
#include "swarmsim/measurement.hpp"

namespace swarmsim {

/// Fisher information over the unknown UAV coordinates, ordered
/// [x_1 .. x_Nu, y_1 .. y_Nu] so the blocks are J_xx, J_xy, J_yy.
struct FisherInfo {
  Eigen::MatrixXd matrix;
  std::size_t n_unknown = 0;
};

/// Relative CRLB (inverse Fisher information), same ordering as FisherInfo.
struct CrlbMatrix {
  Eigen::MatrixXd matrix;
  std::size_t n_unknown = 0;

  static CrlbMatrix zero(std::size_t n_unknown);
  double trace() const { return matrix.trace(); }
};

enum class EllipseAxes {
  Eigenvalue,      // axis length = eigenvalue
  SqrtEigenvalue,  // axis length = standard deviation along the axis
};

struct ErrorEllipse {
  Point2 center;
  double major = 0.0;
  double minor = 0.0;
  double orientation = 0.0;  // radians in (-pi/2, pi/2], angle of the major axis
};

inline constexpr double kSingularRcond = 1e-12;
inline constexpr double kInverseResidualTol = 1e-8;

/// Per-link Fisher coefficient A. Ranging: (1 + 2 xi s0) / s^2 (or the
/// `Exact` variant with s0^2); bearing: 1 / s^2.
double fim_coefficient(double sigma, double sigma_ref, SensingMode mode, bool model_aware,
                       RangingInfoModel ranging_info = RangingInfoModel::Linear);

/// Anchor-free Fisher information. Nodes 0..n_known (user and known UAVs) act
/// as error-free anchors; nodes n_known+1..N are the parameters. NLOS bearing
/// links carry no information.
FisherInfo assemble_fim(std::span<const Point2> nodes, const LosTable& los, SensingMode mode,
                        const NoiseParams& noise, std::size_t n_known);

/// Convenience overload: nodes and LOS flags from the true state.
FisherInfo assemble_fim(const SwarmState& state, const Scenario& scenario);

/// Throws SingularFim when the reciprocal condition number falls below
/// kSingularRcond or the inverse fails the identity check.
CrlbMatrix invert_fim(const FisherInfo& fim);

/// 2x2 covariance of the index-th unknown UAV (0-based among unknowns).
Eigen::Matrix2d per_uav_block(const CrlbMatrix& kappa, std::size_t index);

ErrorEllipse error_ellipse(const Eigen::Matrix2d& block, Point2 center,
                           EllipseAxes axes = EllipseAxes::Eigenvalue);

/// sqrt(tr(kappa_xx + kappa_yy) / Nu)
double network_rmse(const CrlbMatrix& kappa);

}  // namespace swarmsim
