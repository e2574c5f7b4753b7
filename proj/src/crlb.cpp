#include "swarmsim/crlb.hpp"

#include <algorithm>

namespace swarmsim {

CrlbMatrix CrlbMatrix::zero(std::size_t n_unknown) {
  return {Eigen::MatrixXd::Zero(2 * n_unknown, 2 * n_unknown), n_unknown};
}

double fim_coefficient(double sigma, double sigma_ref, SensingMode mode, bool model_aware,
                       RangingInfoModel ranging_info) {
  if (mode == SensingMode::Bearing) return 1.0 / (sigma * sigma);
  const double xi = model_aware ? 1.0 : 0.0;
  const double gain = ranging_info == RangingInfoModel::Linear ? sigma_ref : sigma_ref * sigma_ref;
  return (1.0 + 2.0 * xi * gain) / (sigma * sigma);
}

FisherInfo assemble_fim(std::span<const Point2> nodes, const LosTable& los, SensingMode mode,
                        const NoiseParams& noise, std::size_t n_known) {
  const std::size_t n_nodes = nodes.size();
  if (n_known + 1 >= n_nodes) throw InvalidArgument("assemble_fim: no unknown UAVs");
  const std::size_t nu = n_nodes - 1 - n_known;
  const std::size_t first_unknown = n_known + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * nu, 2 * nu);

  auto param = [&](std::size_t node) -> std::ptrdiff_t {
    return node >= first_unknown ? static_cast<std::ptrdiff_t>(node - first_unknown) : -1;
  };

  for (std::size_t a = 0; a < n_nodes; ++a) {
    for (std::size_t b = a + 1; b < n_nodes; ++b) {
      const auto pa = param(a);
      const auto pb = param(b);
      if (pa < 0 && pb < 0) continue;
      const bool link_los = los.los(a, b);
      if (mode == SensingMode::Bearing && !link_los) continue;

      const Point2 delta = nodes[a] - nodes[b];
      const double d = delta.norm();
      if (d == 0.0) {
        throw DegenerateGeometry("assemble_fim: nodes " + std::to_string(a) + " and " + std::to_string(b) +
                                 " coincide");
      }

      // Jacobian of h_ab with respect to p_a; the one for p_b is its negative.
      Eigen::Vector2d r;
      double sigma = 0.0;
      double sigma_ref = 0.0;
      if (mode == SensingMode::Ranging) {
        r << delta.x / d, delta.y / d;
        sigma_ref = ranging_sigma_ref(noise, link_los);
        sigma = sigma_ref * d;
      } else {
        r << -delta.y / (d * d), delta.x / (d * d);
        sigma = noise.bearing_std_rad;
      }
      if (!(sigma > 0.0)) throw InvalidArgument("assemble_fim: link with zero measurement noise");

      const double A = fim_coefficient(sigma, sigma_ref, mode, noise.model_aware, noise.ranging_info);
      const Eigen::Matrix2d w = A * r * r.transpose();

      auto add_block = [&](std::ptrdiff_t m, std::ptrdiff_t n, double sign) {
        J(m, n) += sign * w(0, 0);
        J(m, nu + n) += sign * w(0, 1);
        J(nu + m, n) += sign * w(1, 0);
        J(nu + m, nu + n) += sign * w(1, 1);
      };
      if (pa >= 0) add_block(pa, pa, 1.0);
      if (pb >= 0) add_block(pb, pb, 1.0);
      if (pa >= 0 && pb >= 0) {
        add_block(pa, pb, -1.0);
        add_block(pb, pa, -1.0);
      }
    }
  }
  return {std::move(J), nu};
}

FisherInfo assemble_fim(const SwarmState& state, const Scenario& scenario) {
  const auto nodes = node_positions(state);
  const LosTable los(nodes, scenario.obstacles);
  return assemble_fim(nodes, los, scenario.sensing_mode, scenario.noise, scenario.n_known);
}

CrlbMatrix invert_fim(const FisherInfo& fim) {
  const auto& J = fim.matrix;
  const auto n = J.rows();
  if (n == 0 || J.cols() != n) throw InvalidArgument("invert_fim: FIM must be square and non-empty");
  if (!J.allFinite()) throw SingularFim("invert_fim: FIM has non-finite entries");

  Eigen::LLT<Eigen::MatrixXd> llt(J);
  if (llt.info() != Eigen::Success) throw SingularFim("invert_fim: FIM is not positive definite");
  const double rcond = llt.rcond();
  if (!(rcond >= kSingularRcond)) {
    throw SingularFim("invert_fim: reciprocal condition number " + std::to_string(rcond) + " below threshold");
  }
  Eigen::MatrixXd kappa = llt.solve(Eigen::MatrixXd::Identity(n, n));
  kappa = 0.5 * (kappa + kappa.transpose()).eval();

  const double residual = (kappa * J - Eigen::MatrixXd::Identity(n, n)).norm() / std::sqrt(static_cast<double>(n));
  if (!(residual <= kInverseResidualTol)) {
    throw SingularFim("invert_fim: identity check failed (residual " + std::to_string(residual) + ")");
  }
  return {std::move(kappa), fim.n_unknown};
}

Eigen::Matrix2d per_uav_block(const CrlbMatrix& kappa, std::size_t index) {
  const std::size_t nu = kappa.n_unknown;
  if (index >= nu) {
    throw IndexOutOfRange("per_uav_block: index " + std::to_string(index) + " out of range for " +
                          std::to_string(nu) + " unknown UAVs");
  }
  const auto i = static_cast<Eigen::Index>(index);
  const auto off = static_cast<Eigen::Index>(nu);
  Eigen::Matrix2d block;
  block << kappa.matrix(i, i), kappa.matrix(i, off + i), kappa.matrix(off + i, i), kappa.matrix(off + i, off + i);
  return block;
}

ErrorEllipse error_ellipse(const Eigen::Matrix2d& block, Point2 center, EllipseAxes axes) {
  const double a = block(0, 0);
  const double b = 0.5 * (block(0, 1) + block(1, 0));
  const double c = block(1, 1);
  const double scale = std::max({std::abs(a), std::abs(c), std::abs(b), 1e-300});
  if (std::abs(block(0, 1) - block(1, 0)) > 1e-9 * scale) throw NotPsd("error_ellipse: block is not symmetric");

  const double mean = 0.5 * (a + c);
  const double half_diff = 0.5 * (a - c);
  const double radius = std::hypot(half_diff, b);
  const double major = mean + radius;
  const double minor = mean - radius;
  if (minor < -1e-12 * scale) throw NotPsd("error_ellipse: block has a negative eigenvalue");

  ErrorEllipse e;
  e.center = center;
  e.orientation = radius <= 1e-14 * scale ? 0.0 : 0.5 * std::atan2(2.0 * b, a - c);
  if (e.orientation <= -kPi / 2) e.orientation += kPi;
  const double lo = std::max(minor, 0.0);
  if (axes == EllipseAxes::Eigenvalue) {
    e.major = major;
    e.minor = lo;
  } else {
    e.major = std::sqrt(major);
    e.minor = std::sqrt(lo);
  }
  return e;
}

double network_rmse(const CrlbMatrix& kappa) {
  return std::sqrt(kappa.matrix.trace() / static_cast<double>(kappa.n_unknown));
}

}  // namespace swarmsim
