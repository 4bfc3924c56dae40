#pragma once

#include <Eigen/Core>

#include "mppivs/geometry.hpp"

namespace mppivs {

/// The four standard constructions of the approximate image Jacobian.
///   Case0 : current pixels, online depth estimates
///   Case1 : current pixels, fixed desired depths
///   Case2 : constant matrix built at the desired features and depths
///   Case3 : elementwise mean of Case0 and Case2
enum class IbvsCase { Case0 = 0, Case1 = 1, Case2 = 2, Case3 = 3 };

/// Image Jacobian of one point feature, raw pixel inputs. Coordinates are
/// centered on the principal point internally; callers never pre-center.
inline Eigen::Matrix<double, 2, 6> l2d_point(const Eigen::Vector2d& pixel,
                                             double depth,
                                             const CameraIntrinsics& intr) {
  if (!(depth > kMinDepth)) {
    throw DegenerateDepth("image Jacobian requires depth > 1e-6 m");
  }
  const double u = pixel.x() - intr.u0;
  const double v = pixel.y() - intr.v0;
  const double fu = intr.fu;
  const double fv = intr.fv;
  Eigen::Matrix<double, 2, 6> l;
  // clang-format off
  l << -fu / depth, 0.0,         u / depth, u * v / fv,      -fu - u * u / fu, fu / fv * v,
       0.0,         -fv / depth, v / depth, fv + v * v / fv, -u * v / fu,      -fv / fu * u;
  // clang-format on
  return l;
}

/// Interaction matrix of a camera-frame 3D point: [-I3 | skew-structured].
inline Eigen::Matrix<double, 3, 6> l3d_point(const Eigen::Vector3d& p) {
  Eigen::Matrix<double, 3, 6> l;
  // clang-format off
  l << -1.0,  0.0,  0.0,  0.0,   -p.z(),  p.y(),
        0.0, -1.0,  0.0,  p.z(),  0.0,   -p.x(),
        0.0,  0.0, -1.0, -p.y(),  p.x(),  0.0;
  // clang-format on
  return l;
}

/// Jacobian of the axis-angle rotation error; exactly I3 at theta = 0 and
/// theta_u is always its eigenvector with eigenvalue 1.
inline Eigen::Matrix3d l_theta_u(const Eigen::Vector3d& theta_u) {
  const double theta = theta_u.norm();
  const Eigen::Matrix3d w = skew(theta_u);
  double c;  // (1 - sinc(t)/sinc^2(t/2)) / t^2, finite at t = 0
  if (theta < 1e-4) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    const double h = sinc(theta / 2.0);
    c = (1.0 - sinc(theta) / (h * h)) / (theta * theta);
  }
  return Eigen::Matrix3d::Identity() - 0.5 * w + c * (w * w);
}

/// Pose-error interaction matrix, block-diagonal [R, 0; 0, L_theta_u R]
/// where R rotates current-camera coordinates into the desired camera frame.
/// The rotation block composes L_theta_u with R so that the product is the
/// exact rate of the axis-angle error under a camera-frame body twist (the
/// simulator's convention); theta_u remains its unit-eigenvalue eigenvector,
/// so the decoupled feedback law is unchanged.
inline Matrix6d l_pbvs(const Eigen::Matrix3d& rotation,
                       const Eigen::Vector3d& theta_u) {
  Matrix6d l = Matrix6d::Zero();
  l.topLeftCorner<3, 3>() = rotation;
  l.bottomRightCorner<3, 3>() = l_theta_u(theta_u) * rotation;
  return l;
}

/// Row-stacked image Jacobian for interleaved pixels [u1,v1,u2,v2,...].
inline Eigen::MatrixXd stack_ibvs(const Eigen::VectorXd& pixels,
                                  const Eigen::VectorXd& depths,
                                  const CameraIntrinsics& intr) {
  const auto n = depths.size();
  Eigen::MatrixXd l(2 * n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    l.middleRows<2>(2 * i) =
        l2d_point(pixels.segment<2>(2 * i), depths(i), intr);
  }
  return l;
}

/// Row-stacked 3D-point interaction matrix for packed points [X1,Y1,Z1,...].
inline Eigen::MatrixXd stack_l3d(const Eigen::VectorXd& points) {
  const auto n = points.size() / 3;
  Eigen::MatrixXd l(3 * n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    l.middleRows<3>(3 * i) = l3d_point(points.segment<3>(3 * i));
  }
  return l;
}

inline Eigen::MatrixXd ibvs_matrix_for_case(IbvsCase which,
                                            const Eigen::VectorXd& pixels,
                                            const Eigen::VectorXd& depths,
                                            const Eigen::VectorXd& pixels_star,
                                            const Eigen::VectorXd& depths_star,
                                            const CameraIntrinsics& intr) {
  switch (which) {
    case IbvsCase::Case0:
      return stack_ibvs(pixels, depths, intr);
    case IbvsCase::Case1:
      return stack_ibvs(pixels, depths_star, intr);
    case IbvsCase::Case2:
      return stack_ibvs(pixels_star, depths_star, intr);
    case IbvsCase::Case3:
      return 0.5 * (stack_ibvs(pixels, depths, intr) +
                    stack_ibvs(pixels_star, depths_star, intr));
  }
  throw ConfigError("unknown interaction-matrix case");
}

}  // namespace mppivs
