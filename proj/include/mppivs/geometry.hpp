#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace mppivs {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Camera velocity screw [v; w] (linear part first), camera-frame coordinates.
using Twist = Vector6d;

// Depths below this are treated as degenerate everywhere.
inline constexpr double kMinDepth = 1e-6;

struct DepthBehindCamera : std::domain_error {
  using std::domain_error::domain_error;
};
struct DegenerateDepth : std::domain_error {
  using std::domain_error::domain_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pinhole intrinsics (fu, fv, u0, v0) plus image bounds for visibility checks.
struct CameraIntrinsics {
  double fu = 840.0;
  double fv = 840.0;
  double u0 = 320.0;
  double v0 = 240.0;
  double width = 640.0;
  double height = 480.0;

  bool valid() const {
    return fu > 0.0 && fv > 0.0 && u0 >= 0.0 && u0 <= width && v0 >= 0.0 &&
           v0 <= height;
  }
  bool contains(const Eigen::Vector2d& px) const {
    return px.x() >= 0.0 && px.x() <= width && px.y() >= 0.0 &&
           px.y() <= height;
  }
};

template <typename Scalar>
Scalar sinc(Scalar x) {
  if (std::abs(x) < Scalar(1e-4)) {
    const Scalar x2 = x * x;
    return Scalar(1) - x2 / Scalar(6) + x2 * x2 / Scalar(120);
  }
  return std::sin(x) / x;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> skew(
    const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, 3, 3> s;
  // clang-format off
  s << Scalar(0), -v.z(),     v.y(),
       v.z(),      Scalar(0), -v.x(),
       -v.y(),     v.x(),     Scalar(0);
  // clang-format on
  return s;
}

/// Rodrigues exponential map: axis-angle vector (axis * angle) to rotation.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> axis_angle_to_rotation(
    const Eigen::MatrixBase<Derived>& theta_u) {
  using Scalar = typename Derived::Scalar;
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  const Scalar theta = theta_u.norm();
  const Matrix3 w = skew(theta_u);
  // sin(t)/t and (1-cos(t))/t^2 = sinc^2(t/2)/2, both finite at t = 0.
  const Scalar a = sinc(theta);
  const Scalar half_sinc = sinc(theta / Scalar(2));
  const Scalar b = half_sinc * half_sinc / Scalar(2);
  return Matrix3::Identity() + a * w + b * (w * w);
}

/// Log map via quaternion, canonicalized so the returned norm is <= pi.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 1> rotation_to_axis_angle(
    const Eigen::MatrixBase<Derived>& rotation) {
  using Scalar = typename Derived::Scalar;
  Eigen::Quaternion<Scalar> q(rotation.eval());
  q.normalize();
  if (q.w() < Scalar(0)) q.coeffs() = -q.coeffs();
  const Scalar vn = q.vec().norm();
  if (vn < Scalar(1e-12)) return Scalar(2) * q.vec();
  const Scalar angle = Scalar(2) * std::atan2(vn, q.w());
  return (angle / vn) * q.vec();
}

/// Left Jacobian of SO(3): integrates a constant body twist exactly.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> so3_left_jacobian(
    const Eigen::MatrixBase<Derived>& phi) {
  using Scalar = typename Derived::Scalar;
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  const Scalar theta = phi.norm();
  const Matrix3 w = skew(phi);
  Scalar b, c;
  if (theta < Scalar(1e-4)) {
    const Scalar t2 = theta * theta;
    b = Scalar(0.5) - t2 / Scalar(24);
    c = Scalar(1) / Scalar(6) - t2 / Scalar(120);
  } else {
    b = (Scalar(1) - std::cos(theta)) / (theta * theta);
    c = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Matrix3::Identity() + b * w + c * (w * w);
}

/// Nearest orthonormal matrix with det +1.
inline Eigen::Matrix3d orthonormalized(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

/// Frame pose in a parent frame: `rotation` holds the frame axes expressed in
/// the parent, `translation` the frame origin. Points map into the frame as
/// R^T (P_parent - t).
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform Identity() { return {}; }
};

inline RigidTransform inverse(const RigidTransform& pose) {
  RigidTransform out;
  out.rotation = pose.rotation.transpose();
  out.translation = -(pose.rotation.transpose() * pose.translation);
  return out;
}

/// Chained pose: b expressed relative to a's frame, result in a's parent.
inline RigidTransform compose(const RigidTransform& a,
                              const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

inline RigidTransform operator*(const RigidTransform& a,
                                const RigidTransform& b) {
  return compose(a, b);
}

/// Parent-frame point expressed in the pose's own frame.
inline Eigen::Vector3d transform_point(const RigidTransform& pose,
                                       const Eigen::Vector3d& p) {
  return pose.rotation.transpose() * (p - pose.translation);
}

inline Eigen::Vector3d point_to_parent(const RigidTransform& pose,
                                       const Eigen::Vector3d& p_local) {
  return pose.rotation * p_local + pose.translation;
}

/// Propagates a camera pose by a constant camera-frame twist over dt using the
/// closed-form SE(3) exponential; the induced motion of static scene points
/// seen from the camera is Pdot = -v - w x P to first order. The rotation is
/// re-orthonormalized so long runs keep R^T R = I.
inline RigidTransform integrate_twist(const RigidTransform& pose,
                                      const Twist& twist, double dt) {
  const Eigen::Vector3d v = twist.head<3>();
  const Eigen::Vector3d phi = twist.tail<3>() * dt;
  RigidTransform out;
  out.rotation = orthonormalized(pose.rotation * axis_angle_to_rotation(phi));
  out.translation =
      pose.translation + pose.rotation * (so3_left_jacobian(phi) * (v * dt));
  return out;
}

/// Perspective projection of a camera-frame point to pixel coordinates.
inline Eigen::Vector2d project(const Eigen::Vector3d& p,
                               const CameraIntrinsics& intr) {
  if (!(p.z() > 0.0)) {
    throw DepthBehindCamera("projection requires a positive depth");
  }
  return {intr.fu * p.x() / p.z() + intr.u0, intr.fv * p.y() / p.z() + intr.v0};
}

}  // namespace mppivs
