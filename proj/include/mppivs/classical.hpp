#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include "mppivs/geometry.hpp"
#include "mppivs/interaction.hpp"

namespace mppivs {

/// Moore-Penrose pseudo-inverse by SVD. Singular values below
/// rel_tol * sigma_max are treated as zero, so rank-deficient feature
/// Jacobians yield bounded twists instead of blowing up.
inline Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m,
                                      double rel_tol = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// v_c = -lambda * L^+ * (s - s_star); shared by the 2D and 3D feedback laws.
inline Twist pinv_control_law(const Eigen::VectorXd& s,
                              const Eigen::VectorXd& s_star,
                              const Eigen::MatrixXd& l, double lambda_s) {
  return -lambda_s * (pseudo_inverse(l) * (s - s_star));
}

inline Twist c_ibvs(const Eigen::VectorXd& pixels,
                    const Eigen::VectorXd& pixels_star,
                    const Eigen::MatrixXd& l, double lambda_s) {
  return pinv_control_law(pixels, pixels_star, l, lambda_s);
}

inline Twist c_3dvs(const Eigen::VectorXd& points,
                    const Eigen::VectorXd& points_star,
                    const Eigen::MatrixXd& l, double lambda_s) {
  return pinv_control_law(points, points_star, l, lambda_s);
}

/// Decoupled pose-error law: v = -lambda R^T t, w = -lambda theta_u, using
/// that theta_u is a fixed point of the rotation-error Jacobian. Exact, no
/// 6x6 inversion involved.
inline Twist c_pbvs(const Eigen::Vector3d& t_err,
                    const Eigen::Vector3d& theta_u, double lambda_s) {
  const Eigen::Matrix3d r = axis_angle_to_rotation(theta_u);
  Twist out;
  out.head<3>() = -lambda_s * (r.transpose() * t_err);
  out.tail<3>() = -lambda_s * theta_u;
  return out;
}

}  // namespace mppivs
