#pragma once

#include <Eigen/Core>

#include <random>
#include <utility>
#include <vector>

#include "mppivs/geometry.hpp"

namespace mppivs {

/// Ground-truth world: static object points in the object frame F_o, the
/// camera pose expressed in F_o, and the true camera intrinsics.
struct World {
  std::vector<Eigen::Vector3d> object_points;
  RigidTransform camera_pose;
  CameraIntrinsics intrinsics;
};

/// Pose-level stand-in for the gantry's joint limits: per-axis bounds on the
/// camera translation and on the axis-angle components of its orientation,
/// both expressed in F_o. Only the z floor and the optical-axis rotation
/// bound are meaningful; the others are generous defaults.
struct GantryLimits {
  Eigen::Vector3d t_min{-2.0, -2.0, -1.45};
  Eigen::Vector3d t_max{2.0, 2.0, -0.05};
  Eigen::Vector3d r_min{-1.5, -1.5, -157.0 * M_PI / 180.0};
  Eigen::Vector3d r_max{1.5, 1.5, 157.0 * M_PI / 180.0};

  bool admits(const RigidTransform& pose) const {
    const Eigen::Vector3d r = rotation_to_axis_angle(pose.rotation);
    return (pose.translation.array() >= t_min.array()).all() &&
           (pose.translation.array() <= t_max.array()).all() &&
           (r.array() >= r_min.array()).all() &&
           (r.array() <= r_max.array()).all();
  }
};

/// Uniform measurement-noise amplitudes: +/- pixel on image features, +/-
/// meters on camera-frame point coordinates.
struct NoiseSpec {
  double pixel = 0.0;
  double point = 0.0;
};

/// Fractional offsets applied to the controller-side camera model. Focal and
/// pixel-pitch offsets combine as fu_hat = fu (1 + f) / (1 + rho_u);
/// depth_offset scales the initial depth estimates.
struct CalibrationError {
  double f = 0.0;
  double rho_u = 0.0;
  double rho_v = 0.0;
  double u0 = 0.0;
  double v0 = 0.0;
  double depth_offset = 0.0;
};

struct Observation {
  Eigen::VectorXd pixels;    // 2n, interleaved [u1,v1,...]
  Eigen::VectorXd depths;    // n
  Eigen::VectorXd points;    // 3n camera-frame coordinates
  std::vector<bool> visible;
  bool all_visible = true;
};

inline Eigen::VectorXd camera_frame_points(const World& world) {
  Eigen::VectorXd out(3 * world.object_points.size());
  for (std::size_t i = 0; i < world.object_points.size(); ++i) {
    out.segment<3>(3 * i) =
        transform_point(world.camera_pose, world.object_points[i]);
  }
  return out;
}

/// Noise-free projection of the world through the true camera; features
/// behind the camera are flagged invisible. Pixel values of invisible
/// features are still reported when the depth allows projection.
inline Observation ground_truth(const World& world,
                                const CameraIntrinsics& intr) {
  const auto n = static_cast<Eigen::Index>(world.object_points.size());
  Observation obs;
  obs.pixels.setZero(2 * n);
  obs.depths.setZero(n);
  obs.points = camera_frame_points(world);
  obs.visible.assign(n, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = obs.points.segment<3>(3 * i);
    obs.depths(i) = p.z();
    if (p.z() > kMinDepth) {
      const Eigen::Vector2d px = project(p, intr);
      obs.pixels.segment<2>(2 * i) = px;
      obs.visible[i] = intr.contains(px);
    }
    obs.all_visible = obs.all_visible && obs.visible[i];
  }
  return obs;
}

/// Measurement: true projection plus uniform noise within the configured
/// amplitudes. Visibility is judged on the noise-free projection.
inline Observation observe(const World& world, const CameraIntrinsics& intr,
                           const NoiseSpec& noise, std::mt19937_64& rng) {
  Observation obs = ground_truth(world, intr);
  if (noise.point > 0.0) {
    std::uniform_real_distribution<double> d(-noise.point, noise.point);
    for (Eigen::Index i = 0; i < obs.points.size(); ++i) obs.points(i) += d(rng);
    for (Eigen::Index i = 0; i < obs.depths.size(); ++i) {
      obs.depths(i) = obs.points(3 * i + 2);
    }
  }
  if (noise.pixel > 0.0) {
    std::uniform_real_distribution<double> d(-noise.pixel, noise.pixel);
    for (Eigen::Index i = 0; i < obs.pixels.size(); ++i) obs.pixels(i) += d(rng);
  }
  return obs;
}

/// Integrates the camera by a camera-frame twist over dt. If the motion would
/// leave the admissible pose set, the whole step is rejected (every axis is
/// zeroed for this step, as the robot controller would) and the flag is
/// raised; later steps may still command motion away from the bound.
inline bool apply_twist(World& world, const Twist& twist, double dt,
                        const GantryLimits& limits) {
  const RigidTransform next = integrate_twist(world.camera_pose, twist, dt);
  if (!limits.admits(next)) return true;
  world.camera_pose = next;
  return false;
}

/// Controller-side camera model and depth scaling under calibration error.
inline std::pair<CameraIntrinsics, double> perturb_model(
    const CameraIntrinsics& truth, const CalibrationError& err) {
  CameraIntrinsics hat = truth;
  hat.fu = truth.fu * (1.0 + err.f) / (1.0 + err.rho_u);
  hat.fv = truth.fv * (1.0 + err.f) / (1.0 + err.rho_v);
  hat.u0 = truth.u0 * (1.0 + err.u0);
  hat.v0 = truth.v0 * (1.0 + err.v0);
  if (!(hat.fu > 0.0) || !(hat.fv > 0.0)) {
    throw ConfigError("calibration error yields a non-positive focal length");
  }
  return {hat, 1.0 + err.depth_offset};
}

/// Pose error of the camera w.r.t. a desired camera pose, decomposed into the
/// translation of the current frame expressed in the desired frame and the
/// axis-angle of the relative rotation.
inline std::pair<Eigen::Vector3d, Eigen::Vector3d> true_pose_error(
    const World& world, const RigidTransform& desired) {
  const RigidTransform rel = compose(inverse(desired), world.camera_pose);
  return {rel.translation, rotation_to_axis_angle(rel.rotation)};
}

}  // namespace mppivs
