#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "mppivs/geometry.hpp"
#include "mppivs/mppi.hpp"
#include "mppivs/sim.hpp"
#include "mppivs/vscost.hpp"

namespace mppivs {

enum class ControllerKind { Classical, Mppi };

/// Uniform sampling box for initial camera poses, expressed in F_o.
/// Non-normative: the published protocol draws from the robot workspace but
/// never states the box.
struct WorkspaceBox {
  Eigen::Vector3d t_min{-0.8, -0.8, -1.4};
  Eigen::Vector3d t_max{0.8, 0.8, -0.5};
  Eigen::Vector3d r_min{-0.6, -0.6, -2.3};
  Eigen::Vector3d r_max{0.6, 0.6, 2.3};
};

struct ScenarioConfig {
  std::string name = "scenario";
  VsScheme scheme;
  ControllerKind controller = ControllerKind::Mppi;
  RigidTransform desired_pose;
  RigidTransform initial_pose;
  double duration = 90.0;
  double rate = 50.0;
  double lambda_s = 0.5;  // classical feedback gain
  NoiseSpec noise;
  CalibrationError calibration;
  ConstraintSpec constraints;
  bool fov_penalty = false;
  MppiConfig mppi;
  Eigen::VectorXd q_diag;
  GantryLimits limits;
  std::uint64_t seed = 0;
  bool early_stop = true;
  std::vector<Eigen::Vector3d> object_points;
  CameraIntrinsics intrinsics;

  double dt() const { return 1.0 / rate; }
};

struct SuiteConfig {
  ScenarioConfig scenario;
  int tasks = 120;
  WorkspaceBox workspace;
};

namespace defaults {

inline CameraIntrinsics camera() { return {}; }

/// The four coplanar point features, object frame, 0.2 m square.
inline std::vector<Eigen::Vector3d> object_square() {
  return {{-0.1, -0.1, 0.0},
          {0.1, -0.1, 0.0},
          {0.1, 0.1, 0.0},
          {-0.1, 0.1, 0.0}};
}

inline RigidTransform pose_from_t_theta_u_deg(const Eigen::Vector3d& t,
                                              const Eigen::Vector3d& r_deg) {
  RigidTransform pose;
  pose.translation = t;
  pose.rotation = axis_angle_to_rotation((r_deg * M_PI / 180.0).eval());
  return pose;
}

/// Goal pose centered over the object, features in the middle of the image.
inline RigidTransform desired_pose_centered() {
  return pose_from_t_theta_u_deg({0.0, 0.0, -0.75}, {0.0, 0.0, 0.0});
}

/// Goal pose with the object near the image corner.
inline RigidTransform desired_pose_corner() {
  return pose_from_t_theta_u_deg({0.076, 0.202, -0.727}, {10.0, -10.0, -15.0});
}

inline Eigen::VectorXd sigma_u() {
  Eigen::VectorXd s(6);
  s << 0.02, 0.01, 0.01, 0.02, 0.02, 0.01;
  return s;
}

inline MppiConfig mppi_base() {
  MppiConfig cfg;
  cfg.samples = 2000;
  cfg.horizon_steps = 175;
  cfg.dt = 0.02;
  cfg.nu = 1000.0;
  cfg.sigma_u = sigma_u();
  return cfg;
}

inline double mppi_lambda(VsSchemeTag tag) {
  switch (tag) {
    case VsSchemeTag::Ibvs:
      return 100.0;
    case VsSchemeTag::ThreeDvs:
      return 0.01;
    default:
      return 0.001;
  }
}

inline Eigen::VectorXd q_diag(VsSchemeTag tag) {
  switch (tag) {
    case VsSchemeTag::Ibvs:
      return Eigen::VectorXd::Constant(8, 2.5);
    case VsSchemeTag::ThreeDvs:
      return Eigen::VectorXd::Constant(12, 35.0);
    case VsSchemeTag::Pbvs:
      return Eigen::VectorXd::Constant(6, 35.0);
    case VsSchemeTag::PbvsAugmented:
      return Eigen::VectorXd::Zero(18);  // augmented cost uses w1/w2 instead
  }
  return {};
}

inline Eigen::VectorXd control_bounds(double v_max, double w_max) {
  Eigen::VectorXd b(6);
  b << v_max, v_max, v_max, w_max, w_max, w_max;
  return b;
}

// Convergence-time thresholds on the true feature error norm.
inline constexpr double kConvergencePx = 0.6;
inline constexpr double kConvergenceMeters = 3e-3;

// Positioning-error thresholds of the success metric.
inline constexpr double kMseEps1 = 1e-5;
inline constexpr double kMseEps2 = 1e-4;

inline constexpr double kClassicalDuration = 60.0;
inline constexpr double kMppiDuration = 90.0;

}  // namespace defaults

/// Scenario with the per-scheme controller parameters filled in.
inline ScenarioConfig make_scenario(VsSchemeTag tag, ControllerKind controller,
                                    IbvsCase ibvs_case = IbvsCase::Case0) {
  ScenarioConfig cfg;
  cfg.scheme.tag = tag;
  cfg.scheme.ibvs_case = ibvs_case;
  cfg.controller = controller;
  cfg.desired_pose = defaults::desired_pose_centered();
  cfg.initial_pose = defaults::desired_pose_centered();
  cfg.duration = controller == ControllerKind::Mppi
                     ? defaults::kMppiDuration
                     : defaults::kClassicalDuration;
  cfg.mppi = defaults::mppi_base();
  cfg.mppi.lambda = defaults::mppi_lambda(tag);
  cfg.q_diag = defaults::q_diag(tag);
  cfg.object_points = defaults::object_square();
  cfg.intrinsics = defaults::camera();
  return cfg;
}

}  // namespace mppivs
