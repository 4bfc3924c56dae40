#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "mppivs/geometry.hpp"
#include "mppivs/interaction.hpp"

namespace mppivs {

enum class VsSchemeTag { Ibvs, ThreeDvs, Pbvs, PbvsAugmented };

struct VsScheme {
  VsSchemeTag tag = VsSchemeTag::Ibvs;
  IbvsCase ibvs_case = IbvsCase::Case0;
};

/// Rollout state. `s` is the scheme state vector:
///   Ibvs          : 2n pixels, interleaved [u1,v1,...]
///   ThreeDvs      : 3n camera-frame point coordinates
///   Pbvs          : 6-vector pose error (t, theta_u) w.r.t. the goal frame
///   PbvsAugmented : 6 + 3n, pose error followed by the 3D points
/// `aux` carries companion quantities that are propagated but are not part of
/// the feature error: predicted depths for Ibvs Case0/Case3, predicted 3D
/// points for Pbvs when the field-of-view penalty is active.
struct VsState {
  Eigen::VectorXd s;
  Eigen::VectorXd aux;
};

/// Constraint bounds and penalty weights of the running cost.
struct ConstraintSpec {
  Eigen::Vector2d pixel_min{0.0, 0.0};
  Eigen::Vector2d pixel_max{640.0, 480.0};
  bool pixel_box = true;  // visibility indicator on predicted pixels
  std::optional<Eigen::Vector3d> point_min, point_max;  // 3D box
  std::optional<double> z_max;  // camera-retreat cap on predicted depths
  double visibility_weight = 1e7;
  double box3d_weight = 1e5;
  // Exponential field-of-view penalty on normalized image coordinates.
  double fov_beta = 150.0;
  double fov_alpha = 1e3;
  double x_max = 320.0 / 840.0;
  double y_max = 240.0 / 840.0;
  // Weights of the pose and point blocks of the augmented running cost.
  double w1 = 35.0;
  double w2 = 150.0;
};

struct CostWeights {
  Eigen::VectorXd q_diag;
};

inline double quadratic_state_cost(const Eigen::VectorXd& s,
                                   const Eigen::VectorXd& s_star,
                                   const Eigen::VectorXd& q_diag) {
  const Eigen::VectorXd e = s - s_star;
  return e.dot(q_diag.cwiseProduct(e));
}

/// Indicator penalty: visibility_weight if any pixel leaves the image box,
/// plus box3d_weight if any 3D bound or the retreat cap is violated.
/// `depths` may be empty (no depth companion); `points` likewise.
inline double ibvs_indicator_cost(const Eigen::VectorXd& pixels,
                                  const Eigen::VectorXd& depths,
                                  const Eigen::VectorXd& points,
                                  const ConstraintSpec& spec) {
  double cost = 0.0;
  if (spec.pixel_box) {
    for (Eigen::Index i = 0; i + 1 < pixels.size(); i += 2) {
      if (pixels(i) < spec.pixel_min.x() || pixels(i) > spec.pixel_max.x() ||
          pixels(i + 1) < spec.pixel_min.y() ||
          pixels(i + 1) > spec.pixel_max.y()) {
        cost += spec.visibility_weight;
        break;
      }
    }
  }
  bool box3d_hit = false;
  if (spec.z_max) {
    for (Eigen::Index i = 0; i < depths.size() && !box3d_hit; ++i) {
      if (depths(i) > *spec.z_max) box3d_hit = true;
    }
    for (Eigen::Index i = 2; i < points.size() && !box3d_hit; i += 3) {
      if (points(i) > *spec.z_max) box3d_hit = true;
    }
  }
  if (spec.point_min && spec.point_max) {
    for (Eigen::Index i = 0; i + 2 < points.size() && !box3d_hit; i += 3) {
      for (int j = 0; j < 3; ++j) {
        if (points(i + j) < (*spec.point_min)(j) ||
            points(i + j) > (*spec.point_max)(j)) {
          box3d_hit = true;
          break;
        }
      }
    }
  }
  if (box3d_hit) cost += spec.box3d_weight;
  return cost;
}

/// Exponential field-of-view penalty evaluated on the normalized image
/// coordinates (X/Z, Y/Z) of packed camera-frame points. Requires positive
/// depths; rollouts rule out the degenerate case before costing.
inline double pbvs_exponential_penalty(const Eigen::VectorXd& points,
                                       const ConstraintSpec& spec) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i + 2 < points.size(); i += 3) {
    const double z = points(i + 2);
    const double x = points(i) / z;
    const double y = points(i + 1) / z;
    cost += std::exp(-spec.fov_alpha * (spec.x_max - std::abs(x))) +
            std::exp(-spec.fov_alpha * (spec.y_max - std::abs(y)));
  }
  return spec.fov_beta * cost;
}

/// Two-block quadratic cost of the augmented scheme: w1 on the first six
/// (pose) components, w2 on the trailing point components.
inline double pbvs_augmented_cost(const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& s_star, double w1,
                                  double w2) {
  double pose = 0.0, points = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    const double d = s(i) - s_star(i);
    pose += d * d;
  }
  for (Eigen::Index i = 6; i < s.size(); ++i) {
    const double d = s(i) - s_star(i);
    points += d * d;
  }
  return w1 * pose + w2 * points;
}

/// Prediction + running-cost model for one servoing scheme, used by the
/// sampling controller. Constructed once per task: the target, intrinsics
/// estimate and constraint set stay fixed over the run.
class VsModel {
 public:
  using State = VsState;
  static constexpr int kControlDim = 6;

  struct Params {
    VsScheme scheme;
    CameraIntrinsics intrinsics;  // controller-side estimate
    Eigen::VectorXd s_star;       // target in scheme-state coordinates
    Eigen::VectorXd z_star;       // desired depths (Ibvs only)
    Eigen::VectorXd q_diag;
    ConstraintSpec constraints;
    bool fov_penalty = false;  // Pbvs: exponential penalty on aux points
  };

  explicit VsModel(Params params) : p_(std::move(params)) {
    if (p_.scheme.tag == VsSchemeTag::Ibvs &&
        (p_.scheme.ibvs_case == IbvsCase::Case2 ||
         p_.scheme.ibvs_case == IbvsCase::Case3)) {
      l_star_ = stack_ibvs(p_.s_star, p_.z_star, p_.intrinsics);
    }
    points_spec_ = p_.constraints;
    points_spec_.pixel_box = false;
  }

  const Params& params() const { return p_; }

  bool step(VsState& state, const Vector6d& v, double dt) const {
    switch (p_.scheme.tag) {
      case VsSchemeTag::Ibvs:
        return step_ibvs(state, v, dt);
      case VsSchemeTag::ThreeDvs:
        step_points(state.s, v, dt);
        return true;
      case VsSchemeTag::Pbvs:
        return step_pbvs(state, v, dt);
      case VsSchemeTag::PbvsAugmented:
        return step_pbvs_augmented(state, v, dt);
    }
    return false;
  }

  double running_cost(const VsState& state) const {
    switch (p_.scheme.tag) {
      case VsSchemeTag::Ibvs:
        return quadratic_state_cost(state.s, p_.s_star, p_.q_diag) +
               ibvs_indicator_cost(state.s, state.aux, Eigen::VectorXd(),
                                   p_.constraints);
      case VsSchemeTag::ThreeDvs:
        return quadratic_state_cost(state.s, p_.s_star, p_.q_diag) +
               ibvs_indicator_cost(Eigen::VectorXd(), Eigen::VectorXd(),
                                   state.s, points_spec_);
      case VsSchemeTag::Pbvs: {
        double c = quadratic_state_cost(state.s, p_.s_star, p_.q_diag);
        if (p_.fov_penalty) {
          c += pbvs_exponential_penalty(state.aux, p_.constraints);
        }
        return c;
      }
      case VsSchemeTag::PbvsAugmented:
        return pbvs_augmented_cost(state.s, p_.s_star, p_.constraints.w1,
                                   p_.constraints.w2);
    }
    return 0.0;
  }

  double terminal_cost(const VsState&) const { return 0.0; }

 private:
  // Pixels advance through the per-case image Jacobian; with Case0/Case3 the
  // companion depths advance through the 3D point dynamics rebuilt from the
  // current pixel and depth estimates.
  bool step_ibvs(VsState& state, const Vector6d& v, double dt) const {
    const auto n = state.s.size() / 2;
    const bool online_depth = p_.scheme.ibvs_case == IbvsCase::Case0 ||
                              p_.scheme.ibvs_case == IbvsCase::Case3;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector2d px = state.s.segment<2>(2 * i);
      double depth;
      switch (p_.scheme.ibvs_case) {
        case IbvsCase::Case0:
        case IbvsCase::Case3:
          depth = state.aux(i);
          break;
        default:
          depth = p_.z_star(i);
          break;
      }
      Eigen::Vector2d rate;
      if (p_.scheme.ibvs_case == IbvsCase::Case2) {
        rate = l_star_.middleRows<2>(2 * i) * v;
      } else {
        rate = l2d_point(px, depth, p_.intrinsics) * v;
        if (p_.scheme.ibvs_case == IbvsCase::Case3) {
          rate = 0.5 * (rate + l_star_.middleRows<2>(2 * i) * v);
        }
      }
      state.s(2 * i) += rate.x() * dt;
      state.s(2 * i + 1) += rate.y() * dt;
      if (online_depth) {
        const double z = state.aux(i);
        const double x3 = (px.x() - p_.intrinsics.u0) / p_.intrinsics.fu * z;
        const double y3 = (px.y() - p_.intrinsics.v0) / p_.intrinsics.fv * z;
        state.aux(i) += (-v(2) - v(3) * y3 + v(4) * x3) * dt;
        if (!(state.aux(i) > kMinDepth)) return false;
      }
    }
    return true;
  }

  // Camera-frame point dynamics Pdot = -v - w x P for a packed point vector.
  static void step_points(Eigen::Ref<Eigen::VectorXd> points, const Vector6d& v,
                          double dt) {
    const Eigen::Vector3d lin = v.head<3>();
    const Eigen::Vector3d ang = v.tail<3>();
    for (Eigen::Index i = 0; i + 2 < points.size(); i += 3) {
      const Eigen::Vector3d p = points.segment<3>(i);
      points.segment<3>(i) += (-lin - ang.cross(p)) * dt;
    }
  }

  bool step_pbvs_block(Eigen::VectorXd& s, const Vector6d& v,
                       double dt) const {
    const Eigen::Vector3d tu = s.segment<3>(3);
    if (tu.norm() > 5.5) return false;  // approaching the log-map singularity
    const Eigen::Matrix3d r = axis_angle_to_rotation(tu);
    s.head<3>() += (r * v.head<3>()) * dt;
    s.segment<3>(3) += (l_theta_u(tu) * (r * v.tail<3>())) * dt;
    return true;
  }

  bool step_pbvs(VsState& state, const Vector6d& v, double dt) const {
    if (!step_pbvs_block(state.s, v, dt)) return false;
    if (p_.fov_penalty) {
      step_points(state.aux, v, dt);
      for (Eigen::Index i = 2; i < state.aux.size(); i += 3) {
        if (!(state.aux(i) > kMinDepth)) return false;
      }
    }
    return true;
  }

  bool step_pbvs_augmented(VsState& state, const Vector6d& v,
                           double dt) const {
    if (!step_pbvs_block(state.s, v, dt)) return false;
    step_points(state.s.tail(state.s.size() - 6), v, dt);
    return true;
  }

  Params p_;
  Eigen::MatrixXd l_star_;   // constant image Jacobian at the target
  ConstraintSpec points_spec_;  // constraints with the pixel box disabled
};

/// State-dependent running cost as a standalone closure; mirrors
/// VsModel::running_cost for callers that only need the cost.
inline std::function<double(const VsState&)> build_running_cost(
    const VsModel::Params& params) {
  VsModel model(params);
  return [model = std::move(model)](const VsState& s) {
    return model.running_cost(s);
  };
}

}  // namespace mppivs
