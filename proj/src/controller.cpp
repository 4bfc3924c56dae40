#include "mppivs/controller.hpp"

#include <optional>
#include <utility>

#include "mppivs/harness.hpp"
#include "mppivs/interaction.hpp"

namespace mppivs {

void propagate_depths(Eigen::VectorXd& depths, const Eigen::VectorXd& pixels,
                      const CameraIntrinsics& intr, const Twist& executed,
                      double dt) {
  for (Eigen::Index i = 0; i < depths.size(); ++i) {
    const double z = depths(i);
    const double x3 = (pixels(2 * i) - intr.u0) / intr.fu * z;
    const double y3 = (pixels(2 * i + 1) - intr.v0) / intr.fv * z;
    depths(i) += (-executed(2) - executed(3) * y3 + executed(4) * x3) * dt;
  }
}

namespace {

bool uses_online_depths(const VsScheme& scheme) {
  return scheme.tag == VsSchemeTag::Ibvs &&
         (scheme.ibvs_case == IbvsCase::Case0 ||
          scheme.ibvs_case == IbvsCase::Case3);
}

class ClassicalController : public VsController {
 public:
  ClassicalController(const ScenarioConfig& cfg, const ServoTargets& targets,
                      CameraIntrinsics gamma_hat, double depth_factor)
      : scheme_(cfg.scheme),
        lambda_(cfg.lambda_s),
        gamma_hat_(gamma_hat),
        depth_factor_(depth_factor),
        targets_(targets),
        v_min_(cfg.mppi.v_min),
        v_max_(cfg.mppi.v_max) {
    if (scheme_.tag == VsSchemeTag::PbvsAugmented) {
      throw ConfigError(
          "controller 'classical' supports schemes ibvs, 3dvs and pbvs");
    }
    if (!(lambda_ > 0.0)) throw ConfigError("lambda_s must be > 0");
  }

  Twist compute(const StepInputs& in) override {
    Twist v = Twist::Zero();
    switch (scheme_.tag) {
      case VsSchemeTag::Ibvs: {
        if (uses_online_depths(scheme_) && !depths_ready_) {
          z_hat_ = in.obs.depths * depth_factor_;
          depths_ready_ = true;
        }
        const Eigen::MatrixXd l = ibvs_matrix_for_case(
            scheme_.ibvs_case, in.obs.pixels,
            depths_ready_ ? z_hat_ : targets_.depths_star,
            targets_.pixels_star, targets_.depths_star, gamma_hat_);
        v = c_ibvs(in.obs.pixels, targets_.pixels_star, l, lambda_);
        last_pixels_ = in.obs.pixels;
        break;
      }
      case VsSchemeTag::ThreeDvs:
        v = c_3dvs(in.obs.points, targets_.points_star,
                   stack_l3d(in.obs.points), lambda_);
        break;
      case VsSchemeTag::Pbvs:
        v = c_pbvs(in.pose_err_t, in.pose_err_r, lambda_);
        break;
      case VsSchemeTag::PbvsAugmented:
        break;
    }
    if (v_min_.size() == 6) v = clamp_control(v, v_min_.head<6>(), v_max_.head<6>());
    return v;
  }

  void post_apply(const Twist& executed, double dt) override {
    if (depths_ready_) {
      propagate_depths(z_hat_, last_pixels_, gamma_hat_, executed, dt);
    }
  }

 private:
  VsScheme scheme_;
  double lambda_;
  CameraIntrinsics gamma_hat_;
  double depth_factor_;
  ServoTargets targets_;
  Eigen::VectorXd v_min_, v_max_;
  Eigen::VectorXd z_hat_;
  Eigen::VectorXd last_pixels_;
  bool depths_ready_ = false;
};

class MppiVsController : public VsController {
 public:
  MppiVsController(const ScenarioConfig& cfg, const ServoTargets& targets,
                   CameraIntrinsics gamma_hat, double depth_factor)
      : scheme_(cfg.scheme),
        depth_factor_(depth_factor),
        gamma_hat_(gamma_hat),
        engine_(make_model(cfg, targets, gamma_hat), tune(cfg)) {}

  Twist compute(const StepInputs& in) override {
    VsState state;
    switch (scheme_.tag) {
      case VsSchemeTag::Ibvs:
        state.s = in.obs.pixels;
        if (uses_online_depths(scheme_)) {
          if (!depths_ready_) {
            z_hat_ = in.obs.depths * depth_factor_;
            depths_ready_ = true;
          }
          state.aux = z_hat_;
          last_pixels_ = in.obs.pixels;
        }
        break;
      case VsSchemeTag::ThreeDvs:
        state.s = in.obs.points;
        break;
      case VsSchemeTag::Pbvs:
        state.s.resize(6);
        state.s << in.pose_err_t, in.pose_err_r;
        if (engine_.model().params().fov_penalty) state.aux = in.obs.points;
        break;
      case VsSchemeTag::PbvsAugmented:
        state.s.resize(6 + in.obs.points.size());
        state.s << in.pose_err_t, in.pose_err_r, in.obs.points;
        break;
    }
    return engine_.step(state);
  }

  void post_apply(const Twist& executed, double dt) override {
    if (depths_ready_) {
      propagate_depths(z_hat_, last_pixels_, gamma_hat_, executed, dt);
    }
  }

 private:
  static VsModel make_model(const ScenarioConfig& cfg,
                            const ServoTargets& targets,
                            const CameraIntrinsics& gamma_hat) {
    VsModel::Params p;
    p.scheme = cfg.scheme;
    p.intrinsics = gamma_hat;
    p.q_diag = cfg.q_diag;
    p.constraints = cfg.constraints;
    p.fov_penalty = cfg.fov_penalty;
    switch (cfg.scheme.tag) {
      case VsSchemeTag::Ibvs:
        p.s_star = targets.pixels_star;
        p.z_star = targets.depths_star;
        break;
      case VsSchemeTag::ThreeDvs:
        p.s_star = targets.points_star;
        break;
      case VsSchemeTag::Pbvs:
        p.s_star = Eigen::VectorXd::Zero(6);
        break;
      case VsSchemeTag::PbvsAugmented:
        p.s_star.setZero(6 + targets.points_star.size());
        p.s_star.tail(targets.points_star.size()) = targets.points_star;
        break;
    }
    return VsModel(std::move(p));
  }

  // The rollout step equals the control period; the scenario seed drives the
  // perturbation streams.
  static MppiConfig tune(const ScenarioConfig& cfg) {
    MppiConfig mc = cfg.mppi;
    mc.dt = cfg.dt();
    mc.seed = splitmix64(cfg.seed ^ 0x4D505049ULL);
    return mc;
  }

  VsScheme scheme_;
  double depth_factor_;
  CameraIntrinsics gamma_hat_;
  MppiEngine<VsModel> engine_;
  Eigen::VectorXd z_hat_;
  Eigen::VectorXd last_pixels_;
  bool depths_ready_ = false;
};

}  // namespace

std::unique_ptr<VsController> make_controller(const ScenarioConfig& cfg,
                                              const ServoTargets& targets) {
  auto [gamma_hat, depth_factor] =
      perturb_model(cfg.intrinsics, cfg.calibration);
  if (cfg.controller == ControllerKind::Classical) {
    return std::make_unique<ClassicalController>(cfg, targets, gamma_hat,
                                                 depth_factor);
  }
  return std::make_unique<MppiVsController>(cfg, targets, gamma_hat,
                                            depth_factor);
}

}  // namespace mppivs
