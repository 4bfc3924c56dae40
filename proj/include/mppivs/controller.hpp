#pragma once

#include <Eigen/Core>

#include <memory>

#include "mppivs/classical.hpp"
#include "mppivs/mppi.hpp"
#include "mppivs/scenario.hpp"
#include "mppivs/sim.hpp"
#include "mppivs/vscost.hpp"

namespace mppivs {

/// Everything a controller may read at one control step: the (possibly noisy)
/// measurement and the pose error w.r.t. the goal frame.
struct StepInputs {
  const Observation& obs;
  Eigen::Vector3d pose_err_t;
  Eigen::Vector3d pose_err_r;
};

/// Per-task servoing controller. `compute` returns the commanded camera
/// twist; `post_apply` receives the twist that was actually executed (zero
/// when the robot holds at a joint limit) so online depth estimates can be
/// propagated without ever re-reading ground truth.
class VsController {
 public:
  virtual ~VsController() = default;
  virtual Twist compute(const StepInputs& in) = 0;
  virtual void post_apply(const Twist& /*executed*/, double /*dt*/) {}
};

/// Shared targets handed to controllers: what the task looks like from the
/// desired camera pose, as seen through the true camera.
struct ServoTargets {
  Eigen::VectorXd pixels_star;  // 2n
  Eigen::VectorXd depths_star;  // n
  Eigen::VectorXd points_star;  // 3n
};

std::unique_ptr<VsController> make_controller(const ScenarioConfig& cfg,
                                              const ServoTargets& targets);

/// Online depth propagation through the 3D point dynamics, evaluated with the
/// controller-side camera model at the last measured pixels.
void propagate_depths(Eigen::VectorXd& depths, const Eigen::VectorXd& pixels,
                      const CameraIntrinsics& intr, const Twist& executed,
                      double dt);

}  // namespace mppivs
