#pragma once

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <vector>

#include "mppivs/scenario.hpp"
#include "mppivs/sim.hpp"

namespace mppivs {

struct TrajectoryLog {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> pixels;  // true pixels, 2n interleaved
  std::vector<Eigen::VectorXd> depths;  // true depths, n
  std::vector<Eigen::Vector3d> cam_t;   // camera translation in F_o
  std::vector<Eigen::Vector3d> cam_r;   // camera axis-angle in F_o
  std::vector<Twist> twist;             // commanded (clamped) twist
  std::vector<double> err_norm;         // scheme feature-error norm
  std::vector<bool> jl;                 // limit hit at this step

  std::size_t size() const { return t.size(); }
};

struct TaskResult {
  bool r_lm = false;
  bool r_jl = false;
  bool p_out = false;
  bool success = false;
  std::optional<double> convergence_time;
  double mse1 = 0.0;
  double mse2 = 0.0;
  double sim_time = 0.0;
  TrajectoryLog log;
};

struct SuiteSummary {
  int tasks = 0;
  int n_success = 0;
  int r_lm = 0;
  int r_jl = 0;
  int p_out = 0;
  double success_rate = 0.0;
  std::vector<double> convergence_times;  // successful tasks only
};

/// Positioning-error test of the success metric: both mean-squared errors
/// strictly below their thresholds.
inline bool check_local_minimum_avoided(const Eigen::Vector3d& e1,
                                        const Eigen::Vector3d& e2) {
  const double mse1 = (2.0 / 6.0) * e1.squaredNorm();
  const double mse2 = (2.0 / 6.0) * e2.squaredNorm();
  return mse1 < defaults::kMseEps1 && mse2 < defaults::kMseEps2;
}

/// First time after which the error norm stays below the threshold for the
/// remainder of the log; 0 when it never rises above, nullopt when it never
/// settles.
std::optional<double> convergence_time(const std::vector<double>& err_norm,
                                       double dt, double threshold);

inline double convergence_threshold(VsSchemeTag tag) {
  return tag == VsSchemeTag::Ibvs ? defaults::kConvergencePx
                                  : defaults::kConvergenceMeters;
}

/// Uniform rejection sampling of admissible initial camera poses: pose inside
/// the gantry limits and every feature visible from it.
std::vector<RigidTransform> sample_initial_poses(
    int count, std::uint64_t seed, const WorkspaceBox& box,
    const GantryLimits& limits, const std::vector<Eigen::Vector3d>& objects,
    const CameraIntrinsics& intrinsics);

bool pose_is_admissible(const RigidTransform& pose, const GantryLimits& limits,
                        const std::vector<Eigen::Vector3d>& objects,
                        const CameraIntrinsics& intrinsics);

TaskResult run_task(const ScenarioConfig& cfg);

std::vector<TaskResult> run_tasks(const std::vector<ScenarioConfig>& configs,
                                  int parallel);

SuiteSummary summarize(const std::vector<TaskResult>& results,
                       VsSchemeTag tag);

/// Expands a suite config into per-task scenarios (sampled initial poses,
/// per-task seeds), runs them and aggregates.
SuiteSummary run_suite(const SuiteConfig& suite, int parallel,
                       std::vector<TaskResult>* results_out = nullptr);

std::vector<ScenarioConfig> expand_suite(const SuiteConfig& suite);

}  // namespace mppivs
