#include "mppivs/harness.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "mppivs/controller.hpp"

namespace mppivs {

std::optional<double> convergence_time(const std::vector<double>& err_norm,
                                       double dt, double threshold) {
  if (err_norm.empty()) return std::nullopt;
  std::ptrdiff_t last_above = -1;
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(err_norm.size());
       ++i) {
    if (!(err_norm[i] < threshold)) last_above = i;
  }
  if (last_above < 0) return 0.0;
  if (last_above + 1 >= static_cast<std::ptrdiff_t>(err_norm.size())) {
    return std::nullopt;  // still above at the end of the log
  }
  return static_cast<double>(last_above + 1) * dt;
}

bool pose_is_admissible(const RigidTransform& pose, const GantryLimits& limits,
                        const std::vector<Eigen::Vector3d>& objects,
                        const CameraIntrinsics& intrinsics) {
  if (!limits.admits(pose)) return false;
  World world{objects, pose, intrinsics};
  return ground_truth(world, intrinsics).all_visible;
}

std::vector<RigidTransform> sample_initial_poses(
    int count, std::uint64_t seed, const WorkspaceBox& box,
    const GantryLimits& limits, const std::vector<Eigen::Vector3d>& objects,
    const CameraIntrinsics& intrinsics) {
  if (count < 1) throw ConfigError("pose sample count must be >= 1");
  std::mt19937_64 rng(splitmix64(seed ^ 0x90535EEDULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    Eigen::Vector3d out;
    for (int j = 0; j < 3; ++j) out(j) = lo(j) + unit(rng) * (hi(j) - lo(j));
    return out;
  };
  std::vector<RigidTransform> poses;
  poses.reserve(count);
  const int budget = 100000;
  for (int attempt = 0; attempt < budget && static_cast<int>(poses.size()) < count;
       ++attempt) {
    RigidTransform pose;
    pose.translation = draw(box.t_min, box.t_max);
    pose.rotation = axis_angle_to_rotation(draw(box.r_min, box.r_max));
    if (pose_is_admissible(pose, limits, objects, intrinsics)) {
      poses.push_back(pose);
    }
  }
  if (static_cast<int>(poses.size()) < count) {
    throw ConfigError("initial-pose rejection budget exhausted");
  }
  return poses;
}

namespace {

double feature_error_norm(VsSchemeTag tag, const Observation& truth,
                          const ServoTargets& targets) {
  if (tag == VsSchemeTag::Ibvs) {
    return (truth.pixels - targets.pixels_star).norm();
  }
  return (truth.points - targets.points_star).norm();
}

void validate_scenario(const ScenarioConfig& cfg) {
  if (!(cfg.duration > 0.0)) throw ConfigError("duration_s must be > 0");
  if (!(cfg.rate > 0.0)) throw ConfigError("control_rate_hz must be > 0");
  if (!cfg.intrinsics.valid()) throw ConfigError("camera intrinsics invalid");
  if (cfg.object_points.empty()) throw ConfigError("object_points empty");
  const auto n = static_cast<Eigen::Index>(cfg.object_points.size());
  if (cfg.controller == ControllerKind::Mppi) {
    Eigen::Index expected = 0;
    switch (cfg.scheme.tag) {
      case VsSchemeTag::Ibvs:
        expected = 2 * n;
        break;
      case VsSchemeTag::ThreeDvs:
        expected = 3 * n;
        break;
      case VsSchemeTag::Pbvs:
        expected = 6;
        break;
      case VsSchemeTag::PbvsAugmented:
        expected = 0;  // augmented cost reads w1/w2, not q_diag
        break;
    }
    if (expected > 0 && cfg.q_diag.size() != expected) {
      throw ConfigError("q_diag length does not match the scheme state");
    }
  }
}

}  // namespace

TaskResult run_task(const ScenarioConfig& cfg) {
  validate_scenario(cfg);

  World world{cfg.object_points, cfg.initial_pose, cfg.intrinsics};
  World goal_world{cfg.object_points, cfg.desired_pose, cfg.intrinsics};
  const Observation goal = ground_truth(goal_world, cfg.intrinsics);
  if (!goal.all_visible) {
    throw ConfigError("desired_pose does not keep all features visible");
  }
  ServoTargets targets{goal.pixels, goal.depths, goal.points};

  auto controller = make_controller(cfg, targets);
  std::mt19937_64 noise_rng(splitmix64(cfg.seed ^ 0x711E5EEDULL));

  const double dt = cfg.dt();
  const int steps = static_cast<int>(std::lround(cfg.duration * cfg.rate));
  const int settle_window = std::max(1, static_cast<int>(std::lround(cfg.rate)));
  const double conv_threshold = convergence_threshold(cfg.scheme.tag);

  TaskResult result;
  auto& log = result.log;
  bool jl_any = false;
  int settled = 0;

  for (int i = 0; i < steps; ++i) {
    const double t = i * dt;
    const Observation truth = ground_truth(world, cfg.intrinsics);
    const auto [err_t, err_r] = true_pose_error(world, cfg.desired_pose);
    const double err = feature_error_norm(cfg.scheme.tag, truth, targets);

    if (!truth.all_visible) {
      result.p_out = true;
      log.t.push_back(t);
      log.pixels.push_back(truth.pixels);
      log.depths.push_back(truth.depths);
      log.cam_t.push_back(world.camera_pose.translation);
      log.cam_r.push_back(rotation_to_axis_angle(world.camera_pose.rotation));
      log.twist.push_back(Twist::Zero());
      log.err_norm.push_back(err);
      log.jl.push_back(false);
      result.sim_time = t;
      break;
    }

    const Observation obs = observe(world, cfg.intrinsics, cfg.noise, noise_rng);
    const Twist cmd = controller->compute({obs, err_t, err_r});
    const bool jl = apply_twist(world, cmd, dt, cfg.limits);
    const Twist executed = jl ? Twist::Zero() : cmd;
    controller->post_apply(executed, dt);
    jl_any = jl_any || jl;

    log.t.push_back(t);
    log.pixels.push_back(truth.pixels);
    log.depths.push_back(truth.depths);
    log.cam_t.push_back(world.camera_pose.translation);
    log.cam_r.push_back(rotation_to_axis_angle(world.camera_pose.rotation));
    log.twist.push_back(cmd);
    log.err_norm.push_back(err);
    log.jl.push_back(jl);
    result.sim_time = t + dt;

    const bool at_goal =
        err < conv_threshold && check_local_minimum_avoided(err_t, err_r);
    settled = at_goal ? settled + 1 : 0;
    if (cfg.early_stop && settled >= settle_window) break;
  }

  const auto [fin_t, fin_r] = true_pose_error(world, cfg.desired_pose);
  result.mse1 = (2.0 / 6.0) * fin_t.squaredNorm();
  result.mse2 = (2.0 / 6.0) * fin_r.squaredNorm();
  const bool converged = check_local_minimum_avoided(fin_t, fin_r);

  result.r_jl = !converged && !result.p_out && jl_any;
  result.r_lm = !converged && !result.p_out && !jl_any;
  result.success = !result.r_lm && !result.r_jl && !result.p_out;
  result.convergence_time = convergence_time(log.err_norm, dt, conv_threshold);
  return result;
}

std::vector<TaskResult> run_tasks(const std::vector<ScenarioConfig>& configs,
                                  int parallel) {
  std::vector<TaskResult> results(configs.size());
  const int workers =
      std::max(1, std::min<int>(parallel, static_cast<int>(configs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      results[i] = run_task(configs[i]);
    }
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < configs.size();
           i = next.fetch_add(1)) {
        results[i] = run_task(configs[i]);
      }
    });
  }
  for (auto& th : pool) th.join();
  return results;
}

SuiteSummary summarize(const std::vector<TaskResult>& results,
                       VsSchemeTag /*tag*/) {
  SuiteSummary s;
  s.tasks = static_cast<int>(results.size());
  for (const auto& r : results) {
    if (r.success) {
      ++s.n_success;
      if (r.convergence_time) s.convergence_times.push_back(*r.convergence_time);
    }
    if (r.r_lm) ++s.r_lm;
    if (r.r_jl) ++s.r_jl;
    if (r.p_out) ++s.p_out;
  }
  s.success_rate = s.tasks > 0 ? 100.0 * s.n_success / s.tasks : 0.0;
  return s;
}

std::vector<ScenarioConfig> expand_suite(const SuiteConfig& suite) {
  if (suite.tasks < 1) throw ConfigError("tasks must be >= 1");
  const auto poses = sample_initial_poses(
      suite.tasks, suite.scenario.seed, suite.workspace, suite.scenario.limits,
      suite.scenario.object_points, suite.scenario.intrinsics);
  std::vector<ScenarioConfig> configs(suite.tasks, suite.scenario);
  for (int i = 0; i < suite.tasks; ++i) {
    configs[i].initial_pose = poses[i];
    configs[i].seed = splitmix64(suite.scenario.seed ^
                                 (0xA11CE5ULL + static_cast<std::uint64_t>(i)));
    configs[i].name =
        suite.scenario.name + "_task" + std::to_string(i);
  }
  return configs;
}

SuiteSummary run_suite(const SuiteConfig& suite, int parallel,
                       std::vector<TaskResult>* results_out) {
  const auto configs = expand_suite(suite);
  auto results = run_tasks(configs, parallel);
  SuiteSummary summary = summarize(results, suite.scenario.scheme.tag);
  if (results_out) *results_out = std::move(results);
  return summary;
}

}  // namespace mppivs
