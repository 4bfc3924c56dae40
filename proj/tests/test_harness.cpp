#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mppivs/harness.hpp"
#include "mppivs/io.hpp"

using namespace mppivs;

namespace {

// Printed initial camera configuration of the worked positioning example.
RigidTransform task113_pose() {
  return defaults::pose_from_t_theta_u_deg({0.44, -0.23, -1.35},
                                           {10.95, -20.48, -50.15});
}

ScenarioConfig quick_mppi_scenario() {
  ScenarioConfig cfg = make_scenario(VsSchemeTag::Ibvs, ControllerKind::Mppi);
  cfg.mppi.samples = 32;
  cfg.mppi.horizon_steps = 25;
  cfg.duration = 0.5;
  cfg.initial_pose = defaults::pose_from_t_theta_u_deg({0.05, -0.04, -0.8},
                                                       {2.0, -1.0, 10.0});
  return cfg;
}

}  // namespace

TEST_CASE("positioning-error test fixtures") {
  CHECK(check_local_minimum_avoided(Eigen::Vector3d::Zero(),
                                    Eigen::Vector3d::Zero()));
  // 1 cm translational error: MSE1 = (2/6) 1e-4 = 3.33e-5 > 1e-5.
  CHECK_FALSE(check_local_minimum_avoided({0.01, 0.0, 0.0},
                                          Eigen::Vector3d::Zero()));
  CHECK_FALSE(check_local_minimum_avoided(Eigen::Vector3d::Zero(),
                                          {0.0, 0.025, 0.0}));

  // The comparison is strict: any error whose mean square lands exactly on
  // the threshold does not count as converged.
  double x = std::sqrt(3.0 * defaults::kMseEps1);
  for (int i = -4; i <= 4; ++i) {
    double candidate = x;
    for (int k = 0; k < std::abs(i); ++k) {
      candidate = std::nextafter(candidate, i > 0 ? 1.0 : 0.0);
    }
    const Eigen::Vector3d e1(candidate, 0.0, 0.0);
    const double mse = (2.0 / 6.0) * e1.squaredNorm();
    if (mse == defaults::kMseEps1) {
      CHECK_FALSE(
          check_local_minimum_avoided(e1, Eigen::Vector3d::Zero()));
    }
  }
}

TEST_CASE("convergence-time fixtures") {
  SUBCASE("identically zero error converges at t = 0") {
    const std::vector<double> log(200, 0.0);
    const auto t = convergence_time(log, 0.02, 0.6);
    REQUIRE(t.has_value());
    CHECK(*t == 0.0);
  }

  SUBCASE("a drop at step 100 of 200 converges at 100 dt") {
    std::vector<double> log(200, 5.0);
    for (int i = 100; i < 200; ++i) log[i] = 0.1;
    const auto t = convergence_time(log, 0.02, 0.6);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(100 * 0.02));
  }

  SUBCASE("no settling yields no time") {
    std::vector<double> log(50, 5.0);
    CHECK_FALSE(convergence_time(log, 0.02, 0.6).has_value());
    log.back() = 0.1;  // below only at the very last sample
    const auto t = convergence_time(log, 0.02, 0.6);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(49 * 0.02));
  }

  SUBCASE("extending a converged log never shortens the time") {
    std::vector<double> log(120, 3.0);
    for (int i = 60; i < 120; ++i) log[i] = 0.2;
    const auto t1 = convergence_time(log, 0.02, 0.6);
    std::vector<double> longer = log;
    longer.insert(longer.end(), 80, 0.2);
    const auto t2 = convergence_time(longer, 0.02, 0.6);
    REQUIRE(t1.has_value());
    REQUIRE(t2.has_value());
    CHECK(*t2 >= *t1);
  }
}

TEST_CASE("initial-pose sampling is deterministic and admissible") {
  const WorkspaceBox box;
  const GantryLimits limits;
  const auto objects = defaults::object_square();
  const CameraIntrinsics intr = defaults::camera();

  const auto a = sample_initial_poses(20, 7, box, limits, objects, intr);
  const auto b = sample_initial_poses(20, 7, box, limits, objects, intr);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].translation - b[i].translation).norm() == 0.0);
    CHECK((a[i].rotation - b[i].rotation).norm() == 0.0);
    CHECK(pose_is_admissible(a[i], limits, objects, intr));
  }
}

TEST_CASE("the printed example pose is accepted by the admissibility filter") {
  CHECK(pose_is_admissible(task113_pose(), GantryLimits{},
                           defaults::object_square(), defaults::camera()));
}

TEST_CASE("starting at the goal succeeds immediately") {
  ScenarioConfig cfg =
      make_scenario(VsSchemeTag::Ibvs, ControllerKind::Classical);
  cfg.initial_pose = cfg.desired_pose;
  cfg.duration = 5.0;
  const TaskResult result = run_task(cfg);
  CHECK(result.success);
  CHECK_FALSE(result.r_lm);
  CHECK_FALSE(result.r_jl);
  CHECK_FALSE(result.p_out);
  REQUIRE(result.convergence_time.has_value());
  CHECK(*result.convergence_time == 0.0);
}

TEST_CASE("a pose pinned against the z floor fails with the limit flag") {
  ScenarioConfig cfg =
      make_scenario(VsSchemeTag::Pbvs, ControllerKind::Classical);
  // Desired pose below the reachable floor: the commanded retreat runs the
  // camera into the bound and holds it there.
  cfg.initial_pose =
      defaults::pose_from_t_theta_u_deg({0.0, 0.0, -1.44}, {0, 0, 0});
  cfg.desired_pose =
      defaults::pose_from_t_theta_u_deg({0.0, 0.0, -1.60}, {0, 0, 0});
  cfg.duration = 1.0;
  const TaskResult result = run_task(cfg);
  CHECK(result.r_jl);
  CHECK_FALSE(result.success);
  CHECK_FALSE(result.p_out);
  CHECK_FALSE(result.r_lm);
}

TEST_CASE("losing a feature stops the run and sets the visibility flag") {
  // A Cartesian-space route from this off-center, strongly rotated start
  // sweeps one feature out of view after a couple of dozen steps.
  ScenarioConfig cfg =
      make_scenario(VsSchemeTag::Pbvs, ControllerKind::Classical);
  cfg.initial_pose = defaults::pose_from_t_theta_u_deg(
      {-0.136, -0.016, -0.605}, {-19.33, 5.51, -89.08});
  REQUIRE(pose_is_admissible(cfg.initial_pose, cfg.limits, cfg.object_points,
                             cfg.intrinsics));
  cfg.duration = 30.0;
  const TaskResult result = run_task(cfg);
  CHECK(result.p_out);
  CHECK_FALSE(result.success);
  CHECK_FALSE(result.r_jl);
  CHECK_FALSE(result.r_lm);
  CHECK(result.log.size() < 100);  // stops as soon as the feature leaves
  CHECK((int(result.r_lm) + int(result.r_jl) + int(result.p_out) +
         int(result.success)) == 1);
}

TEST_CASE("suite aggregation counts flags and is order insensitive") {
  std::vector<ScenarioConfig> configs;
  for (int i = 0; i < 3; ++i) {
    ScenarioConfig cfg =
        make_scenario(VsSchemeTag::Ibvs, ControllerKind::Classical);
    cfg.initial_pose = cfg.desired_pose;
    cfg.duration = 2.0;
    cfg.seed = i;
    configs.push_back(cfg);
  }
  {
    ScenarioConfig cfg =
        make_scenario(VsSchemeTag::Pbvs, ControllerKind::Classical);
    cfg.initial_pose =
        defaults::pose_from_t_theta_u_deg({0.0, 0.0, -1.44}, {0, 0, 0});
    cfg.desired_pose =
        defaults::pose_from_t_theta_u_deg({0.0, 0.0, -1.60}, {0, 0, 0});
    cfg.duration = 1.0;
    configs.push_back(cfg);
  }

  auto results = run_tasks(configs, 2);
  const SuiteSummary summary = summarize(results, VsSchemeTag::Ibvs);
  CHECK(summary.tasks == 4);
  CHECK(summary.n_success == 3);
  CHECK(summary.r_jl == 1);
  CHECK(summary.r_lm == 0);
  CHECK(summary.p_out == 0);
  CHECK(summary.success_rate == doctest::Approx(75.0));
  CHECK(summary.n_success + summary.r_lm + summary.r_jl + summary.p_out ==
        summary.tasks);

  std::reverse(results.begin(), results.end());
  const SuiteSummary reversed = summarize(results, VsSchemeTag::Ibvs);
  CHECK(reversed.n_success == summary.n_success);
  CHECK(reversed.r_jl == summary.r_jl);
  CHECK(reversed.success_rate == summary.success_rate);
}

TEST_CASE("task execution is bit-reproducible across reruns and threads") {
  ScenarioConfig cfg = quick_mppi_scenario();
  const TaskResult a = run_task(cfg);
  const TaskResult b = run_task(cfg);
  ScenarioConfig threaded = cfg;
  threaded.mppi.threads = 2;
  const TaskResult c = run_task(threaded);

  REQUIRE(a.log.size() == b.log.size());
  REQUIRE(a.log.size() == c.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK((a.log.twist[i] - b.log.twist[i]).norm() == 0.0);
    CHECK((a.log.twist[i] - c.log.twist[i]).norm() == 0.0);
    CHECK(a.log.err_norm[i] == c.log.err_norm[i]);
  }
}

TEST_CASE("suite expansion is deterministic and tasks stay independent") {
  SuiteConfig suite;
  suite.scenario = quick_mppi_scenario();
  suite.scenario.seed = 11;
  suite.tasks = 4;
  const auto configs = expand_suite(suite);
  REQUIRE(configs.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(pose_is_admissible(configs[i].initial_pose, suite.scenario.limits,
                             suite.scenario.object_points,
                             suite.scenario.intrinsics));
    for (int j = i + 1; j < 4; ++j) CHECK(configs[i].seed != configs[j].seed);
  }
  const auto serial = run_tasks(configs, 1);
  const auto parallel = run_tasks(configs, 4);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(serial[i].log.size() == parallel[i].log.size());
    for (std::size_t k = 0; k < serial[i].log.size(); ++k) {
      CHECK((serial[i].log.twist[k] - parallel[i].log.twist[k]).norm() == 0.0);
    }
  }
}
