#include <doctest.h>

#include <random>

#include "mppivs/interaction.hpp"
#include "mppivs/oracles.hpp"
#include "mppivs/scenario.hpp"
#include "mppivs/sim.hpp"

using namespace mppivs;

namespace {

World nominal_world(const RigidTransform& pose) {
  return {defaults::object_square(), pose, defaults::camera()};
}

}  // namespace

TEST_CASE("apply_twist holds the pose under zero twist") {
  World world = nominal_world(defaults::desired_pose_centered());
  const GantryLimits limits;
  CHECK_FALSE(apply_twist(world, Twist::Zero(), 0.02, limits));
  CHECK(world.camera_pose.translation.isApprox(Eigen::Vector3d(0, 0, -0.75)));
}

TEST_CASE("commanding past the z floor freezes the pose and raises the flag") {
  GantryLimits limits;
  World world = nominal_world(
      defaults::pose_from_t_theta_u_deg({0.0, 0.0, -1.449}, {0, 0, 0}));
  Twist down = Twist::Zero();
  down(2) = -0.5;  // camera -z in F_o: moving away from the object
  const Eigen::Vector3d before = world.camera_pose.translation;
  CHECK(apply_twist(world, down, 0.02, limits));
  CHECK(world.camera_pose.translation.isApprox(before, 1e-15));
  // Moving back toward the object is accepted on the next step.
  Twist up = Twist::Zero();
  up(2) = 0.5;
  CHECK_FALSE(apply_twist(world, up, 0.02, limits));
}

TEST_CASE("repeated optical-axis rotation trips the bound at the predicted "
          "step") {
  GantryLimits limits;
  const double start = 150.0 * M_PI / 180.0;
  const double bound = limits.r_max(2);
  World world =
      nominal_world(defaults::pose_from_t_theta_u_deg({0, 0, -0.75},
                                                      {0, 0, 150.0}));
  Twist spin = Twist::Zero();
  spin(5) = 0.5;
  const double dt = 0.02;
  const int first_violation =
      static_cast<int>(std::floor((bound - start) / (spin(5) * dt))) + 1;
  for (int step = 1; step <= first_violation + 3; ++step) {
    const bool flag = apply_twist(world, spin, dt, limits);
    CHECK(flag == (step >= first_violation));
  }
}

TEST_CASE("limit flag is monotone in the commanded displacement") {
  GantryLimits limits;
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    World world = nominal_world(defaults::pose_from_t_theta_u_deg(
        {0.6 * unit(rng), 0.6 * unit(rng), -1.40 + 0.02 * unit(rng)},
        {10 * unit(rng), 10 * unit(rng), 150.0 * unit(rng)}));
    Twist v;
    for (int j = 0; j < 6; ++j) v(j) = unit(rng);
    World a = world, b = world;
    const bool small = apply_twist(a, v, 0.05, GantryLimits{});
    const bool large = apply_twist(b, (2.0 * v).eval(), 0.05, GantryLimits{});
    if (small) CHECK(large);
  }
}

TEST_CASE("noise-free observation at the goal reproduces the target pixels") {
  World world = nominal_world(defaults::desired_pose_centered());
  std::mt19937_64 rng(1);
  const Observation obs = observe(world, world.intrinsics, {}, rng);
  REQUIRE(obs.pixels.size() == 8);
  CHECK(obs.all_visible);
  CHECK(obs.pixels(0) == doctest::Approx(208.0));
  CHECK(obs.pixels(1) == doctest::Approx(128.0));
  CHECK(obs.pixels(2) == doctest::Approx(432.0));
  CHECK(obs.pixels(3) == doctest::Approx(128.0));
  CHECK(obs.pixels(4) == doctest::Approx(432.0));
  CHECK(obs.pixels(5) == doctest::Approx(352.0));
  CHECK(obs.pixels(6) == doctest::Approx(208.0));
  CHECK(obs.pixels(7) == doctest::Approx(352.0));
  CHECK(obs.depths.isApprox(Eigen::VectorXd::Constant(4, 0.75), 1e-12));

  const Observation again = observe(world, world.intrinsics, {}, rng);
  CHECK((obs.pixels - again.pixels).norm() == 0.0);
}

TEST_CASE("uniform pixel noise respects its amplitude and mean deviation") {
  World world = nominal_world(defaults::desired_pose_centered());
  const Observation clean = ground_truth(world, world.intrinsics);
  NoiseSpec noise;
  noise.pixel = 1.0;
  std::mt19937_64 rng(123);
  double max_dev = 0.0, sum_dev = 0.0;
  long n = 0;
  for (int i = 0; i < 12500; ++i) {  // 1e5 per-pixel deviations
    const Observation obs = observe(world, world.intrinsics, noise, rng);
    for (int j = 0; j < 8; ++j) {
      const double d = std::abs(obs.pixels(j) - clean.pixels(j));
      max_dev = std::max(max_dev, d);
      sum_dev += d;
      ++n;
    }
  }
  CHECK(max_dev <= 1.0);
  CHECK(std::abs(sum_dev / n - 0.5) < 0.01);  // within 2% of amplitude/2
}

TEST_CASE("visibility flags match box membership of the clean projection") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    World world = nominal_world(defaults::pose_from_t_theta_u_deg(
        {0.8 * unit(rng), 0.8 * unit(rng), -0.6 + 0.3 * unit(rng)},
        {25 * unit(rng), 25 * unit(rng), 120 * unit(rng)}));
    std::mt19937_64 obs_rng(5);
    const Observation obs = observe(world, world.intrinsics, {}, obs_rng);
    for (int f = 0; f < 4; ++f) {
      const double z = obs.points(3 * f + 2);
      bool inside = z > kMinDepth;
      if (inside) {
        inside = world.intrinsics.contains(obs.pixels.segment<2>(2 * f));
      }
      CHECK(obs.visible[f] == inside);
    }
  }
}

TEST_CASE("camera-model perturbation fixtures") {
  const CameraIntrinsics truth = defaults::camera();

  SUBCASE("identity under zero offsets") {
    const auto [hat, factor] = perturb_model(truth, {});
    CHECK(hat.fu == truth.fu);
    CHECK(hat.fv == truth.fv);
    CHECK(hat.u0 == truth.u0);
    CHECK(hat.v0 == truth.v0);
    CHECK(factor == 1.0);
  }

  SUBCASE("+30% focal error scales both focal lengths") {
    CalibrationError err;
    err.f = 0.3;
    const auto [hat, factor] = perturb_model(truth, err);
    CHECK(hat.fu == doctest::Approx(1092.0));
    CHECK(hat.fv == doctest::Approx(1092.0));
    CHECK(factor == 1.0);
  }

  SUBCASE("combined offsets") {
    CalibrationError err;
    err.f = 0.3;
    err.rho_u = -0.2;
    err.rho_v = 0.2;
    err.u0 = -0.15;
    err.v0 = 0.15;
    const auto [hat, factor] = perturb_model(truth, err);
    CHECK(hat.fu == doctest::Approx(1365.0));
    CHECK(hat.fv == doctest::Approx(910.0));
    CHECK(hat.u0 == doctest::Approx(272.0));
    CHECK(hat.v0 == doctest::Approx(276.0));
    CHECK(factor == 1.0);
  }

  SUBCASE("a -100% focal offset is rejected") {
    CalibrationError err;
    err.f = -1.0;
    CHECK_THROWS_AS(perturb_model(truth, err), ConfigError);
  }
}

TEST_CASE("pose error fixtures and round trip") {
  const RigidTransform desired = defaults::desired_pose_centered();

  SUBCASE("zero at the goal") {
    World world = nominal_world(desired);
    const auto [t, r] = true_pose_error(world, desired);
    CHECK(t.norm() == doctest::Approx(0.0));
    CHECK(r.norm() == doctest::Approx(0.0));
  }

  SUBCASE("pure z offset") {
    World world = nominal_world(
        defaults::pose_from_t_theta_u_deg({0.0, 0.0, -0.85}, {0, 0, 0}));
    const auto [t, r] = true_pose_error(world, desired);
    CHECK(t.isApprox(Eigen::Vector3d(0, 0, -0.1), 1e-12));
    CHECK(r.norm() == doctest::Approx(0.0));
  }

  SUBCASE("a composed error is recovered") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      RigidTransform err;
      Eigen::Vector3d axis(unit(rng), unit(rng), unit(rng));
      if (axis.norm() < 1e-9) axis = Eigen::Vector3d::UnitX();
      axis.normalize();
      const Eigen::Vector3d tu = std::abs(unit(rng)) * 2.5 * axis;
      err.rotation = axis_angle_to_rotation(tu);
      err.translation = {unit(rng), unit(rng), unit(rng)};
      World world = nominal_world(compose(desired, err));
      const auto [t, r] = true_pose_error(world, desired);
      CHECK((t - err.translation).norm() < 1e-9);
      CHECK((r - tu).norm() < 1e-9);
    }
  }
}

TEST_CASE("simulated feature velocities match the interaction matrices") {
  const auto report = oracle_finite_difference(100, 2);
  INFO(report.detail);
  CHECK(report.pass);
}
