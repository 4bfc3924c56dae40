#include <doctest.h>

#include <random>

#include <Eigen/QR>

#include "mppivs/classical.hpp"
#include "mppivs/harness.hpp"
#include "mppivs/oracles.hpp"
#include "mppivs/scenario.hpp"

using namespace mppivs;

TEST_CASE("pseudo-inverse fixtures") {
  CHECK(pseudo_inverse(Matrix6d::Identity()).isApprox(Matrix6d::Identity(),
                                                      1e-14));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 6);
  m(0, 0) = 2.0;
  m(1, 1) = 3.0;
  const Eigen::MatrixXd p = pseudo_inverse(m);
  CHECK(p.rows() == 6);
  CHECK(p.cols() == 2);
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(p.norm() == doctest::Approx(std::sqrt(0.25 + 1.0 / 9.0)));
}

TEST_CASE("pseudo-inverse satisfies the Moore-Penrose identities") {
  const auto report = oracle_pinv_axioms(1000, 7);
  INFO(report.detail);
  CHECK(report.pass);
}

TEST_CASE("2D feedback law fixtures") {
  CameraIntrinsics intr;
  Eigen::VectorXd star(8);
  star << 208, 128, 432, 128, 432, 352, 208, 352;
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(4, 0.75);
  const Eigen::MatrixXd l = stack_ibvs(star, z, intr);

  CHECK(c_ibvs(star, star, l, 0.5).norm() == doctest::Approx(0.0));

  Eigen::VectorXd s = star;
  for (int f = 0; f < 4; ++f) s(2 * f) += 10.0;
  const Twist once = c_ibvs(s, star, l, 0.5);
  const Twist twice = c_ibvs(s, star, l, 1.0);
  CHECK(twice.isApprox(2.0 * once, 1e-12));

  // Against a least-squares solve of L v = -lambda e.
  const Eigen::VectorXd e = s - star;
  const Twist lsq =
      l.colPivHouseholderQr().solve((-0.5 * e).eval());
  CHECK((once - lsq).norm() < 1e-9);
}

TEST_CASE("3D feedback law fixtures") {
  Eigen::VectorXd p(3), p_star(3);
  p << 0.0, 0.0, 0.85;
  p_star << 0.0, 0.0, 0.75;
  const Eigen::MatrixXd l = stack_l3d(p);

  CHECK(c_3dvs(p, p, l, 0.5).norm() == doctest::Approx(0.0));

  const Twist v = c_3dvs(p, p_star, l, 0.5);
  // A pure depth offset on the optical axis should correct along z.
  CHECK(v(2) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(v.head<2>().norm() < 1e-12);
  CHECK(v.tail<3>().norm() < 1e-9);

  CHECK(c_3dvs(p, p_star, l, 1.0).isApprox(2.0 * v, 1e-12));
}

TEST_CASE("pose feedback law fixtures") {
  CHECK(c_pbvs(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), 0.5).norm() ==
        doctest::Approx(0.0));

  const Twist v = c_pbvs({0.0, 0.0, -0.1}, Eigen::Vector3d::Zero(), 0.5);
  CHECK(v(2) == doctest::Approx(0.05));
  CHECK(v.tail<3>().norm() == doctest::Approx(0.0));

  // Linearity in the gain and in the error, separately.
  const Eigen::Vector3d t(0.03, -0.04, 0.05);
  const Eigen::Vector3d tu(0.2, -0.1, 0.4);
  CHECK(c_pbvs(t, tu, 1.0).isApprox(2.0 * c_pbvs(t, tu, 0.5), 1e-13));
  CHECK(c_pbvs((2.0 * t).eval(), tu, 0.5).head<3>().isApprox(
      2.0 * c_pbvs(t, tu, 0.5).head<3>(), 1e-13));
  CHECK(c_pbvs(t, (2.0 * tu).eval(), 0.5).tail<3>().isApprox(
      2.0 * c_pbvs(t, tu, 0.5).tail<3>(), 1e-13));
}

TEST_CASE("decoupled pose law equals the full matrix-inverse law") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::Vector3d axis(unit(rng), unit(rng), unit(rng));
    if (axis.norm() < 1e-9) axis = Eigen::Vector3d::UnitZ();
    axis.normalize();
    const Eigen::Vector3d tu = std::abs(unit(rng)) * (M_PI - 1e-3) * axis;
    const Eigen::Vector3d t(unit(rng), unit(rng), unit(rng));
    const Eigen::Matrix3d r = axis_angle_to_rotation(tu);

    Vector6d e;
    e << t, tu;
    const Twist full = -0.5 * (l_pbvs(r, tu).inverse() * e);
    const Twist decoupled = c_pbvs(t, tu, 0.5);
    CHECK((full - decoupled).norm() < 1e-9);
  }
}

TEST_CASE("closed-loop 2D servo error decays exponentially near the goal") {
  // True model, online depths, small initial offset: the error norm must
  // track ||e(0)|| exp(-lambda t) within 5% over the first 2/lambda seconds.
  ScenarioConfig cfg = make_scenario(VsSchemeTag::Ibvs,
                                     ControllerKind::Classical);
  cfg.lambda_s = 0.5;
  cfg.duration = 2.0 / cfg.lambda_s;
  cfg.early_stop = false;
  cfg.initial_pose = defaults::pose_from_t_theta_u_deg({0.02, -0.015, -0.77},
                                                       {1.0, -1.0, 2.0});
  const TaskResult result = run_task(cfg);
  REQUIRE(result.log.size() > 100);
  const double e0 = result.log.err_norm.front();
  for (std::size_t i = 0; i < result.log.size(); ++i) {
    const double want = e0 * std::exp(-cfg.lambda_s * result.log.t[i]);
    CHECK(std::abs(result.log.err_norm[i] - want) <= 0.05 * want + 1e-9);
  }
}
