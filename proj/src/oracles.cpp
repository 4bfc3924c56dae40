#include "mppivs/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mppivs/classical.hpp"
#include "mppivs/interaction.hpp"
#include "mppivs/mppi.hpp"
#include "mppivs/scenario.hpp"
#include "mppivs/sim.hpp"
#include "mppivs/vscost.hpp"

namespace mppivs {

namespace {

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-9);
}

}  // namespace

OracleReport oracle_finite_difference(int samples, std::uint64_t seed) {
  const CameraIntrinsics intr = defaults::camera();
  const auto objects = defaults::object_square();
  const RigidTransform desired = defaults::desired_pose_centered();
  const GantryLimits limits;
  const WorkspaceBox box;

  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](double lo, double hi) { return lo + unit(rng) * (hi - lo); };

  const double dt = 1e-4;
  double worst = 0.0;
  int used = 0;
  while (used < samples) {
    RigidTransform pose;
    for (int j = 0; j < 3; ++j) {
      pose.translation(j) = draw(box.t_min(j), box.t_max(j));
    }
    Eigen::Vector3d r;
    for (int j = 0; j < 3; ++j) r(j) = draw(box.r_min(j), box.r_max(j));
    pose.rotation = axis_angle_to_rotation(r);
    World world{objects, pose, intr};
    const Observation now = ground_truth(world, intr);
    if (!now.all_visible || (now.depths.array() < 0.2).any()) continue;
    ++used;

    Twist v;
    for (int j = 0; j < 6; ++j) v(j) = draw(-0.5, 0.5);

    World fwd = world, bwd = world;
    fwd.camera_pose = integrate_twist(world.camera_pose, v, dt);
    bwd.camera_pose = integrate_twist(world.camera_pose, (-v).eval(), dt);
    const Observation plus = ground_truth(fwd, intr);
    const Observation minus = ground_truth(bwd, intr);

    // 2D point stack against the pixel finite difference.
    const Eigen::VectorXd fd2d = (plus.pixels - minus.pixels) / (2.0 * dt);
    worst = std::max(
        worst, rel_err(fd2d, stack_ibvs(now.pixels, now.depths, intr) * v));

    // 3D point stack against the camera-frame point finite difference.
    const Eigen::VectorXd fd3d = (plus.points - minus.points) / (2.0 * dt);
    worst = std::max(worst, rel_err(fd3d, stack_l3d(now.points) * v));

    // Pose-error matrix against the pose-error finite difference.
    const RigidTransform rel =
        compose(inverse(desired), world.camera_pose);
    const auto [tp, rp] = true_pose_error(fwd, desired);
    const auto [tm, rm] = true_pose_error(bwd, desired);
    Eigen::VectorXd fdp(6);
    fdp << (tp - tm) / (2.0 * dt), (rp - rm) / (2.0 * dt);
    const Eigen::Vector3d theta_u = rotation_to_axis_angle(rel.rotation);
    worst = std::max(worst,
                     rel_err(fdp, l_pbvs(rel.rotation, theta_u) * v));
  }

  OracleReport report;
  report.max_error = worst;
  report.pass = worst < 1e-3;
  std::ostringstream os;
  os << "finite-difference feature velocities vs interaction matrices, "
     << samples << " samples, max rel err " << worst;
  report.detail = os.str();
  return report;
}

OracleReport oracle_pinv_axioms(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int row_options[] = {2, 3, 6, 8, 12};
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const int rows = row_options[s % 5];
    Eigen::MatrixXd m(rows, 6);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < 6; ++j) m(i, j) = gauss(rng);
    }
    if (s % 5 == 4 && rows >= 2) m.row(1) = m.row(0);  // rank-deficient case
    if (s % 7 == 6) m.col(3).setZero();
    const Eigen::MatrixXd p = pseudo_inverse(m);
    const double scale_m = std::max(m.norm(), 1e-12);
    const double scale_p = std::max(p.norm(), 1e-12);
    worst = std::max(worst, (m * p * m - m).norm() / scale_m);
    worst = std::max(worst, (p * m * p - p).norm() / scale_p);
    worst = std::max(worst,
                     ((m * p).transpose() - m * p).norm() / std::max((m * p).norm(), 1e-12));
    worst = std::max(worst,
                     ((p * m).transpose() - p * m).norm() / std::max((p * m).norm(), 1e-12));
  }
  OracleReport report;
  report.max_error = worst;
  report.pass = worst < 1e-9;
  std::ostringstream os;
  os << "Moore-Penrose identities over " << samples
     << " random matrices, max residual " << worst;
  report.detail = os.str();
  return report;
}

OracleReport oracle_mppi_toy() {
  MppiConfig cfg;
  cfg.samples = 64;
  cfg.horizon_steps = 15;
  cfg.dt = 0.1;
  cfg.lambda = 1.0;
  cfg.nu = 1000.0;
  cfg.sigma_u = Eigen::VectorXd::Constant(1, 0.25);
  cfg.seed = 42;
  MppiEngine<ToyIntegrator> engine(ToyIntegrator{}, cfg);

  double x = 1.0;
  int reached = -1;
  double best = std::abs(x);
  for (int step = 0; step < 100; ++step) {
    const auto u = engine.step(x);
    x += u(0) * cfg.dt;
    best = std::min(best, std::abs(x));
    if (std::abs(x) < 1e-2) {
      reached = step;
      break;
    }
  }

  OracleReport report;
  report.max_error = best;
  report.pass = reached >= 0;
  std::ostringstream os;
  if (reached >= 0) {
    os << "toy 1D integrator reached |x| < 1e-2 after " << reached + 1
       << " steps";
  } else {
    os << "toy 1D integrator failed to reach |x| < 1e-2 (best " << best << ")";
  }
  report.detail = os.str();
  return report;
}

OracleReport oracle_depth_integration() {
  const CameraIntrinsics intr = defaults::camera();
  VsModel::Params p;
  p.scheme = {VsSchemeTag::Ibvs, IbvsCase::Case0};
  p.intrinsics = intr;
  p.s_star = Eigen::VectorXd::Zero(2);
  p.z_star = Eigen::VectorXd::Constant(1, 0.75);
  p.q_diag = Eigen::VectorXd::Constant(2, 1.0);
  p.constraints.pixel_box = false;
  const VsModel model(p);

  VsState state;
  state.s.resize(2);
  state.s << 410.0, 130.0;  // arbitrary off-center pixel
  state.aux = Eigen::VectorXd::Constant(1, 1.0);

  Twist v = Twist::Zero();
  v(2) = 0.05;
  const double dt = 0.02;
  double worst = 0.0;
  for (int k = 1; k <= 500; ++k) {
    if (!model.step(state, v, dt)) break;
    const double expected = 1.0 - v(2) * dt * k;
    worst = std::max(worst, std::abs(state.aux(0) - expected));
  }
  OracleReport report;
  report.max_error = worst;
  report.pass = worst < 1e-12;
  std::ostringstream os;
  os << "depth companion vs closed form over 500 steps, max |error| " << worst;
  report.detail = os.str();
  return report;
}

OracleReport oracle_rotation_round_trip(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::Vector3d axis(unit(rng), unit(rng), unit(rng));
    if (axis.norm() < 1e-6) axis = Eigen::Vector3d::UnitX();
    axis.normalize();
    // Angles spread over (0, pi), including near the boundaries.
    const double angle =
        (s % 10 == 0) ? 1e-7 + 1e-3 * std::abs(unit(rng))
                      : (s % 10 == 1) ? M_PI - 1e-3 * std::abs(unit(rng))
                                      : std::abs(unit(rng)) * (M_PI - 1e-9);
    const Eigen::Vector3d theta_u = angle * axis;
    const Eigen::Vector3d back =
        rotation_to_axis_angle(axis_angle_to_rotation(theta_u));
    worst = std::max(worst, (back - theta_u).norm());
  }
  OracleReport report;
  report.max_error = worst;
  report.pass = worst < 1e-9;
  std::ostringstream os;
  os << "rotation log/exp round trip over " << samples
     << " rotations, max |error| " << worst;
  report.detail = os.str();
  return report;
}

}  // namespace mppivs
