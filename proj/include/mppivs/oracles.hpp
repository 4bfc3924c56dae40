#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace mppivs {

/// Independent check suites that validate the core numerics against
/// implementation-free references (finite differences, algebraic identities,
/// closed-form integrals, a toy control problem). They share no code with the
/// paths they check beyond the public interfaces under test.
struct OracleReport {
  bool pass = false;
  double max_error = 0.0;
  std::string detail;
};

/// Central finite differences of the simulated feature motion vs. the
/// interaction matrices (2D stack, 3D stack, pose error), over seeded random
/// (pose, twist) pairs at dt = 1e-4; passes below 1e-3 relative error.
OracleReport oracle_finite_difference(int samples = 1000,
                                      std::uint64_t seed = 12345);

/// Four Moore-Penrose identities on seeded random (including rank-deficient)
/// matrices; passes below 1e-9 relative residual.
OracleReport oracle_pinv_axioms(int samples = 1000, std::uint64_t seed = 7);

/// Seeded sampling controller on a 1D integrator with quadratic cost must
/// reach |x| < 1e-2 within 100 steps.
OracleReport oracle_mppi_toy();

/// Depth companion under pure optical-axis translation integrates the linear
/// closed form exactly (1e-12 per-step accumulation).
OracleReport oracle_depth_integration();

/// Rotation log/exp round trip on seeded rotations; passes below 1e-9.
OracleReport oracle_rotation_round_trip(int samples = 1000,
                                        std::uint64_t seed = 3);

/// 1D single integrator with quadratic state cost; the toy problem used by
/// the sampling-controller oracle and regression tests.
struct ToyIntegrator {
  using State = double;
  static constexpr int kControlDim = 1;

  bool step(State& x, const Eigen::Matrix<double, 1, 1>& u, double dt) const {
    x += u(0) * dt;
    return true;
  }
  double running_cost(const State& x) const { return x * x; }
  double terminal_cost(const State&) const { return 0.0; }
};

}  // namespace mppivs
