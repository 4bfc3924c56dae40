#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "mppivs/geometry.hpp"

namespace mppivs {

/// Cost assigned to rollouts that diverge numerically. Larger than any
/// reachable legitimate cost-to-go, so after baseline subtraction such
/// samples get weight exactly zero.
inline constexpr double kRolloutCostSentinel = 1e18;

/// Sampler and update-law parameters. `sigma_u` holds the per-channel
/// perturbation variances; the control weight defaults to lambda/(2 sigma^2)
/// per channel when `r_diag` is left empty.
struct MppiConfig {
  int samples = 500;        // K
  int horizon_steps = 175;  // T
  double dt = 0.02;
  double lambda = 100.0;  // inverse temperature of the trajectory weighting
  double nu = 1000.0;     // exploration noise scaling in the control cost
  Eigen::VectorXd sigma_u;
  Eigen::VectorXd r_diag;            // empty: derived from lambda and sigma_u
  Eigen::VectorXd v_min, v_max;      // empty: unbounded
  std::uint64_t seed = 0;
  int threads = 1;

  Eigen::VectorXd control_weight() const {
    if (r_diag.size() > 0) return r_diag;
    return 0.5 * lambda * sigma_u.cwiseInverse();
  }
  bool bounded() const { return v_min.size() > 0 && v_max.size() > 0; }

  void validate(Eigen::Index control_dim) const {
    if (samples < 1) throw ConfigError("mppi.samples must be >= 1");
    if (horizon_steps < 1) throw ConfigError("mppi.horizon_steps must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("mppi.dt must be > 0");
    if (!(lambda > 0.0)) throw ConfigError("mppi.lambda must be > 0");
    if (!(nu > 0.0)) throw ConfigError("mppi.nu must be > 0");
    if (sigma_u.size() != control_dim)
      throw ConfigError("mppi.sigma_u has the wrong length");
    if ((sigma_u.array() < 0.0).any())
      throw ConfigError("mppi.sigma_u must be nonnegative");
    if (r_diag.size() != 0 && r_diag.size() != control_dim)
      throw ConfigError("mppi.r_diag has the wrong length");
    if (v_min.size() != v_max.size())
      throw ConfigError("mppi.v_min and mppi.v_max must be set together");
    if (bounded()) {
      if (v_min.size() != control_dim)
        throw ConfigError("mppi.v_min has the wrong length");
      if (((v_max - v_min).array() <= 0.0).any())
        throw ConfigError("mppi.v_min must be < mppi.v_max elementwise");
    }
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream seed for one (controller step, sample) pair. Sample streams are
/// independent of how rollouts are partitioned across threads.
inline std::uint64_t sample_stream_seed(std::uint64_t seed, int step,
                                        int sample) {
  return splitmix64(splitmix64(seed ^ (0x9E3779B97F4A7C15ULL *
                                       (static_cast<std::uint64_t>(step) + 1))) +
                    static_cast<std::uint64_t>(sample));
}

/// Fills column `sample` of `noise` (layout: horizon-major, control_dim
/// entries per step) with draws from N(0, diag(sigma_u)).
inline void fill_sample_perturbations(const MppiConfig& cfg,
                                      Eigen::Index control_dim, int step,
                                      int sample, Eigen::MatrixXd& noise) {
  std::mt19937_64 rng(sample_stream_seed(cfg.seed, step, sample));
  std::normal_distribution<double> gauss(0.0, 1.0);
  double* col = noise.col(sample).data();
  for (int t = 0; t < cfg.horizon_steps; ++t) {
    for (Eigen::Index j = 0; j < control_dim; ++j) {
      const double sd = std::sqrt(cfg.sigma_u(j));
      col[t * control_dim + j] = sd == 0.0 ? 0.0 : sd * gauss(rng);
    }
  }
}

/// K columns of i.i.d. perturbation draws, deterministic in (seed, step).
inline Eigen::MatrixXd sample_perturbations(const MppiConfig& cfg,
                                            Eigen::Index control_dim,
                                            int step) {
  Eigen::MatrixXd noise(cfg.horizon_steps * control_dim, cfg.samples);
  for (int k = 0; k < cfg.samples; ++k) {
    fill_sample_perturbations(cfg, control_dim, step, k, noise);
  }
  return noise;
}

template <typename DerivedV, typename DerivedLo, typename DerivedHi>
typename DerivedV::PlainObject clamp_control(
    const Eigen::MatrixBase<DerivedV>& v,
    const Eigen::MatrixBase<DerivedLo>& v_min,
    const Eigen::MatrixBase<DerivedHi>& v_max) {
  return v.cwiseMax(v_min.derived()).cwiseMin(v_max.derived());
}

/// Quadratic control term of the running cost:
/// (1 - 1/nu)/2 du'R du + u'R du + u'R u / 2, with diagonal R.
template <typename DerivedU, typename DerivedDu>
double control_cost(const Eigen::MatrixBase<DerivedU>& u,
                    const Eigen::MatrixBase<DerivedDu>& du,
                    const Eigen::VectorXd& r_diag, double nu) {
  const double a = 0.5 * (1.0 - 1.0 / nu);
  double c = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const double r = r_diag(j);
    c += a * r * du(j) * du(j) + r * u(j) * du(j) + 0.5 * r * u(j) * u(j);
  }
  return c;
}

/// Cost-to-go of one perturbed rollout. `du_col` points at the sample's
/// horizon-major perturbation block. The dynamics see the clamped input
/// g(u + du); the control cost sees the raw (u, du) pair. A dynamics step
/// reporting divergence, or a non-finite total, yields the sentinel cost.
template <class Model>
double rollout(const Model& model, const typename Model::State& start,
               typename Model::State& scratch, const Eigen::MatrixXd& u_seq,
               const double* du_col, const MppiConfig& cfg,
               const Eigen::VectorXd& r_diag) {
  constexpr int m = Model::kControlDim;
  using Control = Eigen::Matrix<double, m, 1>;
  scratch = start;
  double cost = 0.0;
  for (int t = 0; t < cfg.horizon_steps; ++t) {
    const Control u = u_seq.row(t).transpose();
    const Eigen::Map<const Control> du(du_col + t * m);
    cost += model.running_cost(scratch) + control_cost(u, du, r_diag, cfg.nu);
    Control v = u + du;
    if (cfg.bounded()) {
      v = clamp_control(v, cfg.v_min.head<m>(), cfg.v_max.head<m>());
    }
    if (!model.step(scratch, v, cfg.dt)) return kRolloutCostSentinel;
  }
  cost += model.terminal_cost(scratch);
  if (!std::isfinite(cost)) return kRolloutCostSentinel;
  return cost;
}

/// Importance-weighted update of the nominal sequence: each u_t moves by the
/// exponentially cost-weighted average of the sampled perturbations. The best
/// sample's cost is subtracted first, which makes the update invariant to
/// shifting all costs by a constant and keeps the weights well-scaled.
inline void update_controls(Eigen::MatrixXd& u_seq,
                            const std::vector<double>& costs,
                            const Eigen::MatrixXd& noise, double lambda) {
  const Eigen::Index m = u_seq.cols();
  const int horizon = static_cast<int>(u_seq.rows());
  const int k_count = static_cast<int>(costs.size());
  double baseline = std::numeric_limits<double>::infinity();
  for (double c : costs) baseline = std::min(baseline, c);
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(horizon, m);
  double total_weight = 0.0;
  for (int k = 0; k < k_count; ++k) {
    const double w = std::exp(-(costs[k] - baseline) / lambda);
    total_weight += w;
    const double* col = noise.col(k).data();
    for (int t = 0; t < horizon; ++t) {
      for (Eigen::Index j = 0; j < m; ++j) {
        delta(t, j) += w * col[t * m + j];
      }
    }
  }
  u_seq += delta / total_weight;
}

/// Warm start: slide the sequence down one step; the freed tail slot repeats
/// the previous last control.
inline void shift_sequence(Eigen::MatrixXd& u_seq) {
  const auto horizon = u_seq.rows();
  for (Eigen::Index t = 0; t + 1 < horizon; ++t) {
    u_seq.row(t) = u_seq.row(t + 1);
  }
}

/// One full controller cycle over a model satisfying:
///   using State; static constexpr int kControlDim;
///   bool step(State&, const Eigen::Matrix<double, kControlDim, 1>&, double) const;
///   double running_cost(const State&) const;
///   double terminal_cost(const State&) const;
/// Rollouts are pure in (start state, nominal sequence, per-sample noise), so
/// they may be evaluated on any number of threads with identical results; the
/// weighted update runs serially in sample-index order.
template <class Model>
class MppiEngine {
 public:
  static constexpr int kControlDim = Model::kControlDim;
  using Control = Eigen::Matrix<double, kControlDim, 1>;

  MppiEngine(Model model, MppiConfig cfg)
      : model_(std::move(model)), cfg_(std::move(cfg)) {
    cfg_.validate(kControlDim);
    r_diag_ = cfg_.control_weight();
    u_seq_ = Eigen::MatrixXd::Zero(cfg_.horizon_steps, kControlDim);
    noise_.resize(cfg_.horizon_steps * kControlDim, cfg_.samples);
    costs_.resize(cfg_.samples);
  }

  /// Samples, rolls out, reweights and warm-starts; returns the clamped first
  /// control of the updated sequence.
  Control step(const typename Model::State& state) {
    const int k_count = cfg_.samples;
    auto evaluate = [&](int k, typename Model::State& scratch) {
      fill_sample_perturbations(cfg_, kControlDim, step_count_, k, noise_);
      costs_[k] =
          rollout(model_, state, scratch, u_seq_, noise_.col(k).data(), cfg_,
                  r_diag_);
    };
    const int workers = std::min(cfg_.threads, k_count);
    if (workers <= 1) {
      typename Model::State scratch = state;
      for (int k = 0; k < k_count; ++k) evaluate(k, scratch);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          typename Model::State scratch = state;
          for (int k = w; k < k_count; k += workers) evaluate(k, scratch);
        });
      }
      for (auto& th : pool) th.join();
    }
    update_controls(u_seq_, costs_, noise_, cfg_.lambda);
    Control first = u_seq_.row(0).transpose();
    if (cfg_.bounded()) {
      first = clamp_control(first, cfg_.v_min.head<kControlDim>(),
                            cfg_.v_max.head<kControlDim>());
    }
    shift_sequence(u_seq_);
    ++step_count_;
    return first;
  }

  const Eigen::MatrixXd& nominal_sequence() const { return u_seq_; }
  const std::vector<double>& last_costs() const { return costs_; }
  const MppiConfig& config() const { return cfg_; }
  const Model& model() const { return model_; }
  Model& model() { return model_; }

  void reset() {
    u_seq_.setZero();
    step_count_ = 0;
  }

 private:
  Model model_;
  MppiConfig cfg_;
  Eigen::VectorXd r_diag_;
  Eigen::MatrixXd u_seq_;   // horizon x control_dim
  Eigen::MatrixXd noise_;   // (horizon * control_dim) x samples
  std::vector<double> costs_;
  int step_count_ = 0;
};

}  // namespace mppivs
