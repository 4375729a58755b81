#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fits/dynamics.hpp"

namespace fits {

/// Raised when a rollout produces a non-finite state.
class NonFiniteState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite trajectory-space state s = [x0, u_0, ..., u_{N-1}].
///
/// Input u_i is held on trajectory time [i * dtau, (i + 1) * dtau); the last
/// input is also held at tau = T.
class TrajectoryState {
 public:
  TrajectoryState(Eigen::VectorXd x0, std::vector<Eigen::VectorXd> inputs, double horizon);

  static TrajectoryState from_flat(const Eigen::VectorXd& flat, int state_dim, int input_dim,
                                   int num_steps, double horizon);

  const Eigen::VectorXd& x0() const { return x0_; }
  void set_x0(const Eigen::VectorXd& x0);
  const std::vector<Eigen::VectorXd>& inputs() const { return inputs_; }
  const Eigen::VectorXd& input(int i) const { return inputs_[static_cast<std::size_t>(i)]; }
  Eigen::VectorXd& input(int i) { return inputs_[static_cast<std::size_t>(i)]; }

  int state_dim() const { return static_cast<int>(x0_.size()); }
  int input_dim() const { return static_cast<int>(inputs_.front().size()); }
  int num_steps() const { return static_cast<int>(inputs_.size()); }
  int flat_dim() const { return state_dim() + num_steps() * input_dim(); }
  /// Dimension of the virtual input v (all input blocks).
  int input_block_dim() const { return num_steps() * input_dim(); }
  double horizon() const { return horizon_; }
  double dtau() const { return dtau_; }

  /// Index of the input held at trajectory time tau.
  int active_input(double tau) const;

  Eigen::VectorXd flatten() const;
  /// Concatenated inputs [u_0; ...; u_{N-1}].
  Eigen::VectorXd flat_inputs() const;

 private:
  Eigen::VectorXd x0_;
  std::vector<Eigen::VectorXd> inputs_;
  double horizon_;
  double dtau_;
};

/// Constraint sample times on [0, T] and the Euler substeps between them.
struct SampleGrid {
  std::vector<double> times;
  int substeps_per_sample = 1;

  /// M equally spaced samples including both endpoints. M == 1 yields the
  /// single sample tau = 0.
  static SampleGrid uniform(double horizon, int num_samples, int substeps_per_sample);
  /// M samples at tau_j = (j + 1) T / M; tau = 0 is excluded.
  static SampleGrid aligned(double horizon, int num_samples, int substeps_per_sample);
  /// Substep count that makes the Euler step closest to dtau / 2 for a given
  /// sample spacing.
  static int default_substeps(double spacing, double dtau);

  int size() const { return static_cast<int>(times.size()); }
  void validate(double horizon) const;
};

struct SensitivityRollout {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  /// d phi_j / d s, each n_x by (n_x + N n_u).
  std::vector<Eigen::MatrixXd> jacobians;
};

/// Euler rollout of the plan with forward sensitivities. Inputs are sampled
/// at the start of every Euler step.
SensitivityRollout rollout_with_sensitivity(const TrajectoryState& s, const DynamicsModel& model,
                                            const SampleGrid& grid);

/// Control-affine trajectory-space dynamics ds/dt = f_s(s) + g_s v.
struct TrajectoryDynamics {
  /// f_s: [F(x0, u0); 0].
  Eigen::VectorXd drift;
  int state_dim = 0;

  int input_block_dim() const { return static_cast<int>(drift.size()) - state_dim; }
  /// g_s v = [0; v].
  Eigen::VectorXd apply_input_map(const Eigen::VectorXd& v) const;
  Eigen::VectorXd rate(const Eigen::VectorXd& v) const { return drift + apply_input_map(v); }
};

TrajectoryDynamics trajectory_drift(const TrajectoryState& s, const DynamicsModel& model);

/// u_i <- u_i + v_i dt; x0 is left to the plant.
TrajectoryState zoh_update(const TrajectoryState& s, const Eigen::VectorXd& v, double dt);

/// Drops the first `steps` inputs and repeats the last one at the tail.
TrajectoryState shift_horizon(const TrajectoryState& s, int steps);

}  // namespace fits
