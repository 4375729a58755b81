#include "fits/trajspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fits {

TrajectoryState::TrajectoryState(Eigen::VectorXd x0, std::vector<Eigen::VectorXd> inputs,
                                 double horizon)
    : x0_(std::move(x0)), inputs_(std::move(inputs)), horizon_(horizon) {
  if (inputs_.empty()) throw std::invalid_argument("trajectory needs at least one input step");
  if (x0_.size() == 0) throw std::invalid_argument("trajectory state dimension must be positive");
  if (!(horizon_ > 0.0)) throw std::invalid_argument("trajectory horizon must be positive");
  const auto nu = inputs_.front().size();
  if (nu == 0) throw std::invalid_argument("input dimension must be positive");
  for (const auto& u : inputs_) {
    if (u.size() != nu) throw std::invalid_argument("inconsistent input dimensions in trajectory");
  }
  dtau_ = horizon_ / static_cast<double>(inputs_.size());
}

TrajectoryState TrajectoryState::from_flat(const Eigen::VectorXd& flat, int state_dim,
                                           int input_dim, int num_steps, double horizon) {
  if (flat.size() != state_dim + num_steps * input_dim) {
    throw std::invalid_argument("flat trajectory state has wrong length");
  }
  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(static_cast<std::size_t>(num_steps));
  for (int i = 0; i < num_steps; ++i) {
    inputs.emplace_back(flat.segment(state_dim + i * input_dim, input_dim));
  }
  return TrajectoryState(flat.head(state_dim), std::move(inputs), horizon);
}

void TrajectoryState::set_x0(const Eigen::VectorXd& x0) {
  if (x0.size() != x0_.size()) throw std::invalid_argument("x0 dimension mismatch");
  x0_ = x0;
}

int TrajectoryState::active_input(double tau) const {
  // The small offset keeps tau = i * dtau (up to rounding) on input i.
  const double k = std::floor(tau / dtau_ + 1e-9);
  return std::clamp(static_cast<int>(k), 0, num_steps() - 1);
}

Eigen::VectorXd TrajectoryState::flatten() const {
  Eigen::VectorXd flat(flat_dim());
  flat.head(state_dim()) = x0_;
  flat.tail(input_block_dim()) = flat_inputs();
  return flat;
}

Eigen::VectorXd TrajectoryState::flat_inputs() const {
  const int nu = input_dim();
  Eigen::VectorXd out(input_block_dim());
  for (int i = 0; i < num_steps(); ++i) out.segment(i * nu, nu) = input(i);
  return out;
}

SampleGrid SampleGrid::uniform(double horizon, int num_samples, int substeps_per_sample) {
  if (num_samples < 1) throw std::invalid_argument("sample grid needs at least one sample");
  if (substeps_per_sample < 1) throw std::invalid_argument("substeps per sample must be >= 1");
  SampleGrid grid;
  grid.substeps_per_sample = substeps_per_sample;
  grid.times.resize(static_cast<std::size_t>(num_samples));
  grid.times[0] = 0.0;
  for (int j = 1; j < num_samples; ++j) {
    grid.times[static_cast<std::size_t>(j)] = horizon * j / (num_samples - 1);
  }
  if (num_samples > 1) grid.times.back() = horizon;
  return grid;
}

SampleGrid SampleGrid::aligned(double horizon, int num_samples, int substeps_per_sample) {
  if (num_samples < 1) throw std::invalid_argument("sample grid needs at least one sample");
  if (substeps_per_sample < 1) throw std::invalid_argument("substeps per sample must be >= 1");
  SampleGrid grid;
  grid.substeps_per_sample = substeps_per_sample;
  grid.times.resize(static_cast<std::size_t>(num_samples));
  for (int j = 0; j < num_samples; ++j) {
    grid.times[static_cast<std::size_t>(j)] = horizon * (j + 1) / num_samples;
  }
  grid.times.back() = horizon;
  return grid;
}

int SampleGrid::default_substeps(double spacing, double dtau) {
  if (!(spacing > 0.0)) return 1;
  return std::max(1, static_cast<int>(std::lround(spacing / (0.5 * dtau))));
}

void SampleGrid::validate(double horizon) const {
  if (times.empty()) throw std::invalid_argument("sample grid is empty");
  if (substeps_per_sample < 1) throw std::invalid_argument("substeps per sample must be >= 1");
  if (times.front() < 0.0) throw std::invalid_argument("sample grid times must be >= 0");
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) {
      throw std::invalid_argument("sample grid times must be strictly increasing");
    }
  }
  if (times.size() > 1 && std::abs(times.back() - horizon) > 1e-12) {
    throw std::invalid_argument("sample grid must end at the horizon");
  }
}

SensitivityRollout rollout_with_sensitivity(const TrajectoryState& s, const DynamicsModel& model,
                                            const SampleGrid& grid) {
  grid.validate(s.horizon());
  const int nx = s.state_dim();
  const int nu = s.input_dim();
  if (nx != model.state_dim() || nu != model.input_dim()) {
    throw std::invalid_argument("trajectory dimensions do not match the model");
  }

  SensitivityRollout out;
  out.times = grid.times;
  out.states.reserve(grid.times.size());
  out.jacobians.reserve(grid.times.size());

  Eigen::VectorXd x = s.x0();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nx, s.flat_dim());
  J.leftCols(nx).setIdentity();

  double t0 = 0.0;
  for (std::size_t j = 0; j < grid.times.size(); ++j) {
    const double h = (grid.times[j] - t0) / grid.substeps_per_sample;
    if (grid.times[j] == 0.0) {
      out.states.push_back(x);
      out.jacobians.push_back(J);
      continue;
    }
    for (int k = 0; k < grid.substeps_per_sample; ++k) {
      const int i = s.active_input(t0 + k * h);
      const Eigen::VectorXd& u = s.input(i);
      const Eigen::VectorXd dx = model.eval(x, u);
      const Eigen::MatrixXd Fx = model.jac_x(x, u);
      const Eigen::MatrixXd Fu = model.jac_u(x, u);
      J += h * (Fx * J);
      J.middleCols(nx + i * nu, nu) += h * Fu;
      x += h * dx;
      if (!x.allFinite()) {
        throw NonFiniteState("rollout diverged at tau = " + std::to_string(t0 + (k + 1) * h));
      }
    }
    out.states.push_back(x);
    out.jacobians.push_back(J);
    t0 = grid.times[j];
  }
  return out;
}

Eigen::VectorXd TrajectoryDynamics::apply_input_map(const Eigen::VectorXd& v) const {
  if (v.size() != input_block_dim()) throw std::invalid_argument("virtual input has wrong length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(drift.size());
  out.tail(v.size()) = v;
  return out;
}

TrajectoryDynamics trajectory_drift(const TrajectoryState& s, const DynamicsModel& model) {
  TrajectoryDynamics dyn;
  dyn.state_dim = s.state_dim();
  dyn.drift = Eigen::VectorXd::Zero(s.flat_dim());
  dyn.drift.head(s.state_dim()) = model.eval(s.x0(), s.input(0));
  return dyn;
}

TrajectoryState zoh_update(const TrajectoryState& s, const Eigen::VectorXd& v, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("zoh_update requires dt > 0");
  if (v.size() != s.input_block_dim()) throw std::invalid_argument("virtual input has wrong length");
  TrajectoryState next = s;
  const int nu = s.input_dim();
  for (int i = 0; i < s.num_steps(); ++i) next.input(i) += dt * v.segment(i * nu, nu);
  return next;
}

TrajectoryState shift_horizon(const TrajectoryState& s, int steps) {
  if (steps < 0 || steps > s.num_steps()) throw std::invalid_argument("shift out of range");
  if (steps == 0) return s;
  const int n = s.num_steps();
  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) inputs.push_back(s.input(std::min(i + steps, n - 1)));
  return TrajectoryState(s.x0(), std::move(inputs), s.horizon());
}

}  // namespace fits
