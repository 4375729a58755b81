#pragma once

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fits/constraints.hpp"
#include "fits/dynamics.hpp"
#include "fits/objective.hpp"
#include "fits/qp.hpp"

namespace fits {

/// A constraint that is negative somewhere on the initial plan.
struct ConstraintViolation {
  std::size_t index = 0;
  std::string description;
  double value = 0.0;
  /// Trajectory time of the offending sample (0 for the plant state).
  double tau = 0.0;
};

/// The initial state or plan is outside the safe set.
class InfeasibleStart : public std::runtime_error {
 public:
  explicit InfeasibleStart(std::vector<ConstraintViolation> violations);
  const std::vector<ConstraintViolation>& violations() const { return violations_; }

 private:
  std::vector<ConstraintViolation> violations_;
};

struct Goal {
  Eigen::Vector2d position;
  double tolerance = 0.1;
};

/// Plant, constraints, objective and episode settings for one benchmark.
struct Scenario {
  std::string name;
  std::shared_ptr<const DynamicsModel> model;
  std::vector<SafetyFunctionPtr> constraints;
  ActuationBounds bounds;
  std::shared_ptr<const QuadraticTrackingObjective> objective;
  Eigen::VectorXd x_init;
  /// Equilibrium input (hover thrust, zero acceleration).
  Eigen::VectorXd u_equilibrium;
  std::optional<Goal> goal;
  double t_sim = 8.0;
  /// Plant Euler step; run_episode uses control_dt / 10 when zero.
  double plant_step = 0.0;
  /// State coordinates of the planar position used for RMSE and goals.
  std::array<int, 2> position_index{0, 1};

  /// Throws std::invalid_argument on inconsistent dimensions or t_sim <= 0.
  void validate() const;
  /// Throws InfeasibleStart if x_init violates any constraint.
  void check_initial_state() const;

  Eigen::VectorXd constraint_values(const Eigen::VectorXd& x) const;
  Eigen::Vector2d position(const Eigen::VectorXd& x) const {
    return {x(position_index[0]), x(position_index[1])};
  }
};

/// Output of one controller tick.
struct ControlOutput {
  Eigen::VectorXd u;
  std::optional<qp::QPStatus> qp_status;
  /// Wall-clock controller time for the tick, seconds.
  double compute_time = 0.0;
  double objective = 0.0;
};

/// Closed-loop controller driven by run_episode. Single owner, not thread-safe.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  /// Control period in seconds.
  virtual double period() const = 0;
  /// Prepares internal state for a new episode; may throw InfeasibleStart.
  virtual void reset(const Scenario& scenario) = 0;
  virtual ControlOutput step(const Eigen::VectorXd& x, double t) = 0;
};

}  // namespace fits
