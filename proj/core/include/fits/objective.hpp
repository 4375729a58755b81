#pragma once

#include <array>
#include <memory>

#include <Eigen/Dense>

#include "fits/trajspace.hpp"

namespace fits {

/// Reference plant state as a function of absolute time.
class Reference {
 public:
  virtual ~Reference() = default;
  virtual Eigen::VectorXd state(double t) const = 0;
};

class ConstantReference final : public Reference {
 public:
  explicit ConstantReference(Eigen::VectorXd x) : x_(std::move(x)) {}
  Eigen::VectorXd state(double) const override { return x_; }

 private:
  Eigen::VectorXd x_;
};

/// Counter-clockwise circle starting at angle `phase`; the reference velocity
/// is the circle's tangent velocity, every other coordinate is zero.
class CircleReference final : public Reference {
 public:
  CircleReference(Eigen::Vector2d center, double radius, double period, int state_dim,
                   std::array<int, 2> position_index, std::array<int, 2> velocity_index,
                   double phase = 0.0);
  Eigen::VectorXd state(double t) const override;

  const Eigen::Vector2d& center() const { return center_; }
  double radius() const { return radius_; }
  double period() const { return period_; }

 private:
  Eigen::Vector2d center_;
  double radius_;
  double period_;
  int state_dim_;
  std::array<int, 2> pos_;
  std::array<int, 2> vel_;
  double phase_;
};

/// J = integral over the plan of dx' Q dx + du' R du, with dx taken against
/// the reference at absolute time t + tau.
class QuadraticTrackingObjective {
 public:
  QuadraticTrackingObjective(Eigen::MatrixXd state_weight, Eigen::MatrixXd input_weight,
                             std::shared_ptr<const Reference> reference, Eigen::VectorXd input_ref);

  const Eigen::MatrixXd& state_weight() const { return Q_; }
  const Eigen::MatrixXd& input_weight() const { return R_; }
  const Reference& reference() const { return *reference_; }
  std::shared_ptr<const Reference> reference_ptr() const { return reference_; }
  const Eigen::VectorXd& input_ref() const { return u_ref_; }

 private:
  Eigen::MatrixXd Q_;
  Eigen::MatrixXd R_;
  std::shared_ptr<const Reference> reference_;
  Eigen::VectorXd u_ref_;
};

/// Left-Riemann quadrature on the rollout's sample grid plus the exact input
/// integral of the piecewise-constant plan.
double objective_value(const TrajectoryState& s, const SensitivityRollout& roll,
                       const QuadraticTrackingObjective& obj, double t);

/// dJ/ds, consistent with objective_value.
Eigen::RowVectorXd objective_gradient(const TrajectoryState& s, const SensitivityRollout& roll,
                                      const QuadraticTrackingObjective& obj, double t);

}  // namespace fits
