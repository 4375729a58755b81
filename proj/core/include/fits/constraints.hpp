#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fits/trajspace.hpp"

namespace fits {

/// Scalar constraint h(x) >= 0 over plant states.
class SafetyFunction {
 public:
  virtual ~SafetyFunction() = default;
  virtual int state_dim() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::RowVectorXd grad(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const = 0;
  virtual std::string describe() const = 0;
};

/// h(x) = a'x - b.
class HalfspaceConstraint final : public SafetyFunction {
 public:
  HalfspaceConstraint(Eigen::VectorXd a, double b);

  int state_dim() const override { return static_cast<int>(a_.size()); }
  double value(const Eigen::VectorXd& x) const override { return a_.dot(x) - b_; }
  Eigen::RowVectorXd grad(const Eigen::VectorXd&) const override { return a_.transpose(); }
  Eigen::MatrixXd hessian(const Eigen::VectorXd&) const override;
  std::string describe() const override;

  const Eigen::VectorXd& normal() const { return a_; }
  double offset() const { return b_; }

 private:
  Eigen::VectorXd a_;
  double b_;
};

/// h(x) = |p - center| - radius with p taken from two state coordinates.
///
/// At the center the gradient direction is undefined; the first position axis
/// is returned there.
class CircleConstraint final : public SafetyFunction {
 public:
  CircleConstraint(Eigen::Vector2d center, double radius, std::array<int, 2> position_index,
                   int state_dim);

  int state_dim() const override { return state_dim_; }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::RowVectorXd grad(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override;
  std::string describe() const override;

  const Eigen::Vector2d& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  Eigen::Vector2d offset(const Eigen::VectorXd& x) const;

  Eigen::Vector2d center_;
  double radius_;
  std::array<int, 2> index_;
  int state_dim_;
};

using SafetyFunctionPtr = std::shared_ptr<const SafetyFunction>;

/// alpha(h) = gain * h.
class LinearClassKappa {
 public:
  explicit LinearClassKappa(double gain);
  double operator()(double h) const { return gain_ * h; }
  double gain() const { return gain_; }

 private:
  double gain_;
};

struct ActuationBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  void validate() const;
  int size() const { return static_cast<int>(lower.size()); }
  Eigen::VectorXd clip(const Eigen::VectorXd& u) const;
  bool contains(const Eigen::VectorXd& u, double tol = 0.0) const;
};

/// coeffs * v >= lower_bound.
struct InequalityRow {
  Eigen::RowVectorXd coeffs;
  double lower_bound = 0.0;
};

/// CBF row on h(phi_j) in trajectory space. `jacobian` is d phi_j / d s.
InequalityRow safety_row(const SafetyFunction& h, const Eigen::VectorXd& state,
                         const Eigen::MatrixXd& jacobian, const TrajectoryDynamics& dyn,
                         const LinearClassKappa& kappa, double margin = 0.0);

/// Lower- and upper-bound rows for every planned input coordinate, ordered
/// (min_0, max_0, min_1, max_1, ...).
std::vector<InequalityRow> actuation_rows(const TrajectoryState& s, const ActuationBounds& bounds,
                                          const LinearClassKappa& kappa);

struct KappaRateCheck {
  bool pass = true;
  double bound = 0.0;  // 1 / (safety_factor * dt)
  std::string message;
};

/// Sampled-data sanity check on the class-kappa gain: gain <= 1 / (rho dt).
KappaRateCheck kappa_rate_check(const LinearClassKappa& kappa, double dt, double safety_factor);

}  // namespace fits
