#pragma once

#include <memory>
#include <string>

#include <Eigen/Dense>

namespace fits {

/// Continuous-time plant dx/dt = F(x, u) with analytic Jacobians.
///
/// Implementations are immutable after construction, so every method may be
/// called concurrently.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual std::string name() const = 0;

  virtual Eigen::VectorXd eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;
  /// dF/dx, n_x by n_x.
  virtual Eigen::MatrixXd jac_x(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;
  /// dF/du, n_x by n_u.
  virtual Eigen::MatrixXd jac_u(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;
};

struct ModelJacobians {
  Eigen::MatrixXd dx;
  Eigen::MatrixXd du;
};

ModelJacobians model_jacobians(const DynamicsModel& model, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u);

struct PlanarQuadrotorParams {
  double mass = 0.027;        // kg
  double arm = 0.0397;        // m
  double inertia_yy = 1.4e-5; // kg m^2
  double gravity = 9.8;       // m/s^2

  /// Throws std::invalid_argument unless every field is strictly positive.
  void validate() const;
  /// Per-motor thrust that balances gravity.
  double hover_thrust() const { return 0.5 * mass * gravity; }
};

/// Planar quadrotor. State [p_x, p_z, theta, v_x, v_z, omega], input [F1, F2].
/// theta = 0 is upright; positive theta tilts the thrust towards +x.
class PlanarQuadrotor final : public DynamicsModel {
 public:
  explicit PlanarQuadrotor(PlanarQuadrotorParams params = {});

  int state_dim() const override { return 6; }
  int input_dim() const override { return 2; }
  std::string name() const override { return "planar_quadrotor"; }

  Eigen::VectorXd eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  Eigen::MatrixXd jac_x(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  Eigen::MatrixXd jac_u(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;

  const PlanarQuadrotorParams& params() const { return params_; }

 private:
  PlanarQuadrotorParams params_;
};

/// Unit-mass planar double integrator. State [p_x, p_y, v_x, v_y], input [a_x, a_y].
class DoubleIntegrator final : public DynamicsModel {
 public:
  int state_dim() const override { return 4; }
  int input_dim() const override { return 2; }
  std::string name() const override { return "double_integrator"; }

  Eigen::VectorXd eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  Eigen::MatrixXd jac_x(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  Eigen::MatrixXd jac_u(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
};

}  // namespace fits
