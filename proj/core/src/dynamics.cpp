#include "fits/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace fits {

ModelJacobians model_jacobians(const DynamicsModel& model, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) {
  return {model.jac_x(x, u), model.jac_u(x, u)};
}

void PlanarQuadrotorParams::validate() const {
  if (!(mass > 0.0) || !(arm > 0.0) || !(inertia_yy > 0.0) || !(gravity > 0.0)) {
    throw std::invalid_argument("planar quadrotor parameters must be strictly positive");
  }
}

PlanarQuadrotor::PlanarQuadrotor(PlanarQuadrotorParams params) : params_(params) {
  params_.validate();
}

Eigen::VectorXd PlanarQuadrotor::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  const double theta = x(2);
  const double thrust = u(0) + u(1);
  Eigen::VectorXd dx(6);
  dx << x(3), x(4), x(5),
      std::sin(theta) * thrust / params_.mass,
      std::cos(theta) * thrust / params_.mass - params_.gravity,
      params_.arm * (u(1) - u(0)) / params_.inertia_yy;
  return dx;
}

Eigen::MatrixXd PlanarQuadrotor::jac_x(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  const double theta = x(2);
  const double thrust = u(0) + u(1);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(6, 6);
  J(0, 3) = 1.0;
  J(1, 4) = 1.0;
  J(2, 5) = 1.0;
  J(3, 2) = std::cos(theta) * thrust / params_.mass;
  J(4, 2) = -std::sin(theta) * thrust / params_.mass;
  return J;
}

Eigen::MatrixXd PlanarQuadrotor::jac_u(const Eigen::VectorXd& x, const Eigen::VectorXd&) const {
  const double theta = x(2);
  const double s = std::sin(theta) / params_.mass;
  const double c = std::cos(theta) / params_.mass;
  const double torque = params_.arm / params_.inertia_yy;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(6, 2);
  J(3, 0) = s;
  J(3, 1) = s;
  J(4, 0) = c;
  J(4, 1) = c;
  J(5, 0) = -torque;
  J(5, 1) = torque;
  return J;
}

Eigen::VectorXd DoubleIntegrator::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  Eigen::VectorXd dx(4);
  dx << x(2), x(3), u(0), u(1);
  return dx;
}

Eigen::MatrixXd DoubleIntegrator::jac_x(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4, 4);
  J(0, 2) = 1.0;
  J(1, 3) = 1.0;
  return J;
}

Eigen::MatrixXd DoubleIntegrator::jac_u(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4, 2);
  J(2, 0) = 1.0;
  J(3, 1) = 1.0;
  return J;
}

}  // namespace fits
