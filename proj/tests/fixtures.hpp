#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "fits/constraints.hpp"
#include "fits/dynamics.hpp"
#include "fits/objective.hpp"
#include "fits/scenario.hpp"

namespace fixture {

inline fits::ActuationBounds box(int n, double lo, double hi) {
  return {Eigen::VectorXd::Constant(n, lo), Eigen::VectorXd::Constant(n, hi)};
}

/// Double integrator with the given constraints, |u| <= 1, tracking a fixed
/// target state.
inline fits::Scenario double_integrator(std::vector<fits::SafetyFunctionPtr> constraints,
                                        Eigen::Vector4d x_init,
                                        Eigen::Vector4d target = Eigen::Vector4d::Zero(),
                                        double state_weight = 1.0, double input_weight = 0.01) {
  fits::Scenario sc;
  sc.name = "test_double_integrator";
  sc.model = std::make_shared<fits::DoubleIntegrator>();
  sc.constraints = std::move(constraints);
  sc.bounds = box(2, -1.0, 1.0);
  Eigen::Vector4d q(state_weight, state_weight, 0.0, 0.0);
  sc.objective = std::make_shared<fits::QuadraticTrackingObjective>(
      Eigen::MatrixXd(q.asDiagonal()), input_weight * Eigen::MatrixXd::Identity(2, 2),
      std::make_shared<fits::ConstantReference>(target), Eigen::Vector2d::Zero());
  sc.x_init = x_init;
  sc.u_equilibrium = Eigen::Vector2d::Zero();
  sc.t_sim = 2.0;
  return sc;
}

inline fits::SafetyFunctionPtr halfspace(Eigen::VectorXd a, double b) {
  return std::make_shared<fits::HalfspaceConstraint>(std::move(a), b);
}

inline fits::SafetyFunctionPtr circle(double cx, double cy, double r, int state_dim = 4) {
  return std::make_shared<fits::CircleConstraint>(Eigen::Vector2d(cx, cy), r,
                                                  std::array<int, 2>{0, 1}, state_dim);
}

}  // namespace fixture
