#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fits/constraints.hpp"
#include "fits/dynamics.hpp"
#include "fits/qp.hpp"
#include "fits/scenario.hpp"

namespace fits {

/// Stabilizing solution of A'P + PA - P B R^{-1} B' P + Q = 0 (matrix sign
/// function on the Hamiltonian).
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Infinite-horizon LQR about (x_eq, u_eq): u = u_eq - K (x - x_ref), clipped.
class LqrController {
 public:
  LqrController(const DynamicsModel& model, Eigen::VectorXd x_eq, Eigen::VectorXd u_eq,
                const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, ActuationBounds bounds);

  const Eigen::MatrixXd& gain() const { return K_; }
  /// Largest real part of eig(A - BK); negative by construction.
  double spectral_abscissa() const { return abscissa_; }
  Eigen::VectorXd control(const Eigen::VectorXd& x, const Eigen::VectorXd& x_ref) const;

 private:
  Eigen::MatrixXd K_;
  Eigen::VectorXd u_eq_;
  ActuationBounds bounds_;
  double abscissa_ = 0.0;
};

/// Exponential CBF. For relative degree two the enforced condition is
///   h'' + k2 h' + k1 h >= 0,
/// for relative degree one it is h' + p h >= 0 with p the slower root of
/// s^2 + k2 s + k1. Assumes F is affine in u.
class ExponentialCbf {
 public:
  ExponentialCbf(SafetyFunctionPtr base, double k1, double k2);
  /// Roots -gamma and -position_gain: k1 = gamma p, k2 = gamma + p. A
  /// non-positive position_gain gives the repeated root -gamma.
  static ExponentialCbf from_class_kappa(SafetyFunctionPtr base, double gamma,
                                         double position_gain = 0.0);

  double k1() const { return k1_; }
  double k2() const { return k2_; }
  const SafetyFunction& base() const { return *base_; }

  /// 1 if dh/dx dF/du is nonzero at x, otherwise 2.
  int relative_degree(const DynamicsModel& model, const Eigen::VectorXd& x) const;
  /// Condition as a row over u: coeffs u >= lower_bound.
  InequalityRow row(const DynamicsModel& model, const Eigen::VectorXd& x) const;

 private:
  SafetyFunctionPtr base_;
  double k1_;
  double k2_;
  double first_order_gain_;
};

struct CbfStepResult {
  Eigen::VectorXd u;
  qp::QPStatus status = qp::QPStatus::Optimal;
};

/// min (u - u_ref)' W (u - u_ref) subject to every barrier row and the box
/// bounds. Falls back to clip(u_ref) when the QP is not solved.
CbfStepResult cbf_qp_step(const DynamicsModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u_ref, const std::vector<ExponentialCbf>& barriers,
                          const ActuationBounds& bounds, const Eigen::MatrixXd& weight,
                          const qp::QPSettings& settings = {});

struct LqrSettings {
  /// diag(Q) and diag(R); empty means identity.
  Eigen::VectorXd state_weight;
  Eigen::VectorXd input_weight;
  double dt = 0.01;
};

/// LQR tracking of the scenario reference, unfiltered.
class LqrTrackingController final : public Controller {
 public:
  explicit LqrTrackingController(LqrSettings settings = {});
  std::string name() const override { return "lqr"; }
  double period() const override { return settings_.dt; }
  void reset(const Scenario& scenario) override;
  ControlOutput step(const Eigen::VectorXd& x, double t) override;

 private:
  LqrSettings settings_;
  std::optional<Scenario> scenario_;
  std::optional<LqrController> lqr_;
};

struct CbfSettings {
  LqrSettings lqr;
  /// Every constraint uses from_class_kappa(h, gamma, position_gain).
  double gamma = 20.0;
  double position_gain = 0.0;
  double input_weight = 1.0;  // W = w I
  qp::QPSettings qp;
};

/// LQR reference filtered through an exponential CBF-QP.
class CbfQpController final : public Controller {
 public:
  explicit CbfQpController(CbfSettings settings = {});
  std::string name() const override { return "cbf"; }
  double period() const override { return settings_.lqr.dt; }
  void reset(const Scenario& scenario) override;
  ControlOutput step(const Eigen::VectorXd& x, double t) override;

 private:
  CbfSettings settings_;
  std::optional<Scenario> scenario_;
  std::optional<LqrController> lqr_;
  std::vector<ExponentialCbf> barriers_;
};

}  // namespace fits
