#include "fits/objective.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fits {
namespace {

void require_symmetric_psd(const Eigen::MatrixXd& M, const char* what) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    throw std::invalid_argument(std::string(what) + " must be square and non-empty");
  }
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if (!(M - M.transpose()).isZero(1e-12 * scale)) {
    throw std::invalid_argument(std::string(what) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw std::invalid_argument(std::string(what) + " must be positive semidefinite");
  }
}

double sample_weight(const SensitivityRollout& roll, std::size_t j) {
  return j + 1 < roll.times.size() ? roll.times[j + 1] - roll.times[j] : 0.0;
}

}  // namespace

CircleReference::CircleReference(Eigen::Vector2d center, double radius, double period,
                                 int state_dim, std::array<int, 2> position_index,
                                 std::array<int, 2> velocity_index, double phase)
    : center_(std::move(center)),
      radius_(radius),
      period_(period),
      state_dim_(state_dim),
      pos_(position_index),
      vel_(velocity_index),
      phase_(phase) {
  if (!(radius_ > 0.0) || !(period_ > 0.0)) {
    throw std::invalid_argument("circle reference needs positive radius and period");
  }
}

Eigen::VectorXd CircleReference::state(double t) const {
  const double w = 2.0 * std::numbers::pi / period_;
  const double a = phase_ + w * t;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(state_dim_);
  x(pos_[0]) = center_.x() + radius_ * std::cos(a);
  x(pos_[1]) = center_.y() + radius_ * std::sin(a);
  x(vel_[0]) = -radius_ * w * std::sin(a);
  x(vel_[1]) = radius_ * w * std::cos(a);
  return x;
}

QuadraticTrackingObjective::QuadraticTrackingObjective(Eigen::MatrixXd state_weight,
                                                       Eigen::MatrixXd input_weight,
                                                       std::shared_ptr<const Reference> reference,
                                                       Eigen::VectorXd input_ref)
    : Q_(std::move(state_weight)),
      R_(std::move(input_weight)),
      reference_(std::move(reference)),
      u_ref_(std::move(input_ref)) {
  require_symmetric_psd(Q_, "state weight");
  require_symmetric_psd(R_, "input weight");
  if (!reference_) throw std::invalid_argument("objective needs a reference");
  if (u_ref_.size() != R_.rows()) throw std::invalid_argument("input reference dimension mismatch");
}

double objective_value(const TrajectoryState& s, const SensitivityRollout& roll,
                       const QuadraticTrackingObjective& obj, double t) {
  double J = 0.0;
  for (std::size_t j = 0; j < roll.states.size(); ++j) {
    const double w = sample_weight(roll, j);
    if (w == 0.0) continue;
    const Eigen::VectorXd dx = roll.states[j] - obj.reference().state(t + roll.times[j]);
    J += w * dx.dot(obj.state_weight() * dx);
  }
  for (int i = 0; i < s.num_steps(); ++i) {
    const Eigen::VectorXd du = s.input(i) - obj.input_ref();
    J += s.dtau() * du.dot(obj.input_weight() * du);
  }
  return J;
}

Eigen::RowVectorXd objective_gradient(const TrajectoryState& s, const SensitivityRollout& roll,
                                      const QuadraticTrackingObjective& obj, double t) {
  Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(s.flat_dim());
  for (std::size_t j = 0; j < roll.states.size(); ++j) {
    const double w = sample_weight(roll, j);
    if (w == 0.0) continue;
    const Eigen::VectorXd dx = roll.states[j] - obj.reference().state(t + roll.times[j]);
    g.noalias() += (2.0 * w) * (dx.transpose() * obj.state_weight()) * roll.jacobians[j];
  }
  const int nx = s.state_dim();
  const int nu = s.input_dim();
  for (int i = 0; i < s.num_steps(); ++i) {
    const Eigen::VectorXd du = s.input(i) - obj.input_ref();
    g.segment(nx + i * nu, nu) += (2.0 * s.dtau()) * (du.transpose() * obj.input_weight());
  }
  return g;
}

}  // namespace fits
