#include "fits/constraints.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fits {

HalfspaceConstraint::HalfspaceConstraint(Eigen::VectorXd a, double b) : a_(std::move(a)), b_(b) {
  if (a_.size() == 0 || a_.isZero(0.0)) throw std::invalid_argument("halfspace normal must be nonzero");
  if (!a_.allFinite() || !std::isfinite(b_)) throw std::invalid_argument("halfspace must be finite");
}

Eigen::MatrixXd HalfspaceConstraint::hessian(const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Zero(a_.size(), a_.size());
}

std::string HalfspaceConstraint::describe() const {
  std::ostringstream os;
  os << "halfspace a=[" << a_.transpose() << "] b=" << b_;
  return os.str();
}

CircleConstraint::CircleConstraint(Eigen::Vector2d center, double radius,
                                   std::array<int, 2> position_index, int state_dim)
    : center_(std::move(center)), radius_(radius), index_(position_index), state_dim_(state_dim) {
  if (!(radius_ > 0.0)) throw std::invalid_argument("circle radius must be positive");
  if (!center_.allFinite()) throw std::invalid_argument("circle center must be finite");
  for (int i : index_) {
    if (i < 0 || i >= state_dim_) throw std::invalid_argument("circle position index out of range");
  }
  if (index_[0] == index_[1]) throw std::invalid_argument("circle position indices must differ");
}

Eigen::Vector2d CircleConstraint::offset(const Eigen::VectorXd& x) const {
  return Eigen::Vector2d(x(index_[0]), x(index_[1])) - center_;
}

double CircleConstraint::value(const Eigen::VectorXd& x) const {
  return offset(x).norm() - radius_;
}

Eigen::RowVectorXd CircleConstraint::grad(const Eigen::VectorXd& x) const {
  const Eigen::Vector2d d = offset(x);
  const double r = d.norm();
  Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(state_dim_);
  if (r == 0.0) {
    g(index_[0]) = 1.0;
    return g;
  }
  g(index_[0]) = d.x() / r;
  g(index_[1]) = d.y() / r;
  return g;
}

Eigen::MatrixXd CircleConstraint::hessian(const Eigen::VectorXd& x) const {
  const Eigen::Vector2d d = offset(x);
  const double r = d.norm();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(state_dim_, state_dim_);
  if (r == 0.0) return H;
  const Eigen::Vector2d n = d / r;
  const Eigen::Matrix2d block = (Eigen::Matrix2d::Identity() - n * n.transpose()) / r;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) H(index_[a], index_[b]) = block(a, b);
  }
  return H;
}

std::string CircleConstraint::describe() const {
  std::ostringstream os;
  os << "circle center=(" << center_.x() << ", " << center_.y() << ") r=" << radius_;
  return os.str();
}

LinearClassKappa::LinearClassKappa(double gain) : gain_(gain) {
  if (!(gain_ > 0.0) || !std::isfinite(gain_)) {
    throw std::invalid_argument("class-kappa gain must be positive and finite");
  }
}

void ActuationBounds::validate() const {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw std::invalid_argument("actuation bounds must be non-empty and equally sized");
  }
  if (!(lower.array() < upper.array()).all()) {
    throw std::invalid_argument("actuation bounds require lower < upper componentwise");
  }
}

Eigen::VectorXd ActuationBounds::clip(const Eigen::VectorXd& u) const {
  return u.cwiseMax(lower).cwiseMin(upper);
}

bool ActuationBounds::contains(const Eigen::VectorXd& u, double tol) const {
  return ((u - lower).array() >= -tol).all() && ((upper - u).array() >= -tol).all();
}

InequalityRow safety_row(const SafetyFunction& h, const Eigen::VectorXd& state,
                         const Eigen::MatrixXd& jacobian, const TrajectoryDynamics& dyn,
                         const LinearClassKappa& kappa, double margin) {
  if (jacobian.cols() != dyn.drift.size() || jacobian.rows() != state.size()) {
    throw std::invalid_argument("safety_row: jacobian shape mismatch");
  }
  const Eigen::RowVectorXd g = h.grad(state) * jacobian;
  InequalityRow row;
  row.coeffs = g.tail(dyn.input_block_dim());
  // f_s vanishes on the input block.
  const double drift = g.head(dyn.state_dim).dot(dyn.drift.head(dyn.state_dim));
  row.lower_bound = -kappa(h.value(state)) - drift + margin;
  return row;
}

std::vector<InequalityRow> actuation_rows(const TrajectoryState& s, const ActuationBounds& bounds,
                                          const LinearClassKappa& kappa) {
  if (bounds.size() != s.input_dim()) throw std::invalid_argument("actuation bounds dimension mismatch");
  const int nu = s.input_dim();
  const int n = s.input_block_dim();
  std::vector<InequalityRow> rows;
  rows.reserve(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < s.num_steps(); ++i) {
    for (int c = 0; c < nu; ++c) {
      const int k = i * nu + c;
      const double u = s.input(i)(c);
      InequalityRow lo{Eigen::RowVectorXd::Zero(n), -kappa(u - bounds.lower(c))};
      lo.coeffs(k) = 1.0;
      InequalityRow hi{Eigen::RowVectorXd::Zero(n), -kappa(bounds.upper(c) - u)};
      hi.coeffs(k) = -1.0;
      rows.push_back(std::move(lo));
      rows.push_back(std::move(hi));
    }
  }
  return rows;
}

KappaRateCheck kappa_rate_check(const LinearClassKappa& kappa, double dt, double safety_factor) {
  if (!(dt > 0.0)) throw std::invalid_argument("kappa_rate_check requires dt > 0");
  if (!(safety_factor >= 1.0)) throw std::invalid_argument("kappa safety factor must be >= 1");
  KappaRateCheck out;
  out.bound = 1.0 / (safety_factor * dt);
  out.pass = kappa.gain() <= out.bound;
  std::ostringstream os;
  os << "class-kappa gain " << kappa.gain() << (out.pass ? " <= " : " > ") << "1/(rho*dt) = "
     << out.bound << " (rho=" << safety_factor << ", dt=" << dt << ")";
  out.message = os.str();
  return out;
}

}  // namespace fits
