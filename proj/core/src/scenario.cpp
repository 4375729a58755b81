#include "fits/scenario.hpp"

#include <sstream>
#include <stdexcept>

namespace fits {
namespace {

std::string format_violations(const std::vector<ConstraintViolation>& violations) {
  std::ostringstream os;
  os << "infeasible start:";
  for (const auto& v : violations) {
    os << " [h" << v.index << " " << v.description << " = " << v.value << " at tau=" << v.tau << "]";
  }
  return os.str();
}

}  // namespace

InfeasibleStart::InfeasibleStart(std::vector<ConstraintViolation> violations)
    : std::runtime_error(format_violations(violations)), violations_(std::move(violations)) {}

void Scenario::validate() const {
  if (!model) throw std::invalid_argument("scenario has no model");
  if (!objective) throw std::invalid_argument("scenario has no objective");
  const int nx = model->state_dim();
  const int nu = model->input_dim();
  if (x_init.size() != nx) throw std::invalid_argument("scenario x_init dimension mismatch");
  if (u_equilibrium.size() != nu) throw std::invalid_argument("scenario equilibrium input mismatch");
  bounds.validate();
  if (bounds.size() != nu) throw std::invalid_argument("scenario actuation bounds mismatch");
  if (!(t_sim > 0.0)) throw std::invalid_argument("scenario t_sim must be positive");
  if (plant_step < 0.0) throw std::invalid_argument("scenario plant_step must be >= 0");
  if (objective->state_weight().rows() != nx || objective->input_weight().rows() != nu) {
    throw std::invalid_argument("objective weights do not match the model");
  }
  for (const auto& h : constraints) {
    if (!h || h->state_dim() != nx) throw std::invalid_argument("constraint dimension mismatch");
  }
}

void Scenario::check_initial_state() const {
  std::vector<ConstraintViolation> bad;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const double h = constraints[i]->value(x_init);
    if (h < 0.0) bad.push_back({i, constraints[i]->describe(), h, 0.0});
  }
  if (!bad.empty()) throw InfeasibleStart(std::move(bad));
}

Eigen::VectorXd Scenario::constraint_values(const Eigen::VectorXd& x) const {
  Eigen::VectorXd h(static_cast<Eigen::Index>(constraints.size()));
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    h(static_cast<Eigen::Index>(i)) = constraints[i]->value(x);
  }
  return h;
}

}  // namespace fits
