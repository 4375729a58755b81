#include "fits/baselines.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace fits {
namespace {

using Clock = std::chrono::steady_clock;

}  // namespace

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
      R.cols() != B.cols()) {
    throw std::invalid_argument("solve_care: dimension mismatch");
  }
  const Eigen::MatrixXd S = B * R.llt().solve(B.transpose());
  Eigen::MatrixXd Z(2 * n, 2 * n);
  Z << A, -S, -Q, -A.transpose();

  // Newton iteration for sign(Z) with determinant scaling.
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Z);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < 2 * n; ++i) log_det += std::log(std::abs(lu.matrixLU()(i, i)));
    const double c = std::exp(-log_det / static_cast<double>(2 * n));
    const Eigen::MatrixXd next = 0.5 * (c * Z + lu.inverse() / c);
    const double delta = (next - Z).lpNorm<1>();
    Z = next;
    if (delta <= 1e-13 * Z.lpNorm<1>()) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("solve_care: sign iteration did not converge");

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd lhs(2 * n, n);
  Eigen::MatrixXd rhs(2 * n, n);
  lhs << Z.topRightCorner(n, n), Z.bottomRightCorner(n, n) + I;
  rhs << Z.topLeftCorner(n, n) + I, Z.bottomLeftCorner(n, n);
  const Eigen::MatrixXd P = lhs.colPivHouseholderQr().solve(-rhs);
  return 0.5 * (P + P.transpose());
}

LqrController::LqrController(const DynamicsModel& model, Eigen::VectorXd x_eq,
                             Eigen::VectorXd u_eq, const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R, ActuationBounds bounds)
    : u_eq_(std::move(u_eq)), bounds_(std::move(bounds)) {
  bounds_.validate();
  const Eigen::MatrixXd A = model.jac_x(x_eq, u_eq_);
  const Eigen::MatrixXd B = model.jac_u(x_eq, u_eq_);
  const Eigen::MatrixXd P = solve_care(A, B, Q, R);
  K_ = R.llt().solve(B.transpose() * P);
  const Eigen::MatrixXd closed = A - B * K_;
  abscissa_ = Eigen::EigenSolver<Eigen::MatrixXd>(closed, false).eigenvalues().real().maxCoeff();
  if (!(abscissa_ < 0.0)) throw std::runtime_error("LQR closed loop is not stable");
}

Eigen::VectorXd LqrController::control(const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& x_ref) const {
  return bounds_.clip(u_eq_ - K_ * (x - x_ref));
}

ExponentialCbf::ExponentialCbf(SafetyFunctionPtr base, double k1, double k2)
    : base_(std::move(base)), k1_(k1), k2_(k2) {
  if (!base_) throw std::invalid_argument("exponential CBF needs a safety function");
  if (!(k1_ > 0.0) || !(k2_ > 0.0)) throw std::invalid_argument("CBF gains must be positive");
  const double disc = k2_ * k2_ - 4.0 * k1_;
  if (disc < -1e-12 * k2_ * k2_) {
    throw std::invalid_argument("CBF characteristic roots must be real");
  }
  first_order_gain_ = 0.5 * (k2_ - std::sqrt(std::max(0.0, disc)));
}

ExponentialCbf ExponentialCbf::from_class_kappa(SafetyFunctionPtr base, double gamma,
                                                double position_gain) {
  const double p = position_gain > 0.0 ? position_gain : gamma;
  return ExponentialCbf(std::move(base), gamma * p, gamma + p);
}

int ExponentialCbf::relative_degree(const DynamicsModel& model, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(model.input_dim());
  const Eigen::RowVectorXd lg = base_->grad(x) * model.jac_u(x, u0);
  return lg.cwiseAbs().maxCoeff() > 1e-12 ? 1 : 2;
}

InequalityRow ExponentialCbf::row(const DynamicsModel& model, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(model.input_dim());
  const Eigen::VectorXd f0 = model.eval(x, u0);
  const Eigen::MatrixXd Fu = model.jac_u(x, u0);
  const Eigen::RowVectorXd dh = base_->grad(x);
  const double h = base_->value(x);

  InequalityRow row;
  if (relative_degree(model, x) == 1) {
    row.coeffs = dh * Fu;
    row.lower_bound = -(dh.dot(f0) + first_order_gain_ * h);
    return row;
  }
  // h' = dh F(x, .) does not depend on u here.
  const double hdot = dh.dot(f0);
  const Eigen::RowVectorXd dhdot = f0.transpose() * base_->hessian(x) + dh * model.jac_x(x, u0);
  row.coeffs = dhdot * Fu;
  row.lower_bound = -(dhdot.dot(f0) + k2_ * hdot + k1_ * h);
  return row;
}

CbfStepResult cbf_qp_step(const DynamicsModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u_ref, const std::vector<ExponentialCbf>& barriers,
                          const ActuationBounds& bounds, const Eigen::MatrixXd& weight,
                          const qp::QPSettings& settings) {
  const int nu = model.input_dim();
  const int m = static_cast<int>(barriers.size());
  qp::QPProblem p;
  p.P = weight;
  p.q = -2.0 * weight * u_ref;
  p.G = Eigen::MatrixXd::Zero(m + 2 * nu, nu);
  p.b.resize(m + 2 * nu);
  for (int i = 0; i < m; ++i) {
    const InequalityRow r = barriers[static_cast<std::size_t>(i)].row(model, x);
    p.G.row(i) = r.coeffs;
    p.b(i) = r.lower_bound;
  }
  for (int c = 0; c < nu; ++c) {
    p.G(m + 2 * c, c) = 1.0;
    p.b(m + 2 * c) = bounds.lower(c);
    p.G(m + 2 * c + 1, c) = -1.0;
    p.b(m + 2 * c + 1) = -bounds.upper(c);
  }
  if (!x.allFinite() || !p.q.allFinite() || !p.G.allFinite() || !p.b.allFinite()) {
    throw NonFiniteState("CBF-QP has non-finite data");
  }
  const qp::QPSolution sol = qp::solve(p, settings);
  if (sol.status != qp::QPStatus::Optimal) return {bounds.clip(u_ref), sol.status};
  return {sol.v, sol.status};
}

namespace {

LqrController make_tracking_lqr(const Scenario& scenario, const LqrSettings& s) {
  const int nx = scenario.model->state_dim();
  const int nu = scenario.model->input_dim();
  const auto diag = [](const Eigen::VectorXd& w, int n, const char* what) -> Eigen::MatrixXd {
    if (w.size() == 0) return Eigen::MatrixXd::Identity(n, n);
    if (w.size() != n) throw std::invalid_argument(std::string("LQR ") + what + " weight has wrong length");
    return w.asDiagonal();
  };
  const Eigen::VectorXd x_eq = Eigen::VectorXd::Zero(nx);
  return LqrController(*scenario.model, x_eq, scenario.u_equilibrium, diag(s.state_weight, nx, "state"),
                       diag(s.input_weight, nu, "input"), scenario.bounds);
}

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

LqrTrackingController::LqrTrackingController(LqrSettings settings) : settings_(settings) {
  if (!(settings_.dt > 0.0)) throw std::invalid_argument("LQR controller period must be positive");
}

void LqrTrackingController::reset(const Scenario& scenario) {
  scenario.check_initial_state();
  scenario_ = scenario;
  lqr_ = make_tracking_lqr(scenario, settings_);
}

ControlOutput LqrTrackingController::step(const Eigen::VectorXd& x, double t) {
  if (!lqr_) throw std::logic_error("LqrTrackingController::step called before reset");
  const auto start = Clock::now();
  ControlOutput out;
  out.u = lqr_->control(x, scenario_->objective->reference().state(t));
  out.compute_time = elapsed(start);
  return out;
}

CbfQpController::CbfQpController(CbfSettings settings) : settings_(std::move(settings)) {
  if (!(settings_.lqr.dt > 0.0)) throw std::invalid_argument("CBF controller period must be positive");
  if (!(settings_.gamma > 0.0)) throw std::invalid_argument("CBF gamma must be positive");
}

void CbfQpController::reset(const Scenario& scenario) {
  scenario.check_initial_state();
  scenario_ = scenario;
  lqr_ = make_tracking_lqr(scenario, settings_.lqr);
  barriers_.clear();
  for (const auto& h : scenario.constraints) {
    barriers_.push_back(ExponentialCbf::from_class_kappa(h, settings_.gamma, settings_.position_gain));
  }
}

ControlOutput CbfQpController::step(const Eigen::VectorXd& x, double t) {
  if (!lqr_) throw std::logic_error("CbfQpController::step called before reset");
  const auto start = Clock::now();
  const Eigen::VectorXd u_ref = lqr_->control(x, scenario_->objective->reference().state(t));
  const int nu = scenario_->model->input_dim();
  const CbfStepResult r =
      cbf_qp_step(*scenario_->model, x, u_ref, barriers_, scenario_->bounds,
                  settings_.input_weight * Eigen::MatrixXd::Identity(nu, nu), settings_.qp);
  ControlOutput out;
  out.u = r.u;
  out.qp_status = r.status;
  out.compute_time = elapsed(start);
  return out;
}

}  // namespace fits
