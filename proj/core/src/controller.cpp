#include "fits/controller.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fits/log.hpp"
#include "fits/objective.hpp"

namespace fits {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

SampleGrid FitsConfig::grid() const {
  const bool aligned = sample_layout == SampleLayout::InputAligned;
  const double spacing = aligned ? horizon / num_samples
                                 : (num_samples > 1 ? horizon / (num_samples - 1) : 0.0);
  const int sub = substeps > 0 ? substeps : SampleGrid::default_substeps(spacing, dtau());
  return aligned ? SampleGrid::aligned(horizon, num_samples, sub)
                 : SampleGrid::uniform(horizon, num_samples, sub);
}

Eigen::MatrixXd FitsConfig::regularizer_matrix(int dim) const {
  if (regularizer.size() == 0) return reg_weight * Eigen::MatrixXd::Identity(dim, dim);
  if (regularizer.rows() != dim || regularizer.cols() != dim) {
    throw std::invalid_argument("regularizer dimension does not match N * n_u");
  }
  return regularizer;
}

void FitsConfig::validate() const {
  if (num_steps < 1) throw std::invalid_argument("FITS config: N must be >= 1");
  if (num_samples < 1) throw std::invalid_argument("FITS config: M must be >= 1");
  if (substeps < 0) throw std::invalid_argument("FITS config: substeps must be >= 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("FITS config: horizon must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("FITS config: dt must be positive");
  if (!(gamma_safety > 0.0) || !(gamma_actuation > 0.0)) {
    throw std::invalid_argument("FITS config: class-kappa gains must be positive");
  }
  if (!(margin >= 0.0)) throw std::invalid_argument("FITS config: margin must be >= 0");
  if (!(kappa_safety_factor >= 1.0)) {
    throw std::invalid_argument("FITS config: kappa safety factor must be >= 1");
  }
  if (regularizer.size() == 0) {
    if (!(reg_weight > 0.0)) throw std::invalid_argument("FITS config: reg_weight must be positive");
  } else {
    if (regularizer.rows() != regularizer.cols()) {
      throw std::invalid_argument("FITS config: regularizer must be square");
    }
    if (!(regularizer - regularizer.transpose()).isZero(1e-12)) {
      throw std::invalid_argument("FITS config: regularizer must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(regularizer, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw std::invalid_argument("FITS config: regularizer must be positive definite");
    }
  }
}

std::vector<KappaRateCheck> FitsConfig::rate_checks() const {
  return {kappa_rate_check(LinearClassKappa(gamma_safety), dt, kappa_safety_factor),
          kappa_rate_check(LinearClassKappa(gamma_actuation), dt, kappa_safety_factor)};
}

bool FitsConfig::rate_checks_pass() const {
  for (const auto& c : rate_checks()) {
    if (!c.pass) return false;
  }
  return true;
}

FitsAssembly assemble_fits_qp(const TrajectoryState& s, const Scenario& scenario,
                              const FitsConfig& cfg, double t) {
  const DynamicsModel& model = *scenario.model;
  const SampleGrid grid = cfg.grid();
  if (s.num_steps() != cfg.num_steps || std::abs(s.horizon() - cfg.horizon) > 1e-12) {
    throw std::invalid_argument("trajectory state does not match the FITS config");
  }

  FitsAssembly out;
  out.rollout = rollout_with_sensitivity(s, model, grid);
  out.dynamics = trajectory_drift(s, model);
  out.objective = objective_value(s, out.rollout, *scenario.objective, t);

  const Eigen::RowVectorXd dJ = objective_gradient(s, out.rollout, *scenario.objective, t);
  const int n = s.input_block_dim();
  const int m = static_cast<int>(scenario.constraints.size());
  const int num_safety = m * grid.size();
  const int num_rows = num_safety + 2 * n;

  qp::QPProblem& qp = out.problem;
  qp.P = cfg.regularizer_matrix(n);
  qp.q = dJ.tail(n).transpose();  // dJ/ds g_s
  qp.G.resize(num_rows, n);
  qp.b.resize(num_rows);

  const LinearClassKappa alpha_safety(cfg.gamma_safety);
  out.min_h = std::numeric_limits<double>::infinity();
  int row = 0;
  for (int j = 0; j < grid.size(); ++j) {
    const auto& state = out.rollout.states[static_cast<std::size_t>(j)];
    const auto& jac = out.rollout.jacobians[static_cast<std::size_t>(j)];
    for (const auto& h : scenario.constraints) {
      out.min_h = std::min(out.min_h, h->value(state));
      const InequalityRow r = safety_row(*h, state, jac, out.dynamics, alpha_safety, cfg.margin);
      qp.G.row(row) = r.coeffs;
      qp.b(row) = r.lower_bound;
      ++row;
    }
  }
  for (const auto& r : actuation_rows(s, scenario.bounds, LinearClassKappa(cfg.gamma_actuation))) {
    qp.G.row(row) = r.coeffs;
    qp.b(row) = r.lower_bound;
    ++row;
  }
  return out;
}

TickResult fits_tick(const TrajectoryState& s, const Scenario& scenario, const FitsConfig& cfg,
                     double t) {
  const auto start = Clock::now();
  FitsAssembly assembly = assemble_fits_qp(s, scenario, cfg, t);
  TickResult out;
  out.diagnostics.assembly_time = seconds_since(start);
  out.diagnostics.objective = assembly.objective;
  out.diagnostics.min_h = assembly.min_h;
  out.diagnostics.num_rows = static_cast<int>(assembly.problem.G.rows());
  const auto& p = assembly.problem;
  if (!p.P.allFinite() || !p.q.allFinite() || !p.G.allFinite() || !p.b.allFinite()) {
    throw NonFiniteState("trajectory QP has non-finite data at t = " + std::to_string(t));
  }

  const auto solve_start = Clock::now();
  const qp::QPSolution sol = qp::solve(assembly.problem, cfg.qp);
  out.diagnostics.solve_time = seconds_since(solve_start);
  out.diagnostics.qp_status = sol.status;
  out.diagnostics.active_constraints = static_cast<int>(sol.active_set.size());

  if (sol.status == qp::QPStatus::Optimal) {
    out.v = sol.v;
  } else {
    // Coast on the current plan.
    out.v = Eigen::VectorXd::Zero(s.input_block_dim());
    log::info("FITS tick at t=" + std::to_string(t) + ": QP " +
              std::string(qp::to_string(sol.status)) + ", applying v = 0");
  }
  return out;
}

FitsConfig icbf_reduce(FitsConfig cfg) {
  if (cfg.regularizer.size() != 0) {
    // Keep the block acting on u_0.
    const auto nu = cfg.regularizer.rows() / cfg.num_steps;
    cfg.regularizer = Eigen::MatrixXd(cfg.regularizer.topLeftCorner(nu, nu));
  }
  cfg.horizon = cfg.dtau();
  cfg.num_steps = 1;
  cfg.num_samples = 1;
  return cfg;
}

LoopStep control_loop_step(const Eigen::VectorXd& plant_state, const TrajectoryState& s,
                           const Scenario& scenario, const FitsConfig& cfg, double t) {
  TrajectoryState synced = s;
  synced.set_x0(plant_state);
  TickResult tick = fits_tick(synced, scenario, cfg, t);

  TrajectoryState next = zoh_update(synced, tick.v, cfg.dt);
  const double dtau = synced.dtau();
  const auto boundary = [dtau](double time) { return std::floor(time / dtau + 1e-9); };
  const int shifts = static_cast<int>(boundary(t + cfg.dt) - boundary(t));
  if (shifts > 0) next = shift_horizon(next, std::min(shifts, next.num_steps()));

  LoopStep out{next.input(0), std::move(next), tick.diagnostics, shifts};
  return out;
}

TrajectoryState init_trajectory(const Scenario& scenario, const FitsConfig& cfg) {
  scenario.check_initial_state();
  const Eigen::VectorXd u0 = scenario.bounds.clip(scenario.u_equilibrium);
  TrajectoryState s(scenario.x_init,
                    std::vector<Eigen::VectorXd>(static_cast<std::size_t>(cfg.num_steps), u0),
                    cfg.horizon);
  const SensitivityRollout roll = rollout_with_sensitivity(s, *scenario.model, cfg.grid());
  std::vector<ConstraintViolation> bad;
  for (std::size_t j = 0; j < roll.states.size(); ++j) {
    for (std::size_t i = 0; i < scenario.constraints.size(); ++i) {
      const double h = scenario.constraints[i]->value(roll.states[j]);
      if (h < 0.0) bad.push_back({i, scenario.constraints[i]->describe(), h, roll.times[j]});
    }
  }
  if (!bad.empty()) throw InfeasibleStart(std::move(bad));
  return s;
}

FitsController::FitsController(FitsConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (const auto& check : cfg_.rate_checks()) {
    if (!check.pass) log::warn("kappa rate check failed: " + check.message);
  }
}

void FitsController::reset(const Scenario& scenario) {
  scenario_ = scenario;
  plan_ = init_trajectory(*scenario_, cfg_);
}

ControlOutput FitsController::step(const Eigen::VectorXd& x, double t) {
  if (!plan_) throw std::logic_error("FitsController::step called before reset");
  LoopStep result = control_loop_step(x, *plan_, *scenario_, cfg_, t);
  plan_ = std::move(result.next);
  last_ = result.diagnostics;
  ControlOutput out;
  out.u = std::move(result.u_apply);
  out.qp_status = last_.qp_status;
  out.compute_time = last_.assembly_time + last_.solve_time;
  out.objective = last_.objective;
  return out;
}

}  // namespace fits
