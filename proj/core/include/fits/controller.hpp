#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fits/constraints.hpp"
#include "fits/qp.hpp"
#include "fits/scenario.hpp"
#include "fits/trajspace.hpp"

namespace fits {

/// Placement of the M constraint samples on [0, T].
enum class SampleLayout {
  Endpoints,     // tau_j = j T / (M - 1), both ends included
  InputAligned,  // tau_j = (j + 1) T / M, tau = 0 excluded
};

/// Hyperparameters of the trajectory-space controller.
struct FitsConfig {
  int num_steps = 20;        // N planned inputs
  double horizon = 0.2;      // T, seconds
  int num_samples = 40;      // M constraint samples on [0, T]
  SampleLayout sample_layout = SampleLayout::Endpoints;
  int substeps = 0;          // Euler substeps per sample interval; 0 = auto
  double gamma_safety = 5.0;
  double gamma_actuation = 5.0;
  /// Regularizer Q = reg_weight * I unless `regularizer` is non-empty.
  double reg_weight = 1e-4;
  Eigen::MatrixXd regularizer;
  double dt = 0.01;          // control period
  double margin = 0.0;       // constant tightening of every safety row
  double kappa_safety_factor = 4.0;
  qp::QPSettings qp;

  double dtau() const { return horizon / num_steps; }
  SampleGrid grid() const;
  Eigen::MatrixXd regularizer_matrix(int dim) const;
  /// Throws std::invalid_argument for structurally invalid settings.
  void validate() const;
  /// Sampled-data checks for both class-kappa gains.
  std::vector<KappaRateCheck> rate_checks() const;
  bool rate_checks_pass() const;
};

struct TickDiagnostics {
  qp::QPStatus qp_status = qp::QPStatus::Optimal;
  double solve_time = 0.0;     // QP, seconds
  double assembly_time = 0.0;  // rollout + rows + gradient, seconds
  double min_h = 0.0;          // min over constraints and plan samples
  double objective = 0.0;
  int active_constraints = 0;
  int num_rows = 0;
};

/// QP data for one tick plus the quantities it was built from.
struct FitsAssembly {
  qp::QPProblem problem;
  SensitivityRollout rollout;
  TrajectoryDynamics dynamics;
  double objective = 0.0;
  double min_h = 0.0;
};

/// Rows are ordered safety (sample-major, constraint-minor) then actuation.
FitsAssembly assemble_fits_qp(const TrajectoryState& s, const Scenario& scenario,
                              const FitsConfig& cfg, double t);

struct TickResult {
  Eigen::VectorXd v;
  TickDiagnostics diagnostics;
};

/// Solves the trajectory-space QP. Infeasible or iteration-capped solves
/// return v = 0 with the status recorded.
TickResult fits_tick(const TrajectoryState& s, const Scenario& scenario, const FitsConfig& cfg,
                     double t);

/// Single-input horizon with one constraint sample at tau = 0.
FitsConfig icbf_reduce(FitsConfig cfg);

struct LoopStep {
  Eigen::VectorXd u_apply;
  TrajectoryState next;
  TickDiagnostics diagnostics;
  int shifts = 0;
};

/// Syncs x0, solves, integrates the plan for dt and re-anchors it on every
/// dtau boundary crossed in [t, t + dt).
LoopStep control_loop_step(const Eigen::VectorXd& plant_state, const TrajectoryState& s,
                           const Scenario& scenario, const FitsConfig& cfg, double t);

/// Plan held at the (clipped) equilibrium input. Throws InfeasibleStart when
/// any constraint is negative along it.
TrajectoryState init_trajectory(const Scenario& scenario, const FitsConfig& cfg);

class FitsController final : public Controller {
 public:
  explicit FitsController(FitsConfig cfg);

  std::string name() const override { return "fits"; }
  double period() const override { return cfg_.dt; }
  void reset(const Scenario& scenario) override;
  ControlOutput step(const Eigen::VectorXd& x, double t) override;

  const FitsConfig& config() const { return cfg_; }
  const std::optional<TrajectoryState>& plan() const { return plan_; }
  const TickDiagnostics& last_diagnostics() const { return last_; }

 private:
  FitsConfig cfg_;
  std::optional<Scenario> scenario_;
  std::optional<TrajectoryState> plan_;
  TickDiagnostics last_;
};

}  // namespace fits
