#include "commands.hpp"

#include <filesystem>
#include <iomanip>
#include <random>
#include <sstream>

#include "fits/io.hpp"
#include "fits/log.hpp"

namespace fits::cli {

namespace fs = std::filesystem;

namespace {

struct EpisodeOutcome {
  int code = kExitOk;
  Metrics metrics;
  EpisodeLog log;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError(0, "output.dir", "cannot create '" + dir.string() + "'");
  }
}

EpisodeOutcome run_one(Controller& controller, const Scenario& scenario, std::ostream& err) {
  EpisodeOutcome res;
  try {
    res.log = run_episode(controller, scenario);
  } catch (const InfeasibleStart& e) {
    err << "error: " << e.what() << "\n";
    res.code = kExitInfeasibleStart;
    return res;
  }
  if (res.log.records.empty()) {
    err << "error: episode produced no records (" << res.log.reason << ")\n";
    res.code = kExitAborted;
    return res;
  }
  res.metrics = compute_metrics(res.log, scenario);
  if (res.log.aborted) {
    err << "error: " << controller.name() << " episode aborted: " << res.log.reason << "\n";
    res.code = kExitAborted;
  }
  return res;
}

void write_trajectory(const fs::path& path, const EpisodeLog& log, const Scenario& sc) {
  io::write_file_atomic(path, [&](std::ostream& os) {
    io::write_trajectory_csv(os, log, sc.model->state_dim(), sc.model->input_dim(),
                             static_cast<int>(sc.constraints.size()));
  });
}

void write_metrics(const fs::path& path, const std::vector<std::pair<std::string, Metrics>>& rows) {
  io::write_file_atomic(path, [&](std::ostream& os) { io::write_metrics_csv(os, rows); });
}

fs::path rep_dir(const RunConfig& cfg, int rep) {
  fs::path dir(cfg.out_dir);
  if (cfg.repetitions > 1) dir /= "rep_" + std::to_string(rep);
  return dir;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const LayoutInfeasible& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
  }
  return kExitConfig;
}

// Forwards everything to `base` except a scaled input Jacobian.
class FaultyModel final : public DynamicsModel {
 public:
  explicit FaultyModel(const DynamicsModel& base) : base_(base) {}
  int state_dim() const override { return base_.state_dim(); }
  int input_dim() const override { return base_.input_dim(); }
  std::string name() const override { return base_.name() + "+fault"; }
  Eigen::VectorXd eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override {
    return base_.eval(x, u);
  }
  Eigen::MatrixXd jac_x(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override {
    return base_.jac_x(x, u);
  }
  Eigen::MatrixXd jac_u(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override {
    return 1.05 * base_.jac_u(x, u);
  }

 private:
  const DynamicsModel& base_;
};

struct JacobianCase {
  std::shared_ptr<const DynamicsModel> model;
  FitsConfig cfg;
  Eigen::VectorXd x_scale;
  Eigen::VectorXd u_center;
  double u_spread = 0.0;
};

// Worst relative error between rollout Jacobians and central differences.
double jacobian_error(const DynamicsModel& checked, const DynamicsModel& reference,
                      const TrajectoryState& s, const SampleGrid& grid) {
  const auto roll = rollout_with_sensitivity(s, checked, grid);
  const Eigen::VectorXd flat = s.flatten();
  const int nx = s.state_dim();
  const int nu = s.input_dim();
  const int n = s.num_steps();
  std::vector<Eigen::MatrixXd> fd(grid.times.size(), Eigen::MatrixXd::Zero(nx, flat.size()));
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    const double eps = 1e-6 * std::max(1.0, std::abs(flat(k)));
    Eigen::VectorXd plus = flat;
    Eigen::VectorXd minus = flat;
    plus(k) += eps;
    minus(k) -= eps;
    const auto rp = rollout_with_sensitivity(
        TrajectoryState::from_flat(plus, nx, nu, n, s.horizon()), reference, grid);
    const auto rm = rollout_with_sensitivity(
        TrajectoryState::from_flat(minus, nx, nu, n, s.horizon()), reference, grid);
    for (std::size_t j = 0; j < grid.times.size(); ++j) {
      fd[j].col(k) = (rp.states[j] - rm.states[j]) / (2.0 * eps);
    }
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < grid.times.size(); ++j) {
    const double scale = std::max(fd[j].cwiseAbs().maxCoeff(), 1e-12);
    worst = std::max(worst, (roll.jacobians[j] - fd[j]).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

void print_check(std::ostream& out, bool pass, const std::string& what) {
  out << (pass ? "PASS  " : "FAIL  ") << what << "\n";
}

}  // namespace

std::unique_ptr<Controller> make_controller(const std::string& name, const RunConfig& cfg) {
  if (name == "fits") return std::make_unique<FitsController>(cfg.fits_config());
  if (name == "cbf") return std::make_unique<CbfQpController>(cfg.cbf_settings());
  if (name == "lqr") return std::make_unique<LqrTrackingController>(cfg.lqr_settings());
  throw ConfigError(0, "controller.name", "unknown controller '" + name + "'");
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    if (cfg.controllers.size() != 1) {
      throw ConfigError(0, "controller.name", "run takes exactly one controller; use compare for several");
    }
    int code = kExitOk;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(rep);
      const Scenario sc = cfg.build_scenario(seed);
      auto controller = make_controller(cfg.controllers.front(), cfg);
      const fs::path dir = rep_dir(cfg, rep);
      ensure_dir(dir);
      EpisodeOutcome res = run_one(*controller, sc, err);
      if (res.code == kExitInfeasibleStart) return res.code;
      if (res.log.records.empty()) return res.code;
      write_trajectory(dir / "trajectory.csv", res.log, sc);
      const std::vector<std::pair<std::string, Metrics>> rows = {{controller->name(), res.metrics}};
      write_metrics(dir / "metrics.csv", rows);
      out << sc.name << " seed " << seed << " -> " << dir.string() << "\n";
      io::write_metrics_table(out, rows);
      if (res.code != kExitOk) code = res.code;
    }
    return code;
  });
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    if (cfg.controllers.size() < 2) {
      throw ConfigError(0, "controller.name", "compare needs at least two controllers");
    }
    int code = kExitOk;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(rep);
      const Scenario sc = cfg.build_scenario(seed);
      const fs::path dir = rep_dir(cfg, rep);
      ensure_dir(dir);
      std::vector<std::pair<std::string, Metrics>> rows;
      for (const auto& name : cfg.controllers) {
        auto controller = make_controller(name, cfg);
        EpisodeOutcome res = run_one(*controller, sc, err);
        if (res.code == kExitInfeasibleStart) return res.code;
        if (res.log.records.empty()) return res.code;
        write_trajectory(dir / ("trajectory_" + name + ".csv"), res.log, sc);
        rows.emplace_back(name, res.metrics);
        if (res.code != kExitOk) code = res.code;
      }
      write_metrics(dir / "metrics.csv", rows);
      out << sc.name << " seed " << seed << " -> " << dir.string() << "\n";
      io::write_metrics_table(out, rows);
    }
    return code;
  });
}

int cmd_check(const RunConfig& cfg, const CheckOptions& options, std::ostream& out) {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    out << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  bool all = true;
  out << std::setprecision(3);

  const FitsConfig fcfg = cfg.fits_config();
  const auto rate = fcfg.rate_checks();
  const char* labels[] = {"gamma_safety", "gamma_actuation"};
  for (std::size_t i = 0; i < rate.size(); ++i) {
    const auto& c = rate[i];
    print_check(out, c.pass, std::string("kappa rate ") + labels[i] + " (" + cfg.scenario + "): " + c.message);
    all = all && c.pass;
  }

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const PlanarQuadrotorParams qp_params;
  std::vector<JacobianCase> cases;
  cases.push_back({std::make_shared<PlanarQuadrotor>(qp_params), default_fits_config("geofencing"),
                   (Eigen::VectorXd(6) << 1.0, 1.0, 0.3, 1.0, 1.0, 2.0).finished(),
                   Eigen::Vector2d::Constant(qp_params.hover_thrust()), 0.5 * qp_params.hover_thrust()});
  cases.push_back({std::make_shared<DoubleIntegrator>(), default_fits_config("navigation"),
                   Eigen::Vector4d(2.0, 2.0, 1.0, 1.0), Eigen::Vector2d::Zero(), 1.0});
  for (const auto& jc : cases) {
    const FaultyModel faulty(*jc.model);
    const DynamicsModel& checked = options.inject_jacobian_fault
                                       ? static_cast<const DynamicsModel&>(faulty)
                                       : *jc.model;
    const SampleGrid grid = jc.cfg.grid();
    double worst = 0.0;
    for (int i = 0; i < options.jacobian_samples; ++i) {
      Eigen::VectorXd x0 = jc.x_scale.unaryExpr([&](double s) { return s * unit(rng); });
      std::vector<Eigen::VectorXd> inputs;
      for (int k = 0; k < jc.cfg.num_steps; ++k) {
        inputs.push_back(jc.u_center.unaryExpr([&](double c) { return c + jc.u_spread * unit(rng); }));
      }
      const TrajectoryState s(x0, inputs, jc.cfg.horizon);
      worst = std::max(worst, jacobian_error(checked, *jc.model, s, grid));
    }
    const bool pass = worst <= 1e-4;
    std::ostringstream msg;
    msg << std::setprecision(3) << "jacobian vs central differences (" << jc.model->name() << ", "
        << options.jacobian_samples << " states): max rel error " << worst;
    print_check(out, pass, msg.str());
    all = all && pass;
  }

  int feasible_ok = 0;
  int infeasible_ok = 0;
  double worst_kkt = 0.0;
  for (int i = 0; i < options.qp_instances; ++i) {
    const int n = 6;
    const int m = 12;
    const Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return unit(rng); });
    qp::QPProblem p;
    p.P = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    p.q = Eigen::VectorXd::NullaryExpr(n, [&] { return unit(rng); });
    p.G = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return unit(rng); });
    const Eigen::VectorXd v0 = Eigen::VectorXd::NullaryExpr(n, [&] { return unit(rng); });
    p.b = p.G * v0 - Eigen::VectorXd::NullaryExpr(m, [&] { return 0.5 * (1.0 + unit(rng)); });
    const auto sol = qp::solve(p);
    if (sol.status == qp::QPStatus::Optimal) {
      const double viol = std::max(0.0, (p.b - p.G * sol.v).maxCoeff());
      worst_kkt = std::max(worst_kkt, sol.kkt_residual);
      if (viol <= 1e-6 && sol.kkt_residual <= 1e-6) ++feasible_ok;
    }
    // g'v >= 1 and -g'v >= 0 cannot both hold.
    qp::QPProblem bad = p;
    bad.G.row(0) = -bad.G.row(1);
    bad.b(1) = 1.0;
    bad.b(0) = 0.0;
    if (qp::solve(bad).status == qp::QPStatus::Infeasible) ++infeasible_ok;
  }
  {
    std::ostringstream msg;
    msg << std::setprecision(3) << "qp kkt on random feasible instances: " << feasible_ok << "/"
        << options.qp_instances << " (max residual " << worst_kkt << ")";
    const bool pass = feasible_ok == options.qp_instances;
    print_check(out, pass, msg.str());
    all = all && pass;
  }
  {
    const bool pass = infeasible_ok == options.qp_instances;
    print_check(out, pass, "qp infeasibility detection: " + std::to_string(infeasible_ok) + "/" +
                               std::to_string(options.qp_instances));
    all = all && pass;
  }
  out << (all ? "all checks passed\n" : "some checks failed\n");
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace fits::cli
