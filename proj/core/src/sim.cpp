#include "fits/sim.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fits/log.hpp"

namespace fits {
namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// 53-bit uniform double in [0, 1); identical on every standard library.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(rng);
}

}  // namespace

EpisodeLog run_episode(Controller& controller, const Scenario& scenario) {
  scenario.validate();
  EpisodeLog log;
  try {
    controller.reset(scenario);
  } catch (const NonFiniteState& e) {
    log.aborted = true;
    log.reason = std::string("reset: ") + e.what();
    log::warn("episode aborted: " + log.reason);
    return log;
  }

  const DynamicsModel& model = *scenario.model;
  const double dt = controller.period();
  const double plant_step = scenario.plant_step > 0.0 ? scenario.plant_step : dt / 10.0;
  const int substeps = std::max(1, static_cast<int>(std::llround(dt / plant_step)));
  const double h = dt / substeps;
  const long ticks = std::llround(scenario.t_sim / dt);

  log.records.reserve(static_cast<std::size_t>(ticks));
  Eigen::VectorXd x = scenario.x_init;
  for (long k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * dt;
    ControlOutput out;
    try {
      out = controller.step(x, t);
    } catch (const NonFiniteState& e) {
      log.aborted = true;
      log.reason = std::string("controller: ") + e.what();
      break;
    }
    EpisodeRecord rec;
    rec.t = t;
    rec.x = x;
    rec.u = out.u;
    rec.h = scenario.constraint_values(x);
    rec.qp_status = out.qp_status;
    rec.solve_time = out.compute_time;
    rec.objective = out.objective;
    log.records.push_back(std::move(rec));

    for (int i = 0; i < substeps; ++i) x += h * model.eval(x, out.u);
    if (!all_finite(x)) {
      std::ostringstream os;
      os << "non-finite plant state after t = " << t + dt;
      log.aborted = true;
      log.reason = os.str();
      break;
    }
  }
  if (log.aborted) log::warn("episode aborted: " + log.reason);
  return log;
}

Metrics compute_metrics(const EpisodeLog& log, const Scenario& scenario) {
  if (log.records.empty()) throw std::invalid_argument("compute_metrics: empty log");
  Metrics m;
  m.h_min = std::numeric_limits<double>::infinity();
  double sq_err = 0.0;
  double u_norm = 0.0;
  double time_sum = 0.0;
  const Reference& ref = scenario.objective->reference();
  for (const auto& r : log.records) {
    const Eigen::Vector2d e = scenario.position(r.x) - scenario.position(ref.state(r.t));
    sq_err += e.squaredNorm();
    u_norm += r.u.norm();
    time_sum += r.solve_time;
    if (r.h.size() > 0) {
      const double hmin = r.h.minCoeff();
      if (hmin < 0.0) ++m.violations;
      m.h_min = std::min(m.h_min, hmin);
    }
    if (r.qp_status && *r.qp_status != qp::QPStatus::Optimal) ++m.infeasible_ticks;
  }
  const double n = static_cast<double>(log.records.size());
  m.rmse = std::sqrt(sq_err / n);
  m.mean_u_norm = u_norm / n;
  m.comp_time_mean = time_sum / n;
  double var = 0.0;
  for (const auto& r : log.records) var += (r.solve_time - m.comp_time_mean) * (r.solve_time - m.comp_time_mean);
  m.comp_time_std = std::sqrt(var / n);
  if (scenario.goal) {
    const Eigen::Vector2d p = scenario.position(log.records.back().x);
    m.goal_reached = (p - scenario.goal->position).norm() <= scenario.goal->tolerance;
  }
  return m;
}

Scenario scenario_geofencing(const GeofencingParams& params) {
  params.quad.validate();
  if (!(params.x_min < params.x_max) || !(params.z_min < params.z_max)) {
    throw std::invalid_argument("geofence rectangle is empty");
  }
  auto model = std::make_shared<PlanarQuadrotor>(params.quad);
  Scenario sc;
  sc.name = "geofencing";
  sc.model = model;
  const auto axis = [](int i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(6);
    a(i) = 1.0;
    return a;
  };
  sc.constraints = {
      std::make_shared<HalfspaceConstraint>(axis(0), params.x_min),
      std::make_shared<HalfspaceConstraint>(-axis(0), -params.x_max),
      std::make_shared<HalfspaceConstraint>(axis(1), params.z_min),
      std::make_shared<HalfspaceConstraint>(-axis(1), -params.z_max),
  };
  sc.bounds = {Eigen::Vector2d::Constant(params.thrust_min), Eigen::Vector2d::Constant(params.thrust_max)};
  sc.u_equilibrium = Eigen::Vector2d::Constant(params.quad.hover_thrust());

  auto ref = std::make_shared<CircleReference>(params.circle_center, params.circle_radius,
                                               params.circle_period, 6, std::array<int, 2>{0, 1},
                                               std::array<int, 2>{3, 4});
  if (params.state_weight.size() != 6) throw std::invalid_argument("geofencing state weight must have 6 entries");
  sc.objective = std::make_shared<QuadraticTrackingObjective>(
      Eigen::MatrixXd(params.state_weight.asDiagonal()),
      params.input_weight * Eigen::MatrixXd::Identity(2, 2), ref, sc.u_equilibrium);
  if (params.x_init.size() == 0) {
    sc.x_init = Eigen::VectorXd::Zero(6);
    sc.x_init.head<2>() = ref->state(0.0).head<2>();
  } else {
    sc.x_init = params.x_init;
  }
  sc.t_sim = params.t_sim;
  sc.position_index = {0, 1};
  sc.validate();
  return sc;
}

std::vector<Obstacle> generate_layout(std::uint64_t seed, const LayoutParams& p) {
  if (p.count < 0 || !(p.radius_min > 0.0) || p.radius_max < p.radius_min) {
    throw std::invalid_argument("layout parameters out of range");
  }
  std::mt19937_64 rng(seed);
  std::vector<Obstacle> out;
  out.reserve(static_cast<std::size_t>(p.count));
  int tries = 0;
  while (static_cast<int>(out.size()) < p.count) {
    if (++tries > p.max_tries) {
      std::ostringstream os;
      os << "could not place " << p.count << " obstacles (placed " << out.size() << " in "
         << p.max_tries << " tries)";
      throw LayoutInfeasible(os.str());
    }
    Obstacle o;
    o.center = {uniform(rng, p.region_min.x(), p.region_max.x()),
                uniform(rng, p.region_min.y(), p.region_max.y())};
    o.radius = uniform(rng, p.radius_min, p.radius_max);
    if ((o.center - p.start).norm() - o.radius < p.clearance) continue;
    if ((o.center - p.goal).norm() - o.radius < p.clearance) continue;
    bool overlaps = false;
    for (const auto& q : out) {
      if ((o.center - q.center).norm() - o.radius - q.radius < p.min_gap) {
        overlaps = true;
        break;
      }
    }
    if (!overlaps) out.push_back(o);
  }
  return out;
}

Scenario scenario_navigation(const std::vector<Obstacle>& obstacles, const NavigationParams& params) {
  const LayoutParams& lp = params.layout;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& o = obstacles[i];
    const double hs = (lp.start - o.center).norm() - o.radius;
    const double hg = (lp.goal - o.center).norm() - o.radius;
    if (hs < lp.clearance || hg < lp.clearance) {
      std::ostringstream os;
      os << "obstacle " << i << " is within " << lp.clearance << " m of the start or goal";
      throw LayoutInfeasible(os.str());
    }
  }
  Scenario sc;
  sc.name = "navigation";
  sc.model = std::make_shared<DoubleIntegrator>();
  for (const auto& o : obstacles) {
    sc.constraints.push_back(
        std::make_shared<CircleConstraint>(o.center, o.radius, std::array<int, 2>{0, 1}, 4));
  }
  sc.bounds = {Eigen::Vector2d::Constant(-params.accel_limit), Eigen::Vector2d::Constant(params.accel_limit)};
  sc.u_equilibrium = Eigen::Vector2d::Zero();
  Eigen::VectorXd goal_state = Eigen::VectorXd::Zero(4);
  goal_state.head<2>() = lp.goal;
  if (params.state_weight.size() != 4) throw std::invalid_argument("navigation state weight must have 4 entries");
  sc.objective = std::make_shared<QuadraticTrackingObjective>(
      Eigen::MatrixXd(params.state_weight.asDiagonal()),
      params.input_weight * Eigen::MatrixXd::Identity(2, 2),
      std::make_shared<ConstantReference>(goal_state), sc.u_equilibrium);
  if (params.x_init.size() == 0) {
    sc.x_init = Eigen::VectorXd::Zero(4);
    sc.x_init.head<2>() = lp.start;
  } else {
    sc.x_init = params.x_init;
  }
  sc.goal = Goal{lp.goal, params.goal_tolerance};
  sc.t_sim = params.t_sim;
  sc.position_index = {0, 1};
  sc.validate();
  return sc;
}

FitsConfig default_fits_config(const std::string& scenario_name) {
  FitsConfig cfg;
  if (scenario_name == "geofencing") {
    cfg.num_steps = 20;
    cfg.horizon = 0.2;
    cfg.num_samples = 40;
    cfg.gamma_safety = 5.0;
    cfg.gamma_actuation = 5.0;
    cfg.dt = 0.01;
  } else if (scenario_name == "navigation") {
    cfg.num_steps = 20;
    cfg.horizon = 1.5;
    cfg.num_samples = 40;
    cfg.gamma_safety = 20.0;
    cfg.gamma_actuation = 20.0;
    cfg.reg_weight = 1e-2;
    cfg.margin = 0.5;
    cfg.dt = 0.01;
  } else {
    throw std::invalid_argument("unknown scenario '" + scenario_name + "'");
  }
  return cfg;
}

LqrSettings default_lqr_settings(const std::string& scenario_name) {
  LqrSettings s;
  if (scenario_name == "geofencing") {
    // Inverse squared tolerances: 0.1 m, 0.3 rad, 0.5 m/s, 2 rad/s, 0.05 N.
    s.state_weight = (Eigen::VectorXd(6) << 100.0, 100.0, 1.0 / 0.09, 4.0, 4.0, 0.25).finished();
    s.input_weight = Eigen::Vector2d::Constant(400.0);
  } else if (scenario_name != "navigation") {
    throw std::invalid_argument("unknown scenario '" + scenario_name + "'");
  }
  return s;
}

CbfSettings default_cbf_settings(const std::string& scenario_name) {
  CbfSettings s;
  s.lqr = default_lqr_settings(scenario_name);
  if (scenario_name == "geofencing") {
    s.gamma = 5.0;
  } else {
    s.gamma = 20.0;
    // Caps the braking demand p^2 h at the acceleration limit within 1 m.
    s.position_gain = 1.0;
  }
  return s;
}

}  // namespace fits
