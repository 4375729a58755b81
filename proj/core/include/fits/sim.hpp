#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fits/baselines.hpp"
#include "fits/controller.hpp"
#include "fits/dynamics.hpp"
#include "fits/scenario.hpp"

namespace fits {

/// One control tick: plant state before the input is applied.
struct EpisodeRecord {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  Eigen::VectorXd h;
  std::optional<qp::QPStatus> qp_status;
  double solve_time = 0.0;  // total controller time for the tick
  double objective = 0.0;
};

struct EpisodeLog {
  std::vector<EpisodeRecord> records;
  bool aborted = false;
  std::string reason;
};

/// Runs the closed loop for t_sim. Reset errors (InfeasibleStart) propagate; a
/// non-finite plant or plan state ends the episode with `aborted` set.
EpisodeLog run_episode(Controller& controller, const Scenario& scenario);

struct Metrics {
  double rmse = 0.0;
  int violations = 0;
  double h_min = 0.0;
  double mean_u_norm = 0.0;
  double comp_time_mean = 0.0;
  double comp_time_std = 0.0;
  bool goal_reached = false;
  int infeasible_ticks = 0;  // ticks whose QP did not return Optimal
};

/// Requires a non-empty log.
Metrics compute_metrics(const EpisodeLog& log, const Scenario& scenario);

// Quadrotor geofencing.

struct GeofencingParams {
  PlanarQuadrotorParams quad;
  double x_min = -1.0;
  double x_max = 1.0;
  double z_min = 0.5;
  double z_max = 1.5;
  Eigen::Vector2d circle_center{0.0, 1.0};
  double circle_radius = 0.75;
  double circle_period = 10.0;
  double thrust_min = 0.056;
  double thrust_max = 0.297;
  /// diag(Q) over [p_x, p_z, theta, v_x, v_z, omega].
  Eigen::VectorXd state_weight = (Eigen::VectorXd(6) << 5.0, 5.0, 0.0, 1.0, 1.0, 0.0).finished();
  double input_weight = 0.1;
  double t_sim = 10.0;
  /// Initial state; empty means at rest on the reference start point.
  Eigen::VectorXd x_init;
};

Scenario scenario_geofencing(const GeofencingParams& params = {});

// Cluttered navigation.

class LayoutInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Obstacle {
  Eigen::Vector2d center;
  double radius = 0.0;
};

struct LayoutParams {
  int count = 30;
  Eigen::Vector2d start{0.0, 0.0};
  Eigen::Vector2d goal{4.0, 4.0};
  /// Obstacle centers are drawn uniformly from this box.
  Eigen::Vector2d region_min{0.3, 0.3};
  Eigen::Vector2d region_max{3.7, 3.7};
  double radius_min = 0.1;
  double radius_max = 0.3;
  /// Minimum h at the start and goal positions.
  double clearance = 0.2;
  /// Minimum surface-to-surface distance between obstacles.
  double min_gap = 0.15;
  int max_tries = 10000;
};

/// Deterministic for a given seed on every platform.
std::vector<Obstacle> generate_layout(std::uint64_t seed, const LayoutParams& params = {});

struct NavigationParams {
  LayoutParams layout;
  double accel_limit = 1.0;
  /// diag(Q) over [p_x, p_y, v_x, v_y].
  Eigen::VectorXd state_weight = (Eigen::VectorXd(4) << 1.0, 1.0, 0.0, 0.0).finished();
  double input_weight = 0.01;
  double t_sim = 8.0;
  double goal_tolerance = 0.1;
  /// Initial state; empty means at rest on the layout start.
  Eigen::VectorXd x_init;
};

inline constexpr std::uint64_t kDefaultNavigationSeed = 7;

/// Throws LayoutInfeasible if the start or goal is within `clearance` of an
/// obstacle.
Scenario scenario_navigation(const std::vector<Obstacle>& obstacles,
                             const NavigationParams& params = {});

FitsConfig default_fits_config(const std::string& scenario_name);
CbfSettings default_cbf_settings(const std::string& scenario_name);
LqrSettings default_lqr_settings(const std::string& scenario_name);

}  // namespace fits
