#pragma once

#include <memory>
#include <ostream>
#include <string>

#include "config.hpp"

namespace fits::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitInfeasibleStart = 2,
  kExitAborted = 3,
  kExitCheckFailed = 4,
};

std::unique_ptr<Controller> make_controller(const std::string& name, const RunConfig& cfg);

/// One controller, `repetitions` episodes with seeds seed, seed + 1, ...
/// Writes trajectory.csv and metrics.csv per episode (under rep_<i>/ when
/// repeating).
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Every listed controller on the same scenario and seed. Writes
/// trajectory_<controller>.csv and one metrics.csv with a row per controller.
int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct CheckOptions {
  /// Scales the input Jacobian of the checked models so the gradient check
  /// must fail. Test hook.
  bool inject_jacobian_fault = false;
  int jacobian_samples = 20;
  int qp_instances = 50;
  unsigned seed = 1;
};

/// Class-kappa rate checks for the configured scenario, finite-difference
/// Jacobian checks for both models, and QP KKT self-tests.
int cmd_check(const RunConfig& cfg, const CheckOptions& options, std::ostream& out);

}  // namespace fits::cli
