#pragma once

#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fits::qp {

/// minimize v'Pv + q'v  subject to  Gv >= b.
struct QPProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd G;
  Eigen::VectorXd b;
};

enum class QPStatus { Optimal, Infeasible, MaxIterations };

std::string_view to_string(QPStatus status);

struct QPSolution {
  Eigen::VectorXd v;
  QPStatus status = QPStatus::MaxIterations;
  double kkt_residual = 0.0;
  /// Indices of constraints in the final working set.
  std::vector<int> active_set;
  /// Lagrange multipliers, one per row of G (zero for inactive rows).
  Eigen::VectorXd multipliers;
  /// For Infeasible: y >= 0 with G'y = 0 and b'y > 0. Empty otherwise.
  Eigen::VectorXd certificate;
  int iterations = 0;
};

struct QPSettings {
  double pd_tolerance = 1e-10;
  double feasibility_tolerance = 1e-8;
  int max_iterations = 200;
};

/// P fails the symmetric positive-definite check.
class IllConditioned : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense dual active-set solve (Goldfarb-Idnani). Deterministic and reentrant.
QPSolution solve(const QPProblem& problem, const QPSettings& settings = {});

/// max of stationarity, primal infeasibility, dual infeasibility and
/// complementarity errors (infinity norm).
double kkt_residual(const QPProblem& problem, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& multipliers);

}  // namespace fits::qp
