#include "fits/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fits::qp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const QPProblem& p, const QPSettings& settings) {
  const auto n = p.P.rows();
  if (n == 0 || p.P.cols() != n || p.q.size() != n) {
    throw std::invalid_argument("QP: P must be square and match q");
  }
  if (p.G.rows() != p.b.size() || (p.G.rows() > 0 && p.G.cols() != n)) {
    throw std::invalid_argument("QP: G and b dimensions mismatch");
  }
  if (!p.P.allFinite() || !p.q.allFinite() || !p.G.allFinite() || !p.b.allFinite()) {
    throw std::invalid_argument("QP: non-finite problem data");
  }
  const double scale = std::max(1.0, p.P.cwiseAbs().maxCoeff());
  if (!(p.P - p.P.transpose()).isZero(1e-12 * scale)) {
    throw IllConditioned("QP: P is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.P, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < settings.pd_tolerance) {
    throw IllConditioned("QP: P is not positive definite (min eigenvalue " +
                         std::to_string(es.eigenvalues().minCoeff()) + ")");
  }
}

// Reflection [c s; s -c] chosen so that (a, b) -> (h, 0) with h >= 0.
struct Givens {
  double c = 1.0;
  double s = 0.0;
  double h = 0.0;
};

Givens make_givens(double a, double b) {
  Givens g;
  g.h = std::hypot(a, b);
  if (g.h == 0.0) return g;
  g.c = a / g.h;
  g.s = b / g.h;
  return g;
}

void rotate_columns(Eigen::MatrixXd& M, Eigen::Index i, Eigen::Index j, const Givens& g) {
  for (Eigen::Index k = 0; k < M.rows(); ++k) {
    const double a = M(k, i);
    const double b = M(k, j);
    M(k, i) = g.c * a + g.s * b;
    M(k, j) = g.s * a - g.c * b;
  }
}

// Working-set factorization: J' N = [R; 0] with N the active normals.
class WorkingSet {
 public:
  explicit WorkingSet(Eigen::MatrixXd J) : J_(std::move(J)), R_(Eigen::MatrixXd::Zero(J_.rows(), J_.rows())) {}

  int size() const { return iq_; }
  const Eigen::MatrixXd& J() const { return J_; }

  // d = J' n; returns false if n is (numerically) dependent on the active set.
  bool add(Eigen::VectorXd d) {
    const auto n = J_.rows();
    for (Eigen::Index j = n - 1; j > iq_; --j) {
      const Givens g = make_givens(d(j - 1), d(j));
      if (g.h == 0.0) continue;
      d(j - 1) = g.h;
      d(j) = 0.0;
      rotate_columns(J_, j - 1, j, g);
    }
    if (std::abs(d(iq_)) <= 1e-14 * std::max(1.0, d.head(iq_ + 1).norm())) return false;
    R_.col(iq_).head(iq_ + 1) = d.head(iq_ + 1);
    ++iq_;
    return true;
  }

  void remove(int l) {
    for (int c = l; c + 1 < iq_; ++c) R_.col(c) = R_.col(c + 1);
    R_.col(iq_ - 1).setZero();
    --iq_;
    for (int j = l; j < iq_; ++j) {
      const Givens g = make_givens(R_(j, j), R_(j + 1, j));
      if (g.h == 0.0) continue;
      R_(j, j) = g.h;
      R_(j + 1, j) = 0.0;
      for (int k = j + 1; k < iq_; ++k) {
        const double a = R_(j, k);
        const double b = R_(j + 1, k);
        R_(j, k) = g.c * a + g.s * b;
        R_(j + 1, k) = g.s * a - g.c * b;
      }
      rotate_columns(J_, j, j + 1, g);
    }
  }

  Eigen::VectorXd solve_r(const Eigen::VectorXd& d) const {
    if (iq_ == 0) return {};
    return R_.topLeftCorner(iq_, iq_).triangularView<Eigen::Upper>().solve(d.head(iq_));
  }

 private:
  Eigen::MatrixXd J_;
  Eigen::MatrixXd R_;
  int iq_ = 0;
};

QPSolution finish(const QPProblem& p, Eigen::VectorXd x, QPStatus status,
                  const std::vector<int>& active, const Eigen::VectorXd& u, int iterations) {
  QPSolution sol;
  sol.status = status;
  sol.iterations = iterations;
  sol.active_set = active;
  sol.multipliers = Eigen::VectorXd::Zero(p.G.rows());
  for (std::size_t a = 0; a < active.size(); ++a) {
    sol.multipliers(active[a]) = u(static_cast<Eigen::Index>(a));
  }
  sol.kkt_residual = kkt_residual(p, x, sol.multipliers);
  sol.v = std::move(x);
  return sol;
}

}  // namespace

std::string_view to_string(QPStatus status) {
  switch (status) {
    case QPStatus::Optimal: return "optimal";
    case QPStatus::Infeasible: return "infeasible";
    case QPStatus::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

double kkt_residual(const QPProblem& p, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& multipliers) {
  Eigen::VectorXd stat = 2.0 * p.P * v + p.q;
  double primal = 0.0;
  double comp = 0.0;
  double dual = 0.0;
  if (p.G.rows() > 0) {
    stat.noalias() -= p.G.transpose() * multipliers;
    const Eigen::VectorXd slack = p.G * v - p.b;
    primal = std::max(0.0, -slack.minCoeff());
    dual = std::max(0.0, -multipliers.minCoeff());
    comp = (multipliers.array() * slack.array()).abs().maxCoeff();
  }
  return std::max({stat.cwiseAbs().maxCoeff(), primal, dual, comp});
}

QPSolution solve(const QPProblem& p, const QPSettings& settings) {
  validate(p, settings);
  const auto n = p.P.rows();
  const auto m = p.G.rows();

  // Objective in the 1/2 x'Hx + q'x convention.
  const Eigen::MatrixXd H = 2.0 * p.P;
  const Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) throw IllConditioned("QP: Cholesky factorization failed");
  const Eigen::MatrixXd Linv =
      llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n));
  WorkingSet ws(Linv.transpose());

  Eigen::VectorXd x = llt.solve(-p.q);
  std::vector<int> active;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  std::vector<char> is_active(static_cast<std::size_t>(m), 0);
  int iterations = 0;

  auto violation_tol = [&](Eigen::Index k) {
    const double scale = std::max({1.0, std::abs(p.b(k)),
                                   p.G.row(k).cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff()});
    return settings.feasibility_tolerance * scale;
  };

  while (true) {
    // Most violated inactive constraint (relative to its tolerance).
    Eigen::Index pick = -1;
    double worst = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (is_active[static_cast<std::size_t>(k)]) continue;
      const double slack = p.G.row(k).dot(x) - p.b(k);
      if (slack < -violation_tol(k) && slack < worst) {
        worst = slack;
        pick = k;
      }
    }
    if (pick < 0) return finish(p, std::move(x), QPStatus::Optimal, active, u, iterations);

    const Eigen::VectorXd np = p.G.row(pick).transpose();
    double u_new = 0.0;
    while (true) {
      if (++iterations > settings.max_iterations) {
        return finish(p, std::move(x), QPStatus::MaxIterations, active, u, iterations - 1);
      }
      const int iq = ws.size();
      const Eigen::VectorXd d = ws.J().transpose() * np;
      const Eigen::VectorXd z = ws.J().rightCols(n - iq) * d.tail(n - iq);
      const Eigen::VectorXd r = ws.solve_r(d);

      double t1 = kInf;
      int drop = -1;
      for (int a = 0; a < iq; ++a) {
        if (r(a) > 0.0) {
          const double ratio = u(a) / r(a);
          if (ratio < t1) {
            t1 = ratio;
            drop = a;
          }
        }
      }
      const double zn = z.dot(np);
      const double slack = np.dot(x) - p.b(pick);
      double t2 = kInf;
      if (zn > 1e-12 * std::max(d.squaredNorm(), std::numeric_limits<double>::min())) {
        t2 = -slack / zn;
      }

      if (t1 == kInf && t2 == kInf) {
        QPSolution sol = finish(p, std::move(x), QPStatus::Infeasible, active, u, iterations);
        // n_p = sum_a r_a n_a with r <= 0, so y = e_p - sum r_a e_a is a Farkas ray.
        sol.certificate = Eigen::VectorXd::Zero(m);
        sol.certificate(pick) = 1.0;
        for (int a = 0; a < iq; ++a) sol.certificate(active[static_cast<std::size_t>(a)]) = -r(a);
        return sol;
      }

      if (t2 == kInf) {
        // Pure dual step: the primal cannot move until a constraint leaves.
        u.head(iq) -= t1 * r;
        u_new += t1;
      } else {
        const double t = std::min(t1, t2);
        x += t * z;
        if (iq > 0) u.head(iq) -= t * r;
        u_new += t;
        if (t == t2) {
          if (!ws.add(d)) {
            return finish(p, std::move(x), QPStatus::MaxIterations, active, u, iterations);
          }
          active.push_back(static_cast<int>(pick));
          is_active[static_cast<std::size_t>(pick)] = 1;
          u(iq) = u_new;
          break;
        }
      }
      // Partial step: constraint `drop` leaves the working set.
      is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])] = 0;
      active.erase(active.begin() + drop);
      for (int a = drop; a + 1 < iq; ++a) u(a) = u(a + 1);
      u(iq - 1) = 0.0;
      ws.remove(drop);
    }
  }
}

}  // namespace fits::qp
