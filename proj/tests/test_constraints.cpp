#include <random>

#include <gtest/gtest.h>

#include "fits/constraints.hpp"
#include "fits/dynamics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using fits::LinearClassKappa;
using fits::TrajectoryState;

TEST(CircleConstraint, GradientAndHessianMatchFiniteDifferences) {
  const fits::CircleConstraint c(Eigen::Vector2d(0.5, -0.2), 0.3, {0, 1}, 4);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = oracle::uniform_vec(rng, 4, -2, 2);
    const auto g = oracle::central_jacobian(
        [&](const Eigen::VectorXd& xx) { return Eigen::VectorXd::Constant(1, c.value(xx)); }, x);
    EXPECT_LE(oracle::rel_error(c.grad(x), g), 1e-6);
    const auto H = oracle::central_jacobian(
        [&](const Eigen::VectorXd& xx) { return Eigen::VectorXd(c.grad(xx).transpose()); }, x);
    EXPECT_LE(oracle::rel_error(c.hessian(x), H), 1e-5);
  }
}

TEST(CircleConstraint, RejectsDegenerateRadius) {
  EXPECT_THROW(fits::CircleConstraint(Eigen::Vector2d::Zero(), 0.0, {0, 1}, 4), std::invalid_argument);
  EXPECT_THROW(fits::CircleConstraint(Eigen::Vector2d::Zero(), -1.0, {0, 1}, 4), std::invalid_argument);
}

TEST(HalfspaceConstraint, Value) {
  const fits::HalfspaceConstraint h(Eigen::Vector2d(1, -1), 0.5);
  EXPECT_DOUBLE_EQ(h.value(Eigen::Vector2d(2, 1)), 0.5);
  EXPECT_EQ(h.hessian(Eigen::Vector2d::Zero()), Eigen::MatrixXd::Zero(2, 2));
}

TEST(SafetyRow, BoundaryWithZeroDrift) {
  const fits::HalfspaceConstraint h(Eigen::Vector4d(1, 0, 0, 0), 0.0);
  const TrajectoryState s(Eigen::Vector4d::Zero(), {Eigen::Vector2d::Zero()}, 0.1);
  const auto roll = fits::rollout_with_sensitivity(s, fits::DoubleIntegrator(),
                                                   fits::SampleGrid::uniform(0.1, 2, 1));
  const auto dyn = fits::trajectory_drift(s, fits::DoubleIntegrator());
  const auto row = fits::safety_row(h, roll.states[1], roll.jacobians[1], dyn, LinearClassKappa(5.0));
  EXPECT_EQ(row.lower_bound, 0.0);
}

TEST(SafetyRow, ZeroTimeSampleHasNoInputAuthority) {
  const fits::DoubleIntegrator di;
  const fits::HalfspaceConstraint h(Eigen::Vector4d(1, 0.5, 0, 0), -1.0);
  const Eigen::Vector4d x0(0.2, 0.1, -0.4, 0.3);
  const Eigen::Vector2d u0(0.3, -0.7);
  const TrajectoryState s(x0, {u0, u0}, 0.2);
  const auto roll = fits::rollout_with_sensitivity(s, di, fits::SampleGrid::uniform(0.2, 3, 1));
  const auto dyn = fits::trajectory_drift(s, di);
  const auto row = fits::safety_row(h, roll.states[0], roll.jacobians[0], dyn, LinearClassKappa(5.0));
  EXPECT_EQ(row.coeffs, Eigen::RowVectorXd::Zero(4));
  const double expected = -5.0 * h.value(x0) - h.grad(x0).dot(di.eval(x0, u0));
  EXPECT_NEAR(row.lower_bound, expected, 1e-14);
}

TEST(SafetyRow, ReconstructsDirectionalDerivative) {
  const fits::DoubleIntegrator di;
  const auto circle = fixture::circle(1.0, 0.5, 0.3);
  std::mt19937_64 rng(2);
  const auto grid = fits::SampleGrid::uniform(1.0, 6, 2);
  const LinearClassKappa kappa(7.0);
  const double margin = 0.05;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::VectorXd> inputs;
    for (int i = 0; i < 4; ++i) inputs.push_back(oracle::uniform_vec(rng, 2, -1, 1));
    const TrajectoryState s(oracle::uniform_vec(rng, 4, -1, 1), inputs, 1.0);
    const Eigen::VectorXd v = oracle::uniform_vec(rng, 8, -2, 2);
    const auto roll = fits::rollout_with_sensitivity(s, di, grid);
    const auto dyn = fits::trajectory_drift(s, di);
    const Eigen::VectorXd sdot = dyn.rate(v);
    for (int j = 1; j < grid.size(); ++j) {
      const auto row = fits::safety_row(*circle, roll.states[static_cast<std::size_t>(j)],
                                        roll.jacobians[static_cast<std::size_t>(j)], dyn, kappa, margin);
      const double h = circle->value(roll.states[static_cast<std::size_t>(j)]);
      const double hdot_row = row.coeffs.dot(v) - (row.lower_bound - margin + kappa(h));
      auto h_along = [&](const Eigen::VectorXd& e) {
        const auto t = TrajectoryState::from_flat(s.flatten() + e(0) * sdot, 4, 2, 4, 1.0);
        const auto r = fits::rollout_with_sensitivity(t, di, grid);
        return Eigen::VectorXd::Constant(1, circle->value(r.states[static_cast<std::size_t>(j)]));
      };
      const double hdot_fd = oracle::central_jacobian(h_along, Eigen::VectorXd::Zero(1))(0, 0);
      EXPECT_LE(std::abs(hdot_row - hdot_fd), 1e-4 * std::max(1.0, std::abs(hdot_fd)));
    }
  }
}

TEST(ActuationRows, AtLowerBoundDemandsNonNegativeRate) {
  const TrajectoryState s(Eigen::Vector4d::Zero(), {Eigen::Vector2d(-1, 0.5)}, 0.1);
  const auto rows = fits::actuation_rows(s, fixture::box(2, -1, 1), LinearClassKappa(20.0));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].coeffs, Eigen::RowVector2d(1, 0));
  EXPECT_EQ(rows[0].lower_bound, 0.0);
}

TEST(ActuationRows, QuadrotorMidpointGain5) {
  const double lo = 0.056;
  const double hi = 0.297;
  const double mid = 0.5 * (lo + hi);
  const TrajectoryState s(Eigen::VectorXd::Zero(6), {Eigen::Vector2d(mid, mid)}, 0.01);
  const auto rows = fits::actuation_rows(s, fixture::box(2, lo, hi), LinearClassKappa(5.0));
  EXPECT_NEAR(rows[0].lower_bound, -0.6025, 1e-12);  // v >= -5 * 0.1205
  EXPECT_NEAR(rows[1].lower_bound, -0.6025, 1e-12);  // -v >= -5 * 0.1205
  EXPECT_EQ(rows[1].coeffs, Eigen::RowVector2d(-1, 0));
}

TEST(ActuationRows, SymmetricUnitBoxGain20) {
  const TrajectoryState s(Eigen::Vector4d::Zero(), {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()}, 0.2);
  const auto rows = fits::actuation_rows(s, fixture::box(2, -1, 1), LinearClassKappa(20.0));
  ASSERT_EQ(rows.size(), 8u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].lower_bound, -20.0);
    EXPECT_EQ(rows[k].coeffs.sum(), k % 2 == 0 ? 1.0 : -1.0);
  }
}

TEST(KappaRateCheck, Cases) {
  EXPECT_TRUE(fits::kappa_rate_check(LinearClassKappa(5.0), 0.01, 10.0).pass);
  for (double rho : {1.5, 4.0, 10.0}) {
    EXPECT_FALSE(fits::kappa_rate_check(LinearClassKappa(100.0), 0.01, rho).pass);
  }
  EXPECT_THROW(LinearClassKappa(0.0), std::invalid_argument);
}

TEST(ActuationBounds, ClipAndContains) {
  const auto b = fixture::box(2, -1, 1);
  EXPECT_EQ(b.clip(Eigen::Vector2d(2, -3)), Eigen::Vector2d(1, -1));
  EXPECT_TRUE(b.contains(Eigen::Vector2d(1, -1)));
  EXPECT_FALSE(b.contains(Eigen::Vector2d(1.1, 0)));
  fits::ActuationBounds bad{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
