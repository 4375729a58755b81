#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fits/baselines.hpp"
#include "fits/sim.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

double h_dot(const fits::SafetyFunction& h, const fits::DynamicsModel& m, const Eigen::VectorXd& x,
             const Eigen::VectorXd& u) {
  return h.grad(x).dot(m.eval(x, u));
}

}  // namespace

TEST(SolveCare, DoubleIntegratorClosedForm) {
  // Per axis: A = [0 1; 0 0], B = [0; 1], Q = I, R = 1 gives K = [1, sqrt(3)].
  const fits::DoubleIntegrator di;
  const fits::LqrController lqr(di, Eigen::Vector4d::Zero(), Eigen::Vector2d::Zero(),
                                Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Identity(2, 2),
                                fixture::box(2, -1, 1));
  Eigen::MatrixXd expected(2, 4);
  expected << 1, 0, std::sqrt(3.0), 0, 0, 1, 0, std::sqrt(3.0);
  EXPECT_LE((lqr.gain() - expected).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(lqr.spectral_abscissa(), 0.0);
}

TEST(SolveCare, MatchesRiccatiIntegration) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd A = oracle::uniform_mat(rng, 4, 4, -1, 1);
    const Eigen::MatrixXd B = oracle::uniform_mat(rng, 4, 2, -1, 1);
    const Eigen::MatrixXd L = oracle::uniform_mat(rng, 4, 4, -1, 1);
    const Eigen::MatrixXd Q = L * L.transpose() + 0.5 * Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd R = Eigen::Vector2d(0.5, 2.0).asDiagonal();
    const Eigen::MatrixXd P = fits::solve_care(A, B, Q, R);
    const Eigen::MatrixXd ref = oracle::riccati_by_integration(A, B, Q, R);
    EXPECT_LE(oracle::rel_error(P, ref), 1e-6);
    const Eigen::MatrixXd res =
        A.transpose() * P + P * A - P * B * R.inverse() * B.transpose() * P + Q;
    EXPECT_LE(res.cwiseAbs().maxCoeff(), 1e-8 * P.cwiseAbs().maxCoeff());
  }
}

TEST(LqrController, EquilibriumAndClipping) {
  const fits::PlanarQuadrotor quad;
  const Eigen::Vector2d u_eq = Eigen::Vector2d::Constant(quad.params().hover_thrust());
  const auto bounds = fixture::box(2, 0.056, 0.297);
  const fits::LqrController lqr(quad, Eigen::VectorXd::Zero(6), u_eq, Eigen::MatrixXd::Identity(6, 6),
                                Eigen::MatrixXd::Identity(2, 2), bounds);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  x(1) = 1.0;
  EXPECT_LE((lqr.control(x, x) - u_eq).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::VectorXd far = x;
  far(1) = -100.0;
  const Eigen::VectorXd u = lqr.control(far, x);
  EXPECT_TRUE(bounds.contains(u));
  EXPECT_DOUBLE_EQ(u.maxCoeff(), 0.297);
}

TEST(ExponentialCbf, GainsFromClassKappa) {
  const auto h = fixture::circle(0, 0, 0.5);
  const auto repeated = fits::ExponentialCbf::from_class_kappa(h, 5.0);
  EXPECT_DOUBLE_EQ(repeated.k1(), 25.0);
  EXPECT_DOUBLE_EQ(repeated.k2(), 10.0);
  const auto split = fits::ExponentialCbf::from_class_kappa(h, 20.0, 1.0);
  EXPECT_DOUBLE_EQ(split.k1(), 20.0);
  EXPECT_DOUBLE_EQ(split.k2(), 21.0);
  EXPECT_THROW(fits::ExponentialCbf(h, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(fits::ExponentialCbf(h, 10.0, 1.0), std::invalid_argument);
  EXPECT_THROW(fits::ExponentialCbf(nullptr, 1.0, 2.0), std::invalid_argument);
}

TEST(ExponentialCbf, SecondOrderRowMatchesFiniteDifferences) {
  const fits::DoubleIntegrator di;
  const auto h = fixture::circle(0.4, -0.3, 0.5);
  const auto cbf = fits::ExponentialCbf::from_class_kappa(h, 4.0, 1.5);
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = oracle::uniform_vec(rng, 4, -2, 2);
    const Eigen::VectorXd u = oracle::uniform_vec(rng, 2, -1, 1);
    ASSERT_EQ(cbf.relative_degree(di, x), 2);
    const auto row = cbf.row(di, x);
    // h'' = d/dt (dh F) along the closed-loop flow under u.
    const auto dhdot = oracle::central_jacobian(
        [&](const Eigen::VectorXd& xx) { return Eigen::VectorXd::Constant(1, h_dot(*h, di, xx, u)); }, x);
    const double hddot = dhdot.row(0).dot(di.eval(x, u));
    const double condition = hddot + cbf.k2() * h_dot(*h, di, x, u) + cbf.k1() * h->value(x);
    EXPECT_NEAR(row.coeffs.dot(u) - row.lower_bound, condition, 1e-6 * std::max(1.0, std::abs(condition)));
  }
}

TEST(ExponentialCbf, FirstOrderRowOnQuadrotorTilt) {
  // A constraint on the vertical velocity sees thrust directly.
  const fits::PlanarQuadrotor quad;
  const auto h = fixture::halfspace((Eigen::VectorXd(6) << 0, 0, 0, 0, 1, 0).finished(), -1.0);
  const auto cbf = fits::ExponentialCbf::from_class_kappa(h, 6.0, 2.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  x(4) = -0.5;
  ASSERT_EQ(cbf.relative_degree(quad, x), 1);
  const Eigen::Vector2d u(0.1, 0.2);
  const auto row = cbf.row(quad, x);
  // Slower root of s^2 + 8 s + 12 is 2.
  const double expected = h_dot(*h, quad, x, u) + 2.0 * h->value(x);
  EXPECT_NEAR(row.coeffs.dot(u) - row.lower_bound, expected, 1e-12);
}

TEST(CbfQpStep, InactiveBarrierReturnsReference) {
  const fits::DoubleIntegrator di;
  const std::vector<fits::ExponentialCbf> barriers = {
      fits::ExponentialCbf::from_class_kappa(fixture::circle(5, 5, 0.5), 5.0)};
  const Eigen::Vector2d u_ref(0.3, -0.2);
  const auto res = fits::cbf_qp_step(di, Eigen::Vector4d::Zero(), u_ref, barriers, fixture::box(2, -1, 1),
                                     Eigen::MatrixXd::Identity(2, 2));
  ASSERT_EQ(res.status, fits::qp::QPStatus::Optimal);
  EXPECT_LE((res.u - u_ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CbfQpStep, ActiveBarrierHoldsWithEquality) {
  const fits::DoubleIntegrator di;
  const auto cbf = fits::ExponentialCbf::from_class_kappa(fixture::circle(1, 0, 0.5), 5.0, 1.0);
  // Heading at the obstacle; the reference pushes further in.
  const Eigen::Vector4d x(0.2, 0.05, 0.2, 0.0);
  const Eigen::Vector2d u_ref(1.0, 0.0);
  const auto bounds = fixture::box(2, -1, 1);
  const Eigen::Matrix2d W = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  const auto res = fits::cbf_qp_step(di, x, u_ref, {cbf}, bounds, W);
  ASSERT_EQ(res.status, fits::qp::QPStatus::Optimal);
  const auto row = cbf.row(di, x);
  EXPECT_NEAR(row.coeffs.dot(res.u), row.lower_bound, 1e-9);

  oracle::Mat G(5, 2);
  oracle::Vec b(5);
  G << row.coeffs, 1, 0, -1, 0, 0, 1, 0, -1;
  b << row.lower_bound, -1, -1, -1, -1;
  const auto ref = oracle::qp_enumerate(W, -2.0 * W * u_ref, G, b);
  ASSERT_TRUE(ref.feasible);
  EXPECT_LE((res.u - ref.v).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CbfQpStep, InfeasibleFallsBackToClippedReference) {
  const fits::DoubleIntegrator di;
  // Deep inside and rushing further in: no bounded input satisfies the row.
  const auto cbf = fits::ExponentialCbf::from_class_kappa(fixture::circle(0, 0, 1.0), 5.0);
  const Eigen::Vector4d x(0.5, 0.0, -3.0, 0.0);
  const auto res = fits::cbf_qp_step(di, x, Eigen::Vector2d(3, 0), {cbf}, fixture::box(2, -1, 1),
                                     Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(res.status, fits::qp::QPStatus::Infeasible);
  EXPECT_EQ(res.u, Eigen::Vector2d(1, 0));
}

TEST(Controllers, ResetRejectsInfeasibleStart) {
  const auto sc = fixture::double_integrator({fixture::circle(0, 0, 0.5)}, Eigen::Vector4d(0.1, 0, 0, 0));
  fits::CbfQpController cbf;
  EXPECT_THROW(cbf.reset(sc), fits::InfeasibleStart);
}

TEST(Controllers, LqrTracksConstantTarget) {
  auto sc = fixture::double_integrator({}, Eigen::Vector4d::Zero(), Eigen::Vector4d(0.5, -0.5, 0, 0));
  sc.t_sim = 10.0;
  fits::LqrTrackingController lqr;
  const auto log = fits::run_episode(lqr, sc);
  EXPECT_LT((log.records.back().x - Eigen::Vector4d(0.5, -0.5, 0, 0)).norm(), 1e-2);
}
