#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ioss/builtins.hpp"
#include "ioss/constants.hpp"
#include "ioss/discretize.hpp"
#include "ioss/error.hpp"
#include "oracles.hpp"

using namespace ioss;

namespace {

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }
const Eigen::VectorXd kNone(0);

}  // namespace

TEST(Steps, ZeroSystemIsFixed) {
  const SystemSpec sys = builtin_model("zero");
  EXPECT_EQ(euler_step(sys, v1(0.3), v1(1.0), kNone, 0.5)[0], 0.3);
  EXPECT_EQ(rk2_step(sys, v1(0.3), v1(1.0), kNone, 0.5)[0], 0.3);
}

TEST(Steps, ScalarLinearHand) {
  const SystemSpec sys = builtin_model("scalar_linear");
  EXPECT_NEAR(euler_step(sys, v1(1.0), v1(0.0), kNone, 0.1)[0], 0.9, 1e-15);
  EXPECT_NEAR(rk2_step(sys, v1(1.0), v1(0.0), kNone, 0.1)[0], 0.905, 1e-15);
  for (double tau : {0.2, 0.05}) {
    for (double x : {-0.7, 0.4}) {
      const double diff = rk2_step(sys, v1(x), v1(0.0), kNone, tau)[0] -
                          euler_step(sys, v1(x), v1(0.0), kNone, tau)[0];
      EXPECT_NEAR(std::abs(diff), tau * tau / 2 * std::abs(x), 1e-15);
    }
  }
  EXPECT_THROW(euler_step(sys, v1(1.0), v1(0.0), kNone, 0.0), Error);
}

TEST(Steps, ReactorEuler) {
  const SystemSpec sys = builtin_model("reactor");
  const Eigen::Vector2d x(0.25, 0.3);
  const Eigen::VectorXd out = euler_step(sys, x, Eigen::Vector3d::Zero(), kNone, 0.01);
  const Eigen::Vector2d f(-2 * 0.16 * 0.0625 + 2 * 0.0064 * 0.3, 0.16 * 0.0625 - 0.0064 * 0.3);
  EXPECT_LT((out - (x + 0.01 * f)).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(SchemeJacobiansTest, ScalarHand) {
  const SystemSpec sys = builtin_model("scalar_linear");
  const PointEval pe = eval_point(sys, v1(0.2), v1(0.1), kNone);
  const SchemeJacobians e = jacobians_euler(pe, 0.1);
  EXPECT_NEAR(e.a_tilde(0, 0), 0.9, 1e-15);
  EXPECT_NEAR(e.b_tilde(0, 0), 0.1, 1e-15);
  const SchemeJacobians r = jacobians_rk2(sys, pe, 0.1);
  EXPECT_NEAR(r.a_tilde(0, 0), 0.905, 1e-15);
  EXPECT_NEAR(r.b_tilde(0, 0), 0.095, 1e-15);
}

TEST(SchemeJacobiansTest, LinearRk2IsStabilityPolynomial) {
  const SystemSpec sys = parse_model("dims 2 1 0 1\nf1 = -x1 + 2*x2 + u1\nf2 = -3*x2 + 0.5*x1\nh1 = x1\n");
  const double tau = 0.3;
  const SchemeJacobians r = jacobians_rk2(sys, Eigen::Vector2d(0.1, 0.2), v1(0.4), kNone, tau);
  Eigen::Matrix2d A;
  A << -1, 2, 0.5, -3;
  const Eigen::Matrix2d want = Eigen::Matrix2d::Identity() + tau * A + tau * tau / 2 * A * A;
  EXPECT_LT((r.a_tilde - want).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((r.a_increment - (want - Eigen::Matrix2d::Identity())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SchemeJacobiansTest, MatchAdThroughStep) {
  std::mt19937_64 rng(17);
  for (const std::string& name : builtin_names()) {
    const SystemSpec sys = builtin_model(name);
    const Dims& d = sys.dims();
    const GridSpec g = builtin_grid(name, 2);
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd z = oracle::uniform_in(g.lower(), g.upper(), rng);
      const Eigen::VectorXd x = z.head(d.n), u = z.segment(d.n, d.q), dd = z.tail(d.m);
      const double tau = std::exp(std::uniform_real_distribution<double>(std::log(1e-3), 0.0)(rng));
      const PointEval pe = eval_point(sys, z);
      const SchemeJacobians e = jacobians_euler(pe, tau);
      const auto eo = oracle::ad_through_step(sys, false, x, u, dd, tau);
      EXPECT_LT(oracle::rel_err(e.a_tilde, eo.a_tilde), 1e-12) << name;
      EXPECT_LT(oracle::rel_err(e.b_tilde, eo.b_tilde), 1e-12) << name;
      const SchemeJacobians r = jacobians_rk2(sys, x, u, dd, tau);
      const auto ro = oracle::ad_through_step(sys, true, x, u, dd, tau);
      EXPECT_LT(oracle::rel_err(r.a_tilde, ro.a_tilde), 1e-12) << name;
      EXPECT_LT(oracle::rel_err(r.b_tilde, ro.b_tilde), 1e-12) << name;
    }
  }
}

TEST(SchemeJacobiansTest, Rk2MatchesFiniteDifferenceOfStep) {
  const SystemSpec sys = builtin_model("reactor");
  const Eigen::Vector2d x(0.3, 0.2);
  const Eigen::Vector3d u(0.05, -0.02, 0.0);
  const double tau = 0.4;
  const SchemeJacobians r = jacobians_rk2(sys, x, u, kNone, tau);
  const double h = 1e-6;
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector2d xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const Eigen::VectorXd col = (rk2_step(sys, xp, u, kNone, tau) - rk2_step(sys, xm, u, kNone, tau)) / (2 * h);
    EXPECT_LT((col - r.a_tilde.col(k)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Defect, EulerIsZero) {
  std::mt19937_64 rng(19);
  for (const std::string& name : builtin_names()) {
    const SystemSpec sys = builtin_model(name);
    const GridSpec g = builtin_grid(name, 2);
    for (int i = 0; i < 50; ++i) {
      const PointEval pe = eval_point(sys, oracle::uniform_in(g.lower(), g.upper(), rng));
      for (double tau : {1.0, 0.1, 1e-3}) EXPECT_LE(consistency_defect(sys, Scheme::Euler, pe, tau), 1e-14);
    }
  }
}

TEST(Defect, Rk2ScalarIsHalfTau) {
  const SystemSpec sys = builtin_model("scalar_linear");
  for (double tau : {0.1, 0.02}) {
    EXPECT_NEAR(consistency_defect(sys, Scheme::RK2, v1(0.5), v1(0.0), kNone, tau), tau / 2, 1e-14);
  }
}

TEST(Residual, EulerZeroRk2Hand) {
  const SystemSpec sys = builtin_model("scalar_linear");
  EXPECT_EQ(residual_r(sys, Scheme::Euler, v1(1.0), v1(0.0), kNone, 0.1)[0], 0.0);
  EXPECT_NEAR(residual_r(sys, Scheme::RK2, v1(1.0), v1(0.0), kNone, 0.1)[0], 0.005, 1e-15);
}

TEST(Residual, Rk2IsSecondOrder) {
  for (const char* name : {"reactor", "sine"}) {
    const SystemSpec sys = builtin_model(name);
    const Dims& d = sys.dims();
    const GridSpec g = builtin_grid(name, 2);
    const Eigen::VectorXd z = 0.3 * g.lower() + 0.7 * g.upper();
    const Eigen::VectorXd x = z.head(d.n), u = z.segment(d.n, d.q);
    const double r1 = residual_r(sys, Scheme::RK2, x, u, kNone, 0.02).norm();
    const double r2 = residual_r(sys, Scheme::RK2, x, u, kNone, 0.01).norm();
    ASSERT_GT(r2, 0.0);
    EXPECT_GE(r1 / r2, 3.5) << name;
    EXPECT_LE(r1 / r2, 4.5) << name;
  }
}

TEST(Bound, Examples) {
  const ConsistencyBound e = consistency_bound(Scheme::Euler, 3.0);
  EXPECT_EQ(e.rho(1.0), 0.0);
  EXPECT_TRUE(e.tau0_unbounded());
  const ConsistencyBound lin = consistency_bound(Scheme::RK2, std::sqrt(2.0), 0.0, 5.0);
  EXPECT_NEAR(lin.rho(0.3), 0.3, 1e-15);
  const ConsistencyBound b = consistency_bound(Scheme::RK2, 1.0, 1.0, 2.0, 0.05);
  EXPECT_DOUBLE_EQ(b.tau0, 0.1);
  EXPECT_NEAR(b.rho(0.1), 0.15, 1e-15);
  EXPECT_THROW(consistency_bound(Scheme::RK2, -1.0), Error);
  EXPECT_THROW(consistency_bound(Scheme::RK2, 1.0, -1.0, 1.0), Error);
  EXPECT_THROW(consistency_bound(Scheme::RK2, 1.0, 1.0, 1.0, 0.0), Error);
}

TEST(Bound, RhoNondecreasing) {
  const ConsistencyBound b = consistency_bound(Scheme::RK2, 0.7, 0.4, 1.3);
  double prev = 0.0;
  for (double tau = 1e-6; tau < 1.0; tau *= 1.7) {
    EXPECT_GE(b.rho(tau), prev);
    prev = b.rho(tau);
  }
  EXPECT_LT(b.rho(1e-12), 1e-11);
}

TEST(ConsistencyGrid, ScalarRk2WithinBound) {
  const SystemSpec sys = builtin_model("scalar_linear");
  const GridSpec g = builtin_grid("scalar_linear", 11);
  const ConsistencyBound b = consistency_bound(Scheme::RK2, estimate_Lf(sys, g), 0.0, 0.0);
  const ConsistencyReport r = check_consistency_grid(sys, g, 0.1, b);
  EXPECT_NEAR(r.max_defect, 0.05, 1e-14);
  EXPECT_NEAR(r.rho_of_tau, 0.1, 1e-14);
  EXPECT_TRUE(r.bound_satisfied);
  EXPECT_EQ(r.violations, 0u);
}

TEST(ConsistencyGrid, ForcedZeroSlopeFailsOnNonlinear) {
  // Shrinking L_f below the true value makes rho too small for the reactor.
  const SystemSpec sys = builtin_model("reactor");
  const GridSpec g = builtin_grid("reactor", 4);
  const ConsistencyBound b = consistency_bound_with_slope(Scheme::RK2, 0.01, 0.0);
  const ConsistencyReport r = check_consistency_grid(sys, g, 0.5, b);
  EXPECT_FALSE(r.bound_satisfied);
  EXPECT_GT(r.violations, 0u);
}

TEST(SchemeNames, RoundTrip) {
  EXPECT_EQ(parse_scheme("RK2"), Scheme::RK2);
  EXPECT_EQ(parse_scheme("euler"), Scheme::Euler);
  EXPECT_EQ(to_string(Scheme::RK2), "rk2");
  EXPECT_THROW(parse_scheme("rk4"), Error);
}
