#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ioss/builtins.hpp"
#include "ioss/discretize.hpp"
#include "ioss/error.hpp"
#include "ioss/lmi.hpp"
#include "oracles.hpp"

using namespace ioss;

namespace {

Certificate unit_cert(double kappa) {
  const SymMatrix I = SymMatrix::identity(1);
  return Certificate::create(I, I, I, kappa);
}

SymMatrix spd(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) X(i, j) = g(rng);
  Eigen::MatrixXd m = X * X.transpose() + 0.5 * Eigen::MatrixXd::Identity(k, k);
  return SymMatrix::from_lower(m);
}

// Hand-written scalar transfer at tau = 0.1, independent of transfer.cpp.
DtCertificate scalar_dt() {
  DtCertificate dc;
  dc.P = SymMatrix::identity(1);
  dc.Qt = SymMatrix::diagonal(Eigen::VectorXd::Constant(1, 0.12));
  dc.Rt = SymMatrix::diagonal(Eigen::VectorXd::Constant(1, 0.1));
  dc.eta = 0.92;
  dc.tau = 0.1;
  dc.tau1 = 0.5;
  return dc;
}

PointEval eval_at(const SystemSpec& sys, std::initializer_list<double> z) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(z.size()));
  Eigen::Index i = 0;
  for (double c : z) v[i++] = c;
  return eval_point(sys, v);
}

}  // namespace

TEST(AssembleCt, ScalarLinearHand) {
  const SystemSpec sys = builtin_model("scalar_linear");
  const Eigen::MatrixXd M = assemble_ct_lmi(eval_at(sys, {0.3, -0.2}), unit_cert(1.0)).dense();
  Eigen::Matrix2d want;
  want << -2, 1, 1, -1;
  EXPECT_EQ(M, Eigen::MatrixXd(want));
}

TEST(AssembleCt, ZeroSystem) {
  const SystemSpec sys = builtin_model("zero");
  const SymMatrix P = SymMatrix::diagonal(Eigen::VectorXd::Constant(1, 3.0));
  const SymMatrix Q = SymMatrix::diagonal(Eigen::VectorXd::Constant(1, 2.0));
  const Certificate c = Certificate::create(P, Q, SymMatrix::identity(1), 0.5);
  const Eigen::MatrixXd M = assemble_ct_lmi(eval_at(sys, {0.1, 0.7}), c).dense();
  EXPECT_EQ(M(0, 0), 1.5);
  EXPECT_EQ(M(0, 1), 0.0);
  EXPECT_EQ(M(1, 1), -2.0);
}

TEST(AssembleCt, ReactorMatchesOracle) {
  const SystemSpec sys = builtin_model("reactor");
  std::mt19937_64 rng(5);
  const Certificate c = Certificate::create(spd(2, rng), spd(3, rng), spd(1, rng), 0.3);
  for (double x2 : {0.1, 0.3, 0.5}) {
    const PointEval pe = eval_at(sys, {0.25, x2, 0.01, -0.02, 0.03});
    const Eigen::MatrixXd M = assemble_ct_lmi(pe, c).dense();
    const Eigen::MatrixXd O = oracle::ct_lmi(pe.A, pe.B, pe.C, pe.D, c.P().dense(), c.Q().dense(),
                                             c.R().dense(), c.kappa());
    EXPECT_LT(oracle::rel_err(M, O), 1e-12);
    EXPECT_EQ(M, M.transpose());
  }
}

TEST(AssembleCt, DimensionMismatch) {
  const SystemSpec sys = builtin_model("reactor");
  EXPECT_THROW(assemble_ct_lmi(eval_at(sys, {0.25, 0.3, 0, 0, 0}), unit_cert(1.0)), DimensionError);
}

TEST(AssembleDt, ScalarLinearHand) {
  const SystemSpec sys = builtin_model("scalar_linear");
  const PointEval pe = eval_at(sys, {0.5, 0.5});
  const SchemeJacobians sj = jacobians_euler(pe, 0.1);
  const Eigen::MatrixXd M = assemble_dt_lmi(sj.a_tilde, sj.b_tilde, pe, scalar_dt()).dense();
  EXPECT_NEAR(M(0, 0), -0.21, 1e-15);
  EXPECT_NEAR(M(0, 1), 0.09, 1e-15);
  EXPECT_NEAR(M(1, 1), -0.11, 1e-15);
  const auto [lo, hi] = oracle::eig2(-0.21, 0.09, -0.11);
  (void)lo;
  EXPECT_NEAR(hi, -0.0571, 1e-4);
  EXPECT_TRUE(is_nsd(SymMatrix::from_dense(M)).holds);
}

TEST(AssembleDt, IdentityMapBoundary) {
  const SystemSpec sys = builtin_model("zero");
  const PointEval pe = eval_at(sys, {0.0, 0.0});
  DtCertificate dc = scalar_dt();
  dc.eta = 1.0;
  dc.Rt = SymMatrix(1);
  const Eigen::MatrixXd M =
      assemble_dt_lmi(Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Zero(1, 1), pe, dc).dense();
  EXPECT_EQ(M(0, 0), 0.0);
  EXPECT_EQ(M(0, 1), 0.0);
  EXPECT_EQ(M(1, 1), -0.12);
}

TEST(AssembleDt, ReactorRk2MatchesOracle) {
  const SystemSpec sys = builtin_model("reactor");
  std::mt19937_64 rng(9);
  DtCertificate dc;
  dc.P = spd(2, rng);
  dc.Qt = spd(3, rng);
  dc.Rt = spd(1, rng);
  dc.eta = 0.97;
  dc.tau = 0.05;
  dc.tau1 = 0.1;
  const GridSpec g = builtin_grid("reactor", 2);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd z = oracle::uniform_in(g.lower(), g.upper(), rng);
    const PointEval pe = eval_point(sys, z);
    const SchemeJacobians sj = jacobians_rk2(sys, pe, dc.tau);
    const Eigen::MatrixXd M = assemble_dt_lmi(sj.a_tilde, sj.b_tilde, pe, dc).dense();
    const Eigen::MatrixXd O = oracle::dt_lmi(sj.a_tilde, sj.b_tilde, pe.C, pe.D, dc.P.dense(),
                                             dc.Qt.dense(), dc.Rt.dense(), dc.eta);
    EXPECT_LT(oracle::rel_err(M, O), 1e-12);
    EXPECT_EQ(M, M.transpose());
  }
}

TEST(CheckCt, ScalarLinearHoldsWithKnownWorst) {
  const SystemSpec sys = builtin_model("scalar_linear");
  const CheckReport r = check_ct_grid(sys, builtin_grid("scalar_linear", 11), unit_cert(1.0));
  EXPECT_EQ(r.total_points, 121u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_TRUE(r.certified());
  EXPECT_NEAR(r.worst_lambda_max, (-3 + std::sqrt(5.0)) / 2, 1e-14);
  // Linear system: identical matrix everywhere, so the first point wins the tie.
  EXPECT_EQ(r.argmax_index, 0u);
  EXPECT_EQ(r.lambda_max_min, r.worst_lambda_max);
  EXPECT_EQ(r.lambda_max_median, r.worst_lambda_max);
}

TEST(CheckCt, LargeKappaViolatesEverywhere) {
  const SystemSpec sys = builtin_model("scalar_linear");
  const CheckReport r = check_ct_grid(sys, builtin_grid("scalar_linear", 11), unit_cert(10.0));
  EXPECT_EQ(r.violations, 121u);
  // -2 + 10 - 1 = 7 in the (1,1) slot.
  const auto [lo, hi] = oracle::eig2(7, 1, -1);
  (void)lo;
  EXPECT_NEAR(r.worst_lambda_max, hi, 1e-13);
  EXPECT_FALSE(r.certified());
}

TEST(CheckCt, CertifiedImpliesSubsampleNsd) {
  const SystemSpec sys = builtin_model("sine");
  const GridSpec g = builtin_grid("sine", 101);
  // x + sin x has A in [1 + cos 1, 2], so P=1, kappa=1 with R large enough:
  // M = 2A + 1 - R <= 0 needs R >= 5.
  const SymMatrix I = SymMatrix::identity(1);
  const Certificate c =
      Certificate::create(I, SymMatrix(0), SymMatrix::diagonal(Eigen::VectorXd::Constant(1, 5.0)), 1.0);
  const CheckReport r = check_ct_grid(sys, g, c);
  ASSERT_TRUE(r.certified());
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> pick(0, g.size() - 1);
  for (int i = 0; i < 100; ++i) {
    const PointEval pe = eval_point(sys, g.point(pick(rng)));
    const Eigen::MatrixXd O = oracle::ct_lmi(pe.A, pe.B, pe.C, pe.D, c.P().dense(), c.Q().dense(),
                                             c.R().dense(), c.kappa());
    EXPECT_LE(O(0, 0), 1e-12);
  }
}

TEST(CheckCt, ScalingCovariance) {
  const SystemSpec sys = builtin_model("reactor");
  std::mt19937_64 rng(11);
  const SymMatrix P = spd(2, rng), Q = spd(3, rng), R = spd(1, rng);
  const PointEval pe = eval_at(sys, {0.3, 0.2, 0.05, 0.0, -0.05});
  const Eigen::MatrixXd M1 = assemble_ct_lmi(pe, Certificate::create(P, Q, R, 0.2)).dense();
  for (double s : {0.25, 4.0, 1024.0}) {
    const Certificate cs = Certificate::create(P.scaled(s), Q.scaled(s), R.scaled(s), 0.2);
    // Power-of-two scaling is exact in floating point.
    EXPECT_EQ(assemble_ct_lmi(pe, cs).dense(), s * M1);
  }
  const GridSpec g = builtin_grid("reactor", 3);
  const Certificate c1 = Certificate::create(P, Q, R, 0.2);
  const Certificate c8 = Certificate::create(P.scaled(8), Q.scaled(8), R.scaled(8), 0.2);
  EXPECT_EQ(check_ct_grid(sys, g, c1).violations, check_ct_grid(sys, g, c8).violations);
}

TEST(CheckCt, ThreadCountDoesNotChangeReport) {
  const SystemSpec sys = builtin_model("reactor");
  std::mt19937_64 rng(13);
  const Certificate c = Certificate::create(spd(2, rng), spd(3, rng), spd(1, rng), 0.1);
  const GridSpec g = builtin_grid("reactor", 6);
  const CheckReport a = check_ct_grid(sys, g, c, kDefaultNsdTol, 1);
  for (unsigned t : {2u, 3u, 8u}) {
    const CheckReport b = check_ct_grid(sys, g, c, kDefaultNsdTol, t);
    EXPECT_EQ(a.violations, b.violations);
    EXPECT_EQ(a.worst_lambda_max, b.worst_lambda_max);
    EXPECT_EQ(a.argmax_index, b.argmax_index);
    EXPECT_EQ(a.lambda_max_median, b.lambda_max_median);
    EXPECT_EQ(a.lambda_max_min, b.lambda_max_min);
  }
}

TEST(CheckCt, FailureSurvivesSupergrid) {
  const SystemSpec sys = builtin_model("sine");
  const SymMatrix I = SymMatrix::identity(1);
  // R = 4.5 fails only near x = 0 where A = 2.
  const Certificate c =
      Certificate::create(I, SymMatrix(0), SymMatrix::diagonal(Eigen::VectorXd::Constant(1, 4.5)), 1.0);
  const CheckReport coarse = check_ct_grid(sys, builtin_grid("sine", 3), c);
  ASSERT_GT(coarse.violations, 0u);
  // 5 and 9 points per axis contain the 3-point grid.
  EXPECT_GE(check_ct_grid(sys, builtin_grid("sine", 5), c).violations, coarse.violations);
  EXPECT_GE(check_ct_grid(sys, builtin_grid("sine", 9), c).violations, coarse.violations);
}

TEST(CheckCt, DomainErrorsMakeRunIncomplete) {
  const SystemSpec sys = parse_model("dims 1 0 0 1\nf1 = -sqrt(x1)\nh1 = x1\n");
  const GridSpec g(sys.dims(), {{-1.0, 1.0, 5}});
  const Certificate c = Certificate::create(SymMatrix::identity(1), SymMatrix(0),
                                            SymMatrix::identity(1), 0.1);
  const CheckReport r = check_ct_grid(sys, g, c);
  EXPECT_EQ(r.domain_errors, 3u);  // -1, -0.5 and the non-differentiable 0
  EXPECT_FALSE(r.complete);
  EXPECT_FALSE(r.certified());
  EXPECT_FALSE(r.first_domain_error.empty());
}

TEST(CheckDt, ScalarEulerTransferred) {
  const SystemSpec sys = builtin_model("scalar_linear");
  const CheckReport r =
      check_dt_grid(sys, Scheme::Euler, builtin_grid("scalar_linear", 11), scalar_dt());
  EXPECT_TRUE(r.certified());
  EXPECT_FALSE(r.out_of_certificate);
}

TEST(CheckDt, FlagsTauBeyondTau1) {
  const SystemSpec sys = builtin_model("scalar_linear");
  DtCertificate dc = scalar_dt();
  dc.tau = 2.0;
  const CheckReport r = check_dt_grid(sys, Scheme::Euler, builtin_grid("scalar_linear", 5), dc);
  EXPECT_TRUE(r.out_of_certificate);
  dc.tau = 0.0;
  EXPECT_THROW(check_dt_grid(sys, Scheme::Euler, builtin_grid("scalar_linear", 5), dc), Error);
}

TEST(CheckDt, LinearSystemSameMatrixEverywhere) {
  const SystemSpec sys = builtin_model("scalar_linear");
  const CheckReport r = check_dt_grid(sys, Scheme::RK2, builtin_grid("scalar_linear", 7), scalar_dt());
  EXPECT_EQ(r.lambda_max_min, r.worst_lambda_max);
  EXPECT_EQ(r.argmax_index, 0u);
}
