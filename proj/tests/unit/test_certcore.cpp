#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ioss/certcore.hpp"
#include "ioss/error.hpp"
#include "oracles.hpp"

using namespace ioss;

namespace {

SymMatrix sym(const Eigen::MatrixXd& m) { return SymMatrix::from_dense(m); }

Eigen::MatrixXd random_sym(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = g(rng);
  return m;
}

}  // namespace

TEST(SymMatrixTest, SymmetricByConstruction) {
  SymMatrix s(3);
  s.set(2, 0, 4.0);
  EXPECT_EQ(s(0, 2), 4.0);
  const Eigen::MatrixXd d = s.dense();
  EXPECT_EQ(d, d.transpose());
}

TEST(SymMatrixTest, FromDenseRejectsAsymmetry) {
  Eigen::Matrix2d m;
  m << 1, 2, 2.1, 1;
  EXPECT_THROW(sym(m), CertificateError);
  EXPECT_THROW(SymMatrix::from_dense(Eigen::MatrixXd::Ones(2, 3)), DimensionError);
  SymMatrix s(2);
  EXPECT_THROW(s.set(0, 0, NAN), CertificateError);
  EXPECT_THROW(s.set(5, 0, 1.0), DimensionError);
}

TEST(EigExtentsTest, DiagonalExample) {
  const EigExtents e = eig_extents(SymMatrix::diagonal(Eigen::Vector3d(-1.0, 2.0, 0.5)));
  EXPECT_EQ(e.min, -1.0);
  EXPECT_EQ(e.max, 2.0);
}

TEST(EigExtentsTest, MatchesClosedForm2x2) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const Eigen::MatrixXd m = random_sym(2, rng);
    const auto [lo, hi] = oracle::eig2(m(0, 0), m(0, 1), m(1, 1));
    const EigExtents e = eig_extents(sym(m));
    EXPECT_NEAR(e.min, lo, 1e-10 * std::max(1.0, std::abs(lo)));
    EXPECT_NEAR(e.max, hi, 1e-10 * std::max(1.0, std::abs(hi)));
  }
}

TEST(EigExtentsTest, MatchesTrigonometricCubic3x3) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Matrix3d m = random_sym(3, rng);
    const auto ev = oracle::eig3(m);
    const EigExtents e = eig_extents(sym(m));
    EXPECT_NEAR(e.min, ev.front(), 1e-10 * std::max(1.0, std::abs(ev.front())));
    EXPECT_NEAR(e.max, ev.back(), 1e-10 * std::max(1.0, std::abs(ev.back())));
  }
}

TEST(IsNsd, Examples) {
  EXPECT_TRUE(is_nsd(sym(-Eigen::MatrixXd::Identity(2, 2))).holds);
  EXPECT_TRUE(is_nsd(SymMatrix(3)).holds);  // zero matrix
  EXPECT_FALSE(is_nsd(SymMatrix::diagonal(Eigen::Vector2d(-1.0, 1e-3))).holds);
  Eigen::Matrix2d m;
  m << -1, 2, 2, -1;  // eigenvalues 1 and -3
  const NsdVerdict v = is_nsd(sym(m));
  EXPECT_FALSE(v.holds);
  EXPECT_NEAR(v.lambda_max, 1.0, 1e-14);
}

TEST(IsNsd, ToleranceScalesWithNorm) {
  // lambda_max = 1e-4 on a matrix of norm 1e6 is inside tol 1e-9 * 1e6.
  const SymMatrix rounding = SymMatrix::diagonal(Eigen::Vector2d(-1e6, 1e-4));
  EXPECT_TRUE(is_nsd(rounding).holds);
  const SymMatrix big = SymMatrix::diagonal(Eigen::Vector2d(-1e6, 1e-2));
  EXPECT_FALSE(is_nsd(big).holds);
  EXPECT_FALSE(is_nsd(SymMatrix::diagonal(Eigen::Vector2d(-1.0, 1e-4))).holds);
  EXPECT_THROW(is_nsd(big, -1.0), Error);
}

TEST(WeightedNorm, Example) {
  Eigen::Matrix2d p;
  p << 2, 1, 1, 3;
  EXPECT_DOUBLE_EQ(weighted_norm_sq(Eigen::Vector2d(1, -1), sym(p)), 2 - 2 + 3);
  EXPECT_THROW(weighted_norm_sq(Eigen::Vector3d(1, 1, 1), sym(p)), DimensionError);
}

TEST(CertificateTest, RejectsNonPositive) {
  const SymMatrix I = SymMatrix::identity(1);
  EXPECT_NO_THROW(Certificate::create(I, I, I, 1.0));
  EXPECT_THROW(Certificate::create(I, I, I, 0.0), CertificateError);
  EXPECT_THROW(Certificate::create(I, I, I, INFINITY), CertificateError);
  EXPECT_THROW(Certificate::create(SymMatrix::diagonal(Eigen::VectorXd::Constant(1, -1.0)), I, I, 1.0),
               CertificateError);
  EXPECT_THROW(Certificate::create(I, SymMatrix(1), I, 1.0), CertificateError);
  Eigen::Matrix2d indef;
  indef << 1, 2, 2, 1;
  EXPECT_THROW(Certificate::create(sym(indef), I, I, 1.0), CertificateError);
}

TEST(DtCertificateIssues, ReportsEachInvariant) {
  DtCertificate dc;
  dc.P = SymMatrix::identity(1);
  dc.Qt = SymMatrix::identity(1);
  dc.Rt = SymMatrix::identity(1);
  dc.tau = 0.1;
  dc.tau1 = 0.5;
  dc.eta = 0.9;
  EXPECT_TRUE(dt_certificate_issues(dc).empty());
  dc.eta = 1.0;
  dc.tau = 0.6;
  dc.Rt = SymMatrix(1);
  EXPECT_EQ(dt_certificate_issues(dc).size(), 3u);
}
