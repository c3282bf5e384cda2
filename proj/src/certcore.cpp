#include "ioss/certcore.hpp"

#include <cmath>

#include "ioss/error.hpp"

namespace ioss {

SymMatrix::SymMatrix(std::size_t k) : k_(k), lower_(k * (k + 1) / 2, 0.0) {}

SymMatrix SymMatrix::identity(std::size_t k) {
  SymMatrix m(k);
  for (std::size_t i = 0; i < k; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::diagonal(const Eigen::VectorXd& diag) {
  SymMatrix m(static_cast<std::size_t>(diag.size()));
  for (Eigen::Index i = 0; i < diag.size(); ++i) m.set(i, i, diag[i]);
  return m;
}

SymMatrix SymMatrix::from_lower(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("symmetric matrix must be square");
  SymMatrix out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j) out.set(i, j, m(i, j));
  return out;
}

SymMatrix SymMatrix::from_dense(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols()) throw DimensionError("symmetric matrix must be square");
  const double scale = std::max(1.0, m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > rel_tol * scale) {
        throw CertificateError("matrix is not symmetric at (" + std::to_string(i) + ", " +
                               std::to_string(j) + ")");
      }
    }
  }
  SymMatrix out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j) out.set(i, j, 0.5 * (m(i, j) + m(j, i)));
  return out;
}

double SymMatrix::operator()(std::size_t i, std::size_t j) const { return lower_[offset(i, j)]; }

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  if (i >= k_ || j >= k_) throw DimensionError("symmetric matrix index out of range");
  if (!std::isfinite(v)) throw CertificateError("non-finite matrix entry");
  lower_[offset(i, j)] = v;
}

Eigen::MatrixXd SymMatrix::dense() const {
  const auto k = static_cast<Eigen::Index>(k_);
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = lower_[offset(i, j)];
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

SymMatrix SymMatrix::scaled(double s) const {
  SymMatrix out = *this;
  for (double& v : out.lower_) v *= s;
  return out;
}

EigExtents eig_extents(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() == 0) throw DimensionError("eigenvalues of an empty matrix");
  if (!symmetric.allFinite()) throw CertificateError("non-finite matrix entry");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("symmetric eigensolver did not converge");
  const auto& ev = es.eigenvalues();  // ascending
  return {ev[0], ev[ev.size() - 1]};
}

EigExtents eig_extents(const SymMatrix& m) { return eig_extents(m.dense()); }

NsdVerdict nsd_from_extents(const EigExtents& ext, double tol) {
  NsdVerdict v;
  const double norm = std::max(std::abs(ext.min), std::abs(ext.max));
  const double scale = std::max(1.0, norm);
  v.lambda_max = ext.max;
  v.normalized = ext.max / scale;
  v.threshold = tol * scale;
  v.holds = ext.max <= v.threshold;
  return v;
}

NsdVerdict is_nsd(const SymMatrix& m, double tol) {
  if (tol < 0.0) throw Error("NSD tolerance must be non-negative");
  if (m.dim() == 0) return NsdVerdict{true, 0.0, 0.0, tol};
  return nsd_from_extents(eig_extents(m), tol);
}

double weighted_norm_sq(const Eigen::VectorXd& v, const SymMatrix& p) {
  if (static_cast<std::size_t>(v.size()) != p.dim()) {
    throw DimensionError("weighted norm: vector length " + std::to_string(v.size()) +
                         " vs matrix dimension " + std::to_string(p.dim()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    acc += p(i, i) * v[i] * v[i];
    for (std::size_t j = 0; j < i; ++j) acc += 2.0 * p(i, j) * v[i] * v[j];
  }
  return acc;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()[0];
}

Certificate Certificate::create(SymMatrix p, SymMatrix q, SymMatrix r, double kappa,
                                double psd_tol) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw CertificateError("kappa must be a positive finite number");
  }
  if (p.dim() == 0) throw CertificateError("P must be at least 1x1");
  if (r.dim() == 0) throw CertificateError("R must be at least 1x1");
  auto check = [psd_tol](const SymMatrix& m, const char* name) {
    if (m.dim() == 0) return;
    const double lmin = eig_extents(m).min;
    if (!(lmin > psd_tol)) {
      throw CertificateError(std::string(name) + " is not positive definite (lambda_min = " +
                             std::to_string(lmin) + ")");
    }
  };
  check(p, "P");
  check(q, "Q");
  check(r, "R");
  return Certificate(std::move(p), std::move(q), std::move(r), kappa);
}

std::vector<std::string> dt_certificate_issues(const DtCertificate& dc) {
  std::vector<std::string> issues;
  if (!(dc.tau > 0.0)) issues.emplace_back("tau must be positive");
  if (!(dc.tau < dc.tau1)) issues.emplace_back("tau >= tau1: outside the certified range");
  if (!(dc.eta > 0.0 && dc.eta < 1.0)) issues.emplace_back("eta outside (0, 1)");
  if (dc.Qt.dim() > 0 && !(eig_extents(dc.Qt).min > 0.0)) {
    issues.emplace_back("Qt is not positive definite");
  }
  if (dc.Rt.dim() > 0 && !(eig_extents(dc.Rt).min > 0.0)) {
    issues.emplace_back("Rt is not positive definite");
  }
  if (dc.P.dim() == 0 || !(eig_extents(dc.P).min > 0.0)) {
    issues.emplace_back("P is not positive definite");
  }
  return issues;
}

}  // namespace ioss
