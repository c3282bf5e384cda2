#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ioss {

inline constexpr double kDefaultNsdTol = 1e-9;
inline constexpr double kDefaultPsdTol = 1e-12;

/// Dense symmetric matrix with packed lower-triangular storage. Only one
/// copy of each off-diagonal entry exists, so symmetry holds by
/// construction. Entries are always finite.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t k);

  static SymMatrix identity(std::size_t k);
  static SymMatrix diagonal(const Eigen::VectorXd& diag);
  /// Takes the lower triangle of `m` (upper triangle ignored).
  static SymMatrix from_lower(const Eigen::MatrixXd& m);
  /// Requires |m - m^T| <= rel_tol * max(1, |m|) entrywise, then keeps the
  /// symmetric part.
  static SymMatrix from_dense(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

  std::size_t dim() const { return k_; }
  double operator()(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, double v);

  Eigen::MatrixXd dense() const;
  SymMatrix scaled(double s) const;

  bool operator==(const SymMatrix&) const = default;

 private:
  static std::size_t offset(std::size_t i, std::size_t j) {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }

  std::size_t k_ = 0;
  std::vector<double> lower_;
};

struct EigExtents {
  double min = 0.0;
  double max = 0.0;
};

/// Extreme eigenvalues from a symmetric eigendecomposition.
EigExtents eig_extents(const SymMatrix& m);
EigExtents eig_extents(const Eigen::MatrixXd& symmetric);

struct NsdVerdict {
  bool holds = false;
  double lambda_max = 0.0;
  /// lambda_max / max(1, |M|_2); the quantity compared against tol.
  double normalized = 0.0;
  double threshold = 0.0;  // tol * max(1, |M|_2)
};

/// M is accepted as negative semidefinite iff
/// lambda_max(M) <= tol * max(1, |M|_2).
NsdVerdict is_nsd(const SymMatrix& m, double tol = kDefaultNsdTol);
NsdVerdict nsd_from_extents(const EigExtents& ext, double tol);

/// v^T P v.
double weighted_norm_sq(const Eigen::VectorXd& v, const SymMatrix& p);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& m);

/// CT certificate (P, Q, R, kappa). Construction enforces P, Q, R > 0
/// (lambda_min > psd_tol) and kappa > 0.
class Certificate {
 public:
  static Certificate create(SymMatrix p, SymMatrix q, SymMatrix r, double kappa,
                            double psd_tol = kDefaultPsdTol);

  const SymMatrix& P() const { return p_; }
  const SymMatrix& Q() const { return q_; }
  const SymMatrix& R() const { return r_; }
  double kappa() const { return kappa_; }

 private:
  Certificate(SymMatrix p, SymMatrix q, SymMatrix r, double kappa)
      : p_(std::move(p)), q_(std::move(q)), r_(std::move(r)), kappa_(kappa) {}

  SymMatrix p_;
  SymMatrix q_;
  SymMatrix r_;
  double kappa_ = 0.0;
};

enum class Scheme { Euler, RK2 };

/// Constants the transfer was computed from.
struct TransferDescriptor {
  Scheme scheme = Scheme::Euler;
  double lipschitz_f = 0.0;
  double sigma_slope = 0.0;
  double tau0 = std::numeric_limits<double>::infinity();
};

/// DT certificate for one sampling period. Produced with its invariants
/// enforced by dt_certificate(); loaded or hand-built instances may violate
/// them, which dt_certificate_issues() reports.
struct DtCertificate {
  SymMatrix P;
  double tau = 0.0;
  SymMatrix Qt;
  SymMatrix Rt;
  double eta = 0.0;
  double tau1 = 0.0;
  TransferDescriptor source;
};

/// Human-readable list of violated invariants (empty when the certificate
/// satisfies tau < tau1, Qt > 0, Rt > 0 and 0 < eta < 1).
std::vector<std::string> dt_certificate_issues(const DtCertificate& dc);

}  // namespace ioss
