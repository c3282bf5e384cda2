#include "ioss/lmi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ioss/error.hpp"
#include "ioss/parallel.hpp"

namespace ioss {

SymMatrix assemble_ct_lmi(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                          const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                          const Eigen::MatrixXd& R, double kappa) {
  const Eigen::Index n = A.rows();
  const Eigen::Index q = B.cols();
  if (A.cols() != n || B.rows() != n || C.cols() != n || D.cols() != q || C.rows() != D.rows() ||
      P.rows() != n || Q.rows() != q || R.rows() != C.rows()) {
    throw DimensionError("CT LMI: inconsistent dimensions between linearization and certificate");
  }
  const Eigen::MatrixXd S = P * A;
  const Eigen::MatrixXd RC = R * C;
  const Eigen::MatrixXd RD = R * D;

  Eigen::MatrixXd M(n + q, n + q);
  M.topLeftCorner(n, n) = S + S.transpose() + kappa * P - C.transpose() * RC;
  M.bottomLeftCorner(q, n) = (P * B - C.transpose() * RD).transpose();
  M.bottomRightCorner(q, q) = -(D.transpose() * RD) - Q;
  return SymMatrix::from_lower(M);
}

SymMatrix assemble_ct_lmi(const PointEval& pe, const Certificate& c) {
  return assemble_ct_lmi(pe.A, pe.B, pe.C, pe.D, c.P().dense(), c.Q().dense(), c.R().dense(),
                         c.kappa());
}

SymMatrix assemble_dt_lmi(const Eigen::MatrixXd& a_tilde, const Eigen::MatrixXd& b_tilde,
                          const PointEval& pe, const DtCertificate& dc) {
  const Eigen::Index n = a_tilde.rows();
  const Eigen::Index q = b_tilde.cols();
  const Eigen::Index p = pe.C.rows();
  if (a_tilde.cols() != n || b_tilde.rows() != n || pe.C.cols() != n || pe.D.cols() != q ||
      pe.D.rows() != p || static_cast<Eigen::Index>(dc.P.dim()) != n ||
      static_cast<Eigen::Index>(dc.Qt.dim()) != q || static_cast<Eigen::Index>(dc.Rt.dim()) != p) {
    throw DimensionError("DT LMI: inconsistent dimensions between linearization and certificate");
  }
  Eigen::MatrixXd G(n, n + q);
  G << a_tilde, b_tilde;
  Eigen::MatrixXd H(p, n + q);
  H << pe.C, pe.D;
  const Eigen::MatrixXd P = dc.P.dense();

  Eigen::MatrixXd M = G.transpose() * (P * G) - H.transpose() * (dc.Rt.dense() * H);
  M.topLeftCorner(n, n) -= dc.eta * P;
  M.bottomRightCorner(q, q) -= dc.Qt.dense();
  return SymMatrix::from_lower(M);
}

namespace {

struct Partial {
  std::uint64_t violations = 0;
  std::uint64_t domain_errors = 0;
  double worst = -std::numeric_limits<double>::infinity();
  std::uint64_t worst_index = 0;
  double worst_normalized = -std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t first_error_index = std::numeric_limits<std::uint64_t>::max();
  std::string first_error;
};

Partial merge(Partial a, Partial b) {
  a.violations += b.violations;
  a.domain_errors += b.domain_errors;
  // Chunks arrive in index order, so ties keep the earlier (lower) index.
  if (b.worst > a.worst) {
    a.worst = b.worst;
    a.worst_index = b.worst_index;
  }
  a.worst_normalized = std::max(a.worst_normalized, b.worst_normalized);
  a.best = std::min(a.best, b.best);
  if (b.first_error_index < a.first_error_index) {
    a.first_error_index = b.first_error_index;
    a.first_error = std::move(b.first_error);
  }
  return a;
}

double median_of(std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

/// Runs `point_matrix(z)` at every grid point and aggregates NSD verdicts.
template <class PointMatrix>
CheckReport run_grid_check(const GridSpec& g, double tol, unsigned threads,
                           PointMatrix point_matrix) {
  if (tol < 0.0) throw Error("tolerance must be non-negative");
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t total = g.size();
  std::vector<double> lambdas(total, std::numeric_limits<double>::quiet_NaN());

  const Partial agg = parallel_reduce<Partial>(
      total, threads,
      [&](std::uint64_t begin, std::uint64_t end) {
        Partial p;
        Eigen::VectorXd z(g.dims().nz());
        for (std::uint64_t i = begin; i < end; ++i) {
          g.point(i, z);
          NsdVerdict v;
          try {
            v = nsd_from_extents(eig_extents(point_matrix(z).dense()), tol);
          } catch (const DomainError& e) {
            ++p.domain_errors;
            if (i < p.first_error_index) {
              p.first_error_index = i;
              p.first_error = e.what();
            }
            continue;
          }
          lambdas[i] = v.lambda_max;
          if (!v.holds) ++p.violations;
          if (v.lambda_max > p.worst) {
            p.worst = v.lambda_max;
            p.worst_index = i;
          }
          p.worst_normalized = std::max(p.worst_normalized, v.normalized);
          p.best = std::min(p.best, v.lambda_max);
        }
        return p;
      },
      merge);

  CheckReport r;
  r.total_points = total;
  r.violations = agg.violations;
  r.domain_errors = agg.domain_errors;
  r.complete = agg.domain_errors == 0;
  r.tolerance = tol;
  r.grid_spacing = g.spacing();
  if (agg.domain_errors < total) {
    r.worst_lambda_max = agg.worst;
    r.argmax_index = agg.worst_index;
    r.argmax_point = g.point(agg.worst_index);
    r.worst_normalized_lambda_max = agg.worst_normalized;
    r.lambda_max_min = agg.best;
    std::vector<double> finite;
    finite.reserve(total - agg.domain_errors);
    for (double v : lambdas)
      if (!std::isnan(v)) finite.push_back(v);
    r.lambda_max_median = median_of(finite);
  }
  if (!r.complete) {
    r.first_domain_error = agg.first_error;
    r.warnings.push_back(std::to_string(agg.domain_errors) +
                         " grid point(s) could not be evaluated; report is incomplete");
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

CheckReport check_ct_grid(const SystemSpec& sys, const GridSpec& g, const Certificate& c,
                          double tol, unsigned threads) {
  const Dims& dims = sys.dims();
  if (c.P().dim() != static_cast<std::size_t>(dims.n) ||
      c.Q().dim() != static_cast<std::size_t>(dims.q) ||
      c.R().dim() != static_cast<std::size_t>(dims.p)) {
    throw DimensionError("certificate dimensions do not match the model");
  }
  if (!(g.dims() == dims)) throw DimensionError("grid dimensions do not match the model");
  const Eigen::MatrixXd P = c.P().dense();
  const Eigen::MatrixXd Q = c.Q().dense();
  const Eigen::MatrixXd R = c.R().dense();
  return run_grid_check(g, tol, threads, [&](const Eigen::VectorXd& z) {
    const PointEval pe = eval_point(sys, z);
    return assemble_ct_lmi(pe.A, pe.B, pe.C, pe.D, P, Q, R, c.kappa());
  });
}

CheckReport check_dt_grid(const SystemSpec& sys, Scheme scheme, const GridSpec& g,
                          const DtCertificate& dc, double tol, unsigned threads) {
  if (!(dc.tau > 0.0)) throw Error("DT certificate has non-positive tau");
  const Dims& dims = sys.dims();
  if (dc.P.dim() != static_cast<std::size_t>(dims.n) ||
      dc.Qt.dim() != static_cast<std::size_t>(dims.q) ||
      dc.Rt.dim() != static_cast<std::size_t>(dims.p)) {
    throw DimensionError("DT certificate dimensions do not match the model");
  }
  if (!(g.dims() == dims)) throw DimensionError("grid dimensions do not match the model");
  CheckReport r = run_grid_check(g, tol, threads, [&](const Eigen::VectorXd& z) {
    const PointEval pe = eval_point(sys, z);
    const SchemeJacobians j = scheme_jacobians(sys, scheme, pe, dc.tau);
    return assemble_dt_lmi(j.a_tilde, j.b_tilde, pe, dc);
  });
  if (!(dc.tau < dc.tau1)) {
    r.out_of_certificate = true;
    r.warnings.push_back("tau >= tau1: the transferred certificate makes no claim at this period");
  }
  return r;
}

}  // namespace ioss
