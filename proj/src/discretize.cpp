#include "ioss/discretize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ioss/error.hpp"
#include "ioss/parallel.hpp"

namespace ioss {

std::string_view to_string(Scheme s) { return s == Scheme::Euler ? "euler" : "rk2"; }

Scheme parse_scheme(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "euler") return Scheme::Euler;
  if (lower == "rk2") return Scheme::RK2;
  throw Error("unknown scheme '" + std::string(name) + "' (expected euler or rk2)");
}

namespace {

void require_positive_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error("sampling period tau must be positive");
}

}  // namespace

Eigen::VectorXd euler_step(const SystemSpec& sys, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau) {
  require_positive_tau(tau);
  return x + tau * eval_f(sys, stack_point(sys.dims(), x, u, d));
}

Eigen::VectorXd rk2_step(const SystemSpec& sys, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau) {
  require_positive_tau(tau);
  const Dims& dims = sys.dims();
  const Eigen::VectorXd mid = x + (tau / 2.0) * eval_f(sys, stack_point(dims, x, u, d));
  return x + tau * eval_f(sys, stack_point(dims, mid, u, d));
}

Eigen::VectorXd step(const SystemSpec& sys, Scheme scheme, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau) {
  return scheme == Scheme::Euler ? euler_step(sys, x, u, d, tau) : rk2_step(sys, x, u, d, tau);
}

SchemeJacobians jacobians_euler(const PointEval& pe, double tau) {
  require_positive_tau(tau);
  SchemeJacobians j;
  j.a_increment = tau * pe.A;
  j.a_tilde = j.a_increment;
  j.a_tilde.diagonal().array() += 1.0;
  j.b_tilde = tau * pe.B;
  return j;
}

SchemeJacobians jacobians_rk2(const SystemSpec& sys, const PointEval& pe, double tau) {
  require_positive_tau(tau);
  const Dims& dims = sys.dims();
  const double half = tau / 2.0;
  const Eigen::VectorXd mid_x = pe.x + half * pe.f_val;
  const PointEval mid = eval_point(sys, stack_point(dims, mid_x, pe.u, pe.d));

  Eigen::MatrixXd inner = half * pe.A;
  inner.diagonal().array() += 1.0;

  SchemeJacobians j;
  j.a_increment = tau * (mid.A * inner);
  j.a_tilde = j.a_increment;
  j.a_tilde.diagonal().array() += 1.0;
  j.b_tilde = tau * (half * (mid.A * pe.B) + mid.B);
  return j;
}

SchemeJacobians jacobians_rk2(const SystemSpec& sys, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau) {
  return jacobians_rk2(sys, eval_point(sys, x, u, d), tau);
}

SchemeJacobians scheme_jacobians(const SystemSpec& sys, Scheme scheme, const PointEval& pe,
                                 double tau) {
  return scheme == Scheme::Euler ? jacobians_euler(pe, tau) : jacobians_rk2(sys, pe, tau);
}

double consistency_defect(const SystemSpec& sys, Scheme scheme, const PointEval& pe, double tau) {
  const SchemeJacobians j = scheme_jacobians(sys, scheme, pe, tau);
  const double da = spectral_norm(j.a_increment / tau - pe.A);
  const double db = spectral_norm(j.b_tilde / tau - pe.B);
  return std::max(da, db);
}

double consistency_defect(const SystemSpec& sys, Scheme scheme, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau) {
  return consistency_defect(sys, scheme, eval_point(sys, x, u, d), tau);
}

Eigen::VectorXd residual_r(const SystemSpec& sys, Scheme scheme, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau) {
  require_positive_tau(tau);
  if (scheme == Scheme::Euler) return Eigen::VectorXd::Zero(x.size());
  const Dims& dims = sys.dims();
  const Eigen::VectorXd f0 = eval_f(sys, stack_point(dims, x, u, d));
  const Eigen::VectorXd mid = x + (tau / 2.0) * f0;
  const Eigen::VectorXd f1 = eval_f(sys, stack_point(dims, mid, u, d));
  // F - x - tau f0 = tau (f(mid) - f0), formed without the cancellation of x.
  return tau * (f1 - f0);
}

double ConsistencyBound::rho(double tau) const {
  if (scheme == Scheme::Euler) return 0.0;
  return sigma_slope * (tau / 2.0) + (tau / 2.0) * lipschitz_f * lipschitz_f;
}

ConsistencyBound consistency_bound_with_slope(Scheme scheme, double L_f, double sigma_slope,
                                              double delta0) {
  if (!(L_f >= 0.0) || !std::isfinite(L_f)) throw Error("L_f must be non-negative");
  ConsistencyBound b;
  b.scheme = scheme;
  b.lipschitz_f = L_f;
  if (scheme == Scheme::Euler) return b;
  if (!(sigma_slope >= 0.0) || !std::isfinite(sigma_slope)) {
    throw Error("sigma slope must be non-negative");
  }
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw Error("delta0 must be positive");
  b.sigma_slope = sigma_slope;
  b.tau0 = 2.0 * delta0;
  return b;
}

ConsistencyBound consistency_bound(Scheme scheme, double L_f, double L_df, double c_f,
                                   double delta0) {
  if (scheme == Scheme::RK2) {
    if (!(L_df >= 0.0) || !(c_f >= 0.0)) throw Error("L_df and c_f must be non-negative");
  }
  return consistency_bound_with_slope(scheme, L_f, L_df * c_f, delta0);
}

ConsistencyReport check_consistency_grid(const SystemSpec& sys, const GridSpec& g, double tau,
                                         const ConsistencyBound& bound, double defect_tol,
                                         unsigned threads) {
  require_positive_tau(tau);
  const auto t0 = std::chrono::steady_clock::now();
  const double rho = bound.rho(tau);

  struct Partial {
    double max_defect = -1.0;
    std::uint64_t argmax = 0;
    std::uint64_t violations = 0;
  };
  const Partial total = parallel_reduce<Partial>(
      g.size(), threads,
      [&](std::uint64_t begin, std::uint64_t end) {
        Partial p;
        Eigen::VectorXd z(g.dims().nz());
        for (std::uint64_t i = begin; i < end; ++i) {
          g.point(i, z);
          const double defect = consistency_defect(sys, bound.scheme, eval_point(sys, z), tau);
          if (defect > p.max_defect) {
            p.max_defect = defect;
            p.argmax = i;
          }
          if (defect > rho + defect_tol) ++p.violations;
        }
        return p;
      },
      [](Partial a, Partial b) {
        if (b.max_defect > a.max_defect) {
          a.max_defect = b.max_defect;
          a.argmax = b.argmax;
        }
        a.violations += b.violations;
        return a;
      });

  ConsistencyReport r;
  r.scheme = bound.scheme;
  r.tau = tau;
  r.max_defect = std::max(0.0, total.max_defect);
  r.rho_of_tau = rho;
  r.total_points = g.size();
  r.violations = total.violations;
  r.argmax_index = total.argmax;
  r.argmax_point = g.point(total.argmax);
  r.defect_tol = defect_tol;
  r.tau_within_tau0 = tau <= bound.tau0;
  r.bound_satisfied = r.violations == 0 && r.tau_within_tau0;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace ioss
