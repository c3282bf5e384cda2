#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "ioss/certcore.hpp"
#include "ioss/grid.hpp"
#include "ioss/system.hpp"

namespace ioss {

std::string_view to_string(Scheme s);
/// "euler" or "rk2" (case-insensitive).
Scheme parse_scheme(std::string_view name);

/// x + tau f(x,u,d)
Eigen::VectorXd euler_step(const SystemSpec& sys, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau);
/// x + tau f(x + (tau/2) f(x,u,d), u, d)
Eigen::VectorXd rk2_step(const SystemSpec& sys, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau);
Eigen::VectorXd step(const SystemSpec& sys, Scheme scheme, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau);

/// Jacobians of the one-step map. `a_increment` = A~ - I is formed directly
/// so that (A~ - I)/tau does not suffer cancellation for small tau.
struct SchemeJacobians {
  Eigen::MatrixXd a_tilde;
  Eigen::MatrixXd b_tilde;
  Eigen::MatrixXd a_increment;
};

/// A~ = I + tau A, B~ = tau B.
SchemeJacobians jacobians_euler(const PointEval& pe, double tau);

/// A~ = I + tau A(mid) (I + (tau/2) A(x)),
/// B~ = tau ((tau/2) A(mid) B(x) + B(mid)),  mid = (x + (tau/2) f, u, d).
SchemeJacobians jacobians_rk2(const SystemSpec& sys, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau);
/// Same, reusing an evaluation at (x,u,d).
SchemeJacobians jacobians_rk2(const SystemSpec& sys, const PointEval& pe, double tau);

SchemeJacobians scheme_jacobians(const SystemSpec& sys, Scheme scheme, const PointEval& pe,
                                 double tau);

/// max{ |(A~ - I)/tau - A|_2, |B~/tau - B|_2 } at one point.
double consistency_defect(const SystemSpec& sys, Scheme scheme, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau);
double consistency_defect(const SystemSpec& sys, Scheme scheme, const PointEval& pe, double tau);

/// r_tau = F_tau(x,u,d) - x - tau f(x,u,d); identically zero for Euler.
Eigen::VectorXd residual_r(const SystemSpec& sys, Scheme scheme, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau);

inline constexpr double kDefaultDelta0 = 0.5;

/// Consistency rate rho and validity horizon tau0 for a scheme.
/// Euler: rho = 0 on (0, inf). RK2: rho(tau) = sigma_slope*tau/2 + (tau/2) L_f^2
/// on (0, 2 delta0], with sigma(s) = L_df c_f s.
struct ConsistencyBound {
  Scheme scheme = Scheme::Euler;
  double tau0 = std::numeric_limits<double>::infinity();
  double sigma_slope = 0.0;
  double lipschitz_f = 0.0;

  double rho(double tau) const;
  bool tau0_unbounded() const { return !std::isfinite(tau0); }
};

ConsistencyBound consistency_bound(Scheme scheme, double L_f, double L_df = 0.0, double c_f = 0.0,
                                   double delta0 = kDefaultDelta0);
/// RK2 bound with sigma's slope given directly (overrides L_df * c_f).
ConsistencyBound consistency_bound_with_slope(Scheme scheme, double L_f, double sigma_slope,
                                              double delta0 = kDefaultDelta0);

inline constexpr double kDefaultDefectTol = 1e-12;

/// Grid sweep of the consistency defect at one sampling period.
struct ConsistencyReport {
  Scheme scheme = Scheme::Euler;
  double tau = 0.0;
  double max_defect = 0.0;
  double rho_of_tau = 0.0;
  bool bound_satisfied = false;
  bool tau_within_tau0 = true;
  std::uint64_t total_points = 0;
  std::uint64_t violations = 0;  // points with defect > rho(tau) + defect_tol
  std::uint64_t argmax_index = 0;
  Eigen::VectorXd argmax_point;
  double defect_tol = kDefaultDefectTol;
  double wall_time_s = 0.0;
};

/// A point violates the bound when defect > rho(tau) + defect_tol; the
/// absolute slack absorbs rounding in the difference quotient.
ConsistencyReport check_consistency_grid(const SystemSpec& sys, const GridSpec& g, double tau,
                                         const ConsistencyBound& bound,
                                         double defect_tol = kDefaultDefectTol,
                                         unsigned threads = 0);

}  // namespace ioss
