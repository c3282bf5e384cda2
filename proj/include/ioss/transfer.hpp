#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ioss/certcore.hpp"
#include "ioss/discretize.hpp"
#include "ioss/grid.hpp"
#include "ioss/lmi.hpp"
#include "ioss/system.hpp"

namespace ioss {

struct TransferInput {
  Certificate cert;
  ConsistencyBound bound;
  double lambda_min_P = 0.0;
  double lambda_max_P = 0.0;
};

TransferInput make_transfer_input(const Certificate& cert, const ConsistencyBound& bound);

/// alpha(tau) = (lmax(P)/lmin(P)) (4 rho (1 + tau L_f + tau rho) + tau L_f^2)
double alpha(double tau, const TransferInput& ti);

struct Tau1Result {
  double tau1 = 0.0;
  std::string binding;  // "1/kappa", "tau0" or "alpha_inv"
  double inv_kappa = 0.0;
  double tau0 = 0.0;       // may be +inf
  double alpha_inv = 0.0;  // +inf when alpha is identically zero
  int bisection_steps = 0;
};

/// tau1 = min{1/kappa, tau0, alpha^-1(kappa)}. alpha^-1 is bracketed by
/// doubling and then bisected to relative 1e-10; the returned value t
/// always satisfies alpha(t) <= kappa.
Tau1Result tau1(const TransferInput& ti);

/// DT certificate at tau in the open interval (0, tau1). Throws
/// TransferError naming the binding constraint otherwise.
DtCertificate dt_certificate(const TransferInput& ti, double tau);
DtCertificate dt_certificate(const TransferInput& ti, const Tau1Result& t1, double tau);

/// |x - xt|_P^2
double lyap_value(const Eigen::VectorXd& x, const Eigen::VectorXd& xt, const SymMatrix& P);

struct EtaRange {
  std::size_t count = 0;
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  double eta_min = 0.0;
  double eta_max = 0.0;
  std::size_t outside = 0;

  bool holds() const { return count > 0 && outside == 0; }
};

/// eta(tau) on `count` log-spaced periods between 1e-9 tau1 and
/// (1 - 1e-9) tau1.
EtaRange eta_range(const TransferInput& ti, const Tau1Result& t1, std::size_t count = 1000);

/// Sampled check of W(F(x,u,d), F(xt,ut,d)) <= eta W(x,xt) + |u-ut|_Qt^2 + |h-ht|_Rt^2.
struct LyapunovReport {
  std::uint64_t samples = 0;
  std::uint64_t violations = 0;
  std::uint64_t domain_errors = 0;
  /// max over samples of lhs - rhs (negative means every sample had room)
  double worst_slack = 0.0;
  std::uint64_t worst_index = 0;
  Eigen::VectorXd worst_x, worst_xt, worst_u, worst_ut, worst_d;
  double tolerance = kDefaultNsdTol;
  std::uint64_t seed = 0;
  bool output_affine = true;
  double wall_time_s = 0.0;
  std::vector<std::string> warnings;

  bool holds() const { return violations == 0 && domain_errors == 0 && samples > 0; }
};

/// Sample i is drawn from its own generator seeded with seed + i, uniformly
/// in the grid box. A sample violates when lhs > rhs + tol * max(|lhs|, |rhs|).
LyapunovReport check_lyapunov_sampled(const SystemSpec& sys, Scheme scheme,
                                      const DtCertificate& dc, const GridSpec& g,
                                      std::uint64_t n_samples, std::uint64_t seed,
                                      double tol = kDefaultNsdTol, unsigned threads = 0);

struct TransferOptions {
  Scheme scheme = Scheme::Euler;
  double tau = 0.1;
  std::optional<double> lipschitz_f;   // overrides estimate_Lf
  std::optional<double> lipschitz_df;  // overrides estimate_Ldf
  std::optional<double> sigma_slope;   // overrides L_df * c_f
  double delta0 = kDefaultDelta0;
  std::uint64_t ldf_pairs = 20000;
  std::uint64_t lyapunov_samples = 10000;
  std::uint64_t seed = 0;
  double tol = kDefaultNsdTol;
  unsigned threads = 0;
};

struct TransferReport {
  double lipschitz_f = 0.0;
  double c_f = 0.0;
  double lipschitz_df = 0.0;
  bool ldf_estimated = false;
  ConsistencyBound bound;
  Tau1Result t1;
  double tau = 0.0;
  bool tau_admissible = false;
  double alpha_at_tau = 0.0;
  std::optional<DtCertificate> dt;
  std::optional<ConsistencyReport> consistency;
  std::optional<CheckReport> dt_check;
  std::optional<LyapunovReport> lyapunov;
  std::optional<EtaRange> etas;
  std::vector<std::string> warnings;

  bool holds() const { return tau_admissible && dt_check && dt_check->certified(); }
};

/// constants -> rho -> tau1 -> DT certificate -> DT grid check -> sampled
/// Lyapunov check, all on the grid `g`.
TransferReport run_transfer(const SystemSpec& sys, const GridSpec& g, const Certificate& cert,
                            const TransferOptions& opts);

}  // namespace ioss
