#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ioss/certcore.hpp"
#include "ioss/grid.hpp"
#include "ioss/lmi.hpp"
#include "ioss/system.hpp"

namespace ioss {

/// 16 values from 10 down to 1e-3, log-spaced.
std::vector<double> default_kappa_grid();

struct SynthOptions {
  std::vector<double> kappas = default_kappa_grid();  // tried in the given order
  int max_iterations = 400;
  double step0 = 0.2;     // step_k = step0 / sqrt(k + 1), relative to each block's norm
  double margin = 1e-6;   // target phi <= -margin
  double floor_eps = 1e-6;
  bool full_qr = false;   // diagonal Q and R unless set
  std::uint64_t seed = 0;
  double tol = kDefaultNsdTol;
  unsigned threads = 0;
  bool scan_all = false;  // keep going after the first feasible kappa
  /// Called on every candidate just before the verifier sees it. Test hook.
  std::function<void(Eigen::MatrixXd& P, Eigen::MatrixXd& Q, Eigen::MatrixXd& R, double& kappa)>
      candidate_hook;
};

struct SynthLogEntry {
  double kappa = 0.0;
  int iterations = 0;
  double best_phi = 0.0;
  bool reached_margin = false;
  bool verified = false;
  std::vector<double> best_phi_history;  // nonincreasing
};

struct SynthResult {
  std::optional<Certificate> certificate;
  std::optional<CheckReport> verification;
  std::vector<SynthLogEntry> log;
  std::vector<double> feasible_kappas;  // verified ones only
  std::uint64_t unique_linearizations = 0;
  int rejected_candidates = 0;
  double wall_time_s = 0.0;

  bool feasible() const { return certificate.has_value(); }
};

/// Projected subgradient search on phi(P,Q,R) = max over grid points of
/// lambda_max of the CT LMI matrix, with P, Q, R >= eps I and trace(P) = n.
/// An infeasible result only means this search failed on this grid.
SynthResult synthesize_certificate(const SystemSpec& sys, const GridSpec& g,
                                   const SynthOptions& opts = {});

}  // namespace ioss
