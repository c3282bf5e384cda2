#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ioss/certcore.hpp"
#include "ioss/discretize.hpp"
#include "ioss/grid.hpp"
#include "ioss/system.hpp"

namespace ioss {

/// Continuous-time LMI matrix at one point:
///   [ PA + A'P + kP - C'RC    PB - C'RD  ]
///   [ B'P - D'RC             -D'RD - Q   ]
/// The (1,1) block is formed as S + S' with S = PA.
SymMatrix assemble_ct_lmi(const PointEval& pe, const Certificate& c);

/// Same, from raw matrices (used by the synthesiser on cached linearizations).
SymMatrix assemble_ct_lmi(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                          const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                          const Eigen::MatrixXd& R, double kappa);

/// Discrete-time LMI matrix at one point, with supply matrices Qt, Rt and
/// factor eta taken from `dc`:
///   [ A~'PA~ - eta P - C'RtC    A~'PB~ - C'RtD        ]
///   [ B~'PA~ - D'RtC            B~'PB~ - Qt - D'RtD   ]
SymMatrix assemble_dt_lmi(const Eigen::MatrixXd& a_tilde, const Eigen::MatrixXd& b_tilde,
                          const PointEval& pe, const DtCertificate& dc);

/// Aggregated verdicts of a pointwise LMI check over a grid.
struct CheckReport {
  std::uint64_t total_points = 0;
  std::uint64_t violations = 0;
  std::uint64_t domain_errors = 0;
  /// False when any point could not be evaluated; such a run is a grid
  /// configuration problem, not a verdict.
  bool complete = true;
  double worst_lambda_max = 0.0;
  std::uint64_t argmax_index = 0;
  Eigen::VectorXd argmax_point;
  /// max over points of lambda_max / max(1, |M|_2); violations == 0 iff this
  /// is <= tolerance.
  double worst_normalized_lambda_max = 0.0;
  double lambda_max_min = 0.0;
  double lambda_max_median = 0.0;
  double tolerance = kDefaultNsdTol;
  double wall_time_s = 0.0;
  std::vector<double> grid_spacing;
  /// DT checks only: the certificate's tau is not below its tau1.
  bool out_of_certificate = false;
  std::string first_domain_error;
  std::vector<std::string> warnings;

  bool certified() const { return complete && violations == 0 && total_points > 0; }
};

CheckReport check_ct_grid(const SystemSpec& sys, const GridSpec& g, const Certificate& c,
                          double tol = kDefaultNsdTol, unsigned threads = 0);

CheckReport check_dt_grid(const SystemSpec& sys, Scheme scheme, const GridSpec& g,
                          const DtCertificate& dc, double tol = kDefaultNsdTol,
                          unsigned threads = 0);

}  // namespace ioss
