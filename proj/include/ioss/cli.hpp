#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ioss/system.hpp"

namespace ioss {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitHolds = 0, kExitViolated = 1, kExitError = 2 };

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless --out is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Timing of CT linearizations versus RK2 one-step linearizations over the
/// box [lo, hi], each swept only along the coordinates its Jacobians can
/// depend on (the rest held at the box midpoint).
struct BenchReport {
  std::vector<int> ct_coords;
  std::vector<int> rk2_coords;
  std::uint64_t ct_points = 0;
  std::uint64_t rk2_points = 0;
  std::uint64_t points_per_direction = 0;
  double tau = 0.0;
  int repeats = 0;
  std::vector<double> ct_times_s;
  std::vector<double> rk2_times_s;
  double ct_median_s = 0.0;
  double rk2_median_s = 0.0;
  double ratio = 0.0;            // rk2 / max(ct, 1 ns)
  double ct_relative_spread = 0.0;  // (max - min) / median over repeats
  double rk2_relative_spread = 0.0;
  double checksum = 0.0;         // keeps the sweeps observable
};

BenchReport run_linearization_bench(const SystemSpec& sys, const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi, std::uint64_t points, double tau,
                                    int repeats);

}  // namespace ioss
