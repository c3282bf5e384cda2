#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ioss/expr.hpp"

namespace ioss {

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t count = 1;
};

/// Axis-aligned box X x U x D sampled uniformly per axis, endpoints
/// included; an axis with count 1 contributes its midpoint only.
/// Points are enumerated with the first axis (x1) varying fastest.
class GridSpec {
 public:
  GridSpec(Dims dims, std::vector<Axis> axes);

  const Dims& dims() const { return dims_; }
  const std::vector<Axis>& axes() const { return axes_; }

  /// Product of per-axis counts. Throws if it overflows 64 bits.
  std::uint64_t size() const { return size_; }

  double coordinate(std::size_t axis, std::uint64_t k) const;
  Eigen::VectorXd point(std::uint64_t index) const;
  void point(std::uint64_t index, Eigen::Ref<Eigen::VectorXd> out) const;

  /// Distance between neighbouring samples per axis (0 for count-1 axes).
  std::vector<double> spacing() const;

  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;

  /// Same box, with every axis resampled at `count` points.
  GridSpec with_uniform_count(std::uint64_t count) const;

 private:
  Dims dims_;
  std::vector<Axis> axes_;
  std::uint64_t size_ = 1;
};

/// Materialises every point of `g` in enumeration order. Refuses grids larger
/// than `limit` points; use GridSpec::point for lazy access instead.
std::vector<Eigen::VectorXd> grid_points(const GridSpec& g, std::uint64_t limit = 50'000'000);

/// Grid file: one line per axis in order x1..xn, u1..uq, d1..dm,
/// each "<lo> <hi> <count>". `#` comments and blank lines are ignored.
GridSpec parse_grid(std::string_view text, const Dims& dims);
GridSpec load_grid(const std::filesystem::path& path, const Dims& dims);

}  // namespace ioss
