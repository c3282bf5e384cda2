#include "ioss/grid.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ioss/error.hpp"

namespace ioss {

GridSpec::GridSpec(Dims dims, std::vector<Axis> axes) : dims_(dims), axes_(std::move(axes)) {
  if (static_cast<int>(axes_.size()) != dims_.nz()) {
    throw DimensionError("grid has " + std::to_string(axes_.size()) + " axes, model needs " +
                         std::to_string(dims_.nz()));
  }
  size_ = 1;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const Axis& a = axes_[i];
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi)) {
      throw Error("grid axis " + std::to_string(i + 1) + " has non-finite bounds");
    }
    if (a.lo > a.hi) throw Error("grid axis " + std::to_string(i + 1) + " has lo > hi");
    if (a.count < 1) throw Error("grid axis " + std::to_string(i + 1) + " has count < 1");
    if (size_ > UINT64_MAX / a.count) throw Error("grid size overflows 64 bits");
    size_ *= a.count;
  }
}

double GridSpec::coordinate(std::size_t axis, std::uint64_t k) const {
  const Axis& a = axes_[axis];
  if (a.count == 1) return 0.5 * (a.lo + a.hi);
  if (k + 1 == a.count) return a.hi;
  const double t = static_cast<double>(k) / static_cast<double>(a.count - 1);
  return a.lo + t * (a.hi - a.lo);
}

Eigen::VectorXd GridSpec::point(std::uint64_t index) const {
  Eigen::VectorXd z(dims_.nz());
  point(index, z);
  return z;
}

void GridSpec::point(std::uint64_t index, Eigen::Ref<Eigen::VectorXd> out) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const std::uint64_t c = axes_[i].count;
    out[static_cast<Eigen::Index>(i)] = coordinate(i, index % c);
    index /= c;
  }
}

std::vector<double> GridSpec::spacing() const {
  std::vector<double> out;
  out.reserve(axes_.size());
  for (const Axis& a : axes_) {
    out.push_back(a.count > 1 ? (a.hi - a.lo) / static_cast<double>(a.count - 1) : 0.0);
  }
  return out;
}

Eigen::VectorXd GridSpec::lower() const {
  Eigen::VectorXd v(dims_.nz());
  for (std::size_t i = 0; i < axes_.size(); ++i) v[static_cast<Eigen::Index>(i)] = axes_[i].lo;
  return v;
}

Eigen::VectorXd GridSpec::upper() const {
  Eigen::VectorXd v(dims_.nz());
  for (std::size_t i = 0; i < axes_.size(); ++i) v[static_cast<Eigen::Index>(i)] = axes_[i].hi;
  return v;
}

GridSpec GridSpec::with_uniform_count(std::uint64_t count) const {
  std::vector<Axis> axes = axes_;
  for (Axis& a : axes) a.count = count;
  return GridSpec(dims_, std::move(axes));
}

std::vector<Eigen::VectorXd> grid_points(const GridSpec& g, std::uint64_t limit) {
  if (g.size() > limit) {
    throw Error("grid has " + std::to_string(g.size()) + " points; refusing to materialise more than " +
                std::to_string(limit));
  }
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(g.size());
  for (std::uint64_t i = 0; i < g.size(); ++i) pts.push_back(g.point(i));
  return pts;
}

GridSpec parse_grid(std::string_view text, const Dims& dims) {
  std::vector<Axis> axes;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream line(raw);
    std::string first;
    if (!(line >> first)) continue;
    Axis a;
    std::istringstream lo_in(first);
    long long count = 0;
    if (!(lo_in >> a.lo) || !(line >> a.hi >> count)) {
      throw ParseError(ParseError::Kind::Syntax, lineno, 1, "expected '<lo> <hi> <count>'");
    }
    std::string extra;
    if (line >> extra) throw ParseError(ParseError::Kind::Syntax, lineno, 1, "trailing text");
    if (count < 1) throw ParseError(ParseError::Kind::Syntax, lineno, 1, "count must be >= 1");
    if (a.lo > a.hi) throw ParseError(ParseError::Kind::Syntax, lineno, 1, "lo must not exceed hi");
    a.count = static_cast<std::uint64_t>(count);
    axes.push_back(a);
  }
  if (static_cast<int>(axes.size()) != dims.nz()) {
    throw ParseError(ParseError::Kind::DimensionMismatch, 0, 0,
                     "grid file has " + std::to_string(axes.size()) + " axes, model needs n+q+m = " +
                         std::to_string(dims.nz()));
  }
  return GridSpec(dims, std::move(axes));
}

GridSpec load_grid(const std::filesystem::path& path, const Dims& dims) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open grid file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str(), dims);
}

}  // namespace ioss
