#include "ioss/constants.hpp"

#include <random>

#include "ioss/certcore.hpp"
#include "ioss/error.hpp"
#include "ioss/parallel.hpp"

namespace ioss {

namespace {

template <class PerPoint>
double grid_max(const GridSpec& g, unsigned threads, PerPoint per_point) {
  if (g.size() == 0) throw Error("grid is empty");
  return parallel_reduce<double>(
      g.size(), threads,
      [&](std::uint64_t begin, std::uint64_t end) {
        Eigen::VectorXd z(g.dims().nz());
        double best = 0.0;
        for (std::uint64_t i = begin; i < end; ++i) {
          g.point(i, z);
          best = std::max(best, per_point(z));
        }
        return best;
      },
      [](double a, double b) { return std::max(a, b); });
}

}  // namespace

double estimate_Lf(const SystemSpec& sys, const GridSpec& g, unsigned threads) {
  return grid_max(g, threads, [&](const Eigen::VectorXd& z) {
    return spectral_norm(eval_point(sys, z).AB());
  });
}

double estimate_cf(const SystemSpec& sys, const GridSpec& g, unsigned threads) {
  return grid_max(g, threads, [&](const Eigen::VectorXd& z) { return eval_f(sys, z).norm(); });
}

double estimate_Ldf(const SystemSpec& sys, const GridSpec& g, std::uint64_t n_pairs,
                    std::uint64_t seed) {
  if (n_pairs < 1) throw Error("estimate_Ldf needs at least one pair");
  const Eigen::VectorXd lo = g.lower();
  const Eigen::VectorXd hi = g.upper();
  const Eigen::Index nz = lo.size();

  std::vector<Eigen::Index> wide_axes;
  for (Eigen::Index i = 0; i < nz; ++i)
    if (hi[i] > lo[i]) wide_axes.push_back(i);
  if (wide_axes.empty()) return 0.0;  // the box is a single point

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_axis(0, wide_axes.size() - 1);
  auto draw = [&] {
    Eigen::VectorXd z(nz);
    for (Eigen::Index i = 0; i < nz; ++i) z[i] = lo[i] + unit(rng) * (hi[i] - lo[i]);
    return z;
  };

  constexpr double kMinSeparation = 1e-12;
  constexpr int kMaxRedraws = 1000;
  double best = 0.0;
  for (std::uint64_t k = 0; k < n_pairs; ++k) {
    Eigen::VectorXd z;
    Eigen::VectorXd zt;
    double dist = 0.0;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      z = draw();
      if (k % 2 == 0) {
        zt = draw();
      } else {
        zt = z;
        const Eigen::Index a = wide_axes[pick_axis(rng)];
        zt[a] = lo[a] + unit(rng) * (hi[a] - lo[a]);
      }
      dist = (z - zt).norm();
      if (dist >= kMinSeparation) break;
    }
    if (dist < kMinSeparation) continue;
    const Eigen::MatrixXd diff = eval_point(sys, z).AB() - eval_point(sys, zt).AB();
    best = std::max(best, spectral_norm(diff) / dist);
  }
  return kLdfSafetyFactor * best;
}

}  // namespace ioss
