#pragma once

#include <cstdint>

#include "ioss/grid.hpp"
#include "ioss/system.hpp"

namespace ioss {

/// max over grid points of |[A B]|_2. Domain errors propagate.
double estimate_Lf(const SystemSpec& sys, const GridSpec& g, unsigned threads = 0);

/// max over grid points of |f|_2.
double estimate_cf(const SystemSpec& sys, const GridSpec& g, unsigned threads = 0);

inline constexpr double kLdfSafetyFactor = 1.1;

/// Sampled Lipschitz constant of [A B] over the grid box, times 1.1.
/// Half of the pairs are drawn independently and uniformly in the box; the
/// other half differ in a single coordinate, which probes the directional
/// slopes a box-filling sample rarely aligns with. Pairs closer than 1e-12
/// are redrawn. Deterministic for a fixed seed.
double estimate_Ldf(const SystemSpec& sys, const GridSpec& g, std::uint64_t n_pairs,
                    std::uint64_t seed);

}  // namespace ioss
