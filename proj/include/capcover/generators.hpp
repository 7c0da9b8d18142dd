// Instance generators used by the CLI, the tests and the benchmarks.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "capcover/sphere.hpp"

namespace capcover {

// n radii drawn uniformly from [0.5, 1.5] and scaled to sum to `total`.
std::vector<double> random_radii(int n, double total, std::uint64_t seed);

// Caps along a random geodesic; consecutive centers are
// (a_i + a_{i+1}) * (1 - overlap_factor) apart, so factor 0 makes
// neighbours tangent. `radii` holds n values, or one value used for all.
// Throws HypothesisError unless the radii sum to less than pi/2 - 1e-3.
Instance gen_chain(int dim, int n, std::span<const double> radii,
                   double overlap_factor, std::uint64_t seed);

// The same chain laid along the great circle through e_0 and e_1, first
// center at e_0.
Instance gen_chain_on_equator(int dim, std::span<const double> radii,
                              double overlap_factor);

// Two small caps near antipodal points; the great sphere orthogonal to the
// first center separates them.
Instance gen_separable(int dim, std::uint64_t seed);

// Random tree of pairwise-intersecting caps: each new cap meets a random
// earlier one. Radii are scaled to sum to `total`.
Instance gen_random_tree(int dim, int n, std::uint64_t seed,
                         double total = 1.2);

}  // namespace capcover
