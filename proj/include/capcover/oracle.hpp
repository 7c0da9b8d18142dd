// Brute-force checks that share no code path with the analytic predicates
// they verify: sampling, direction grids, and randomized harnesses.

#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "capcover/parallel.hpp"
#include "capcover/sphere.hpp"

namespace capcover {

struct OracleReport {
  std::uint64_t checked = 0;
  // Number of samples/directions that failed; only the first
  // kMaxWitnesses of them are kept in `witnesses`.
  std::uint64_t violations = 0;
  std::vector<Vector> witnesses;
  // Largest excess found (outside distance for containment, best separating
  // margin for the grid); -inf when nothing was measured.
  double max_violation = 0.0;
  // lemma7 only: number of triples whose premise held.
  std::uint64_t premises = 0;

  bool pass() const { return violations == 0; }
};

inline constexpr std::size_t kMaxWitnesses = 32;

using Region = std::variant<Cap, Zone>;

// Uniform point of a cap (area-uniform) or zone (rejection from the sphere).
Vector sample_region(const Region& r, std::mt19937_64& rng);

// Signed excess of p outside the region: > 0 means outside.
double region_excess(const Region& r, const Vector& p);

// Draws `samples` points of `inner` in batches seeded by split_seed(seed, b)
// and reports every point farther than kEpsGeom outside `outer`.
OracleReport sampled_containment(const Region& outer, const Region& inner,
                                 std::uint64_t samples, std::uint64_t seed,
                                 Exec exec = Exec::parallel);

// i-th of `count` points of the spherical Fibonacci lattice on S^2.
Vector fibonacci_direction(std::uint64_t i, std::uint64_t count);

// Scans `resolution` lattice normals n and flags those with
// min_i |<n,c_i>| - sin a_i > kEpsFeas and non-constant signs of <n,c_i>.
// Pass means no avoiding separating great circle was found. dim must be 2.
OracleReport grid_separability(const Instance& inst, std::uint64_t resolution,
                               Exec exec = Exec::parallel);

struct EnclosingCap {
  Vector center;
  double radius = 0.0;  // max_i(dist(center, c_i) + a_i), an upper bound
};

// max_i(dist(center, c_i) + a_i)
double enclosing_radius(const Vector& center, std::span<const Cap> caps);

// Geodesic subgradient descent with restarts, followed by a bisection on the
// radius that asks whether the caps of radius r - a_i share a point.
EnclosingCap minimal_enclosing_cap_estimate(std::span<const Cap> caps,
                                            int iters, int restarts,
                                            std::uint64_t seed);

struct Lemma7Options {
  std::uint64_t families = 1000;
  std::uint64_t samples_per_family = 100;
  int max_n = 6;
  std::uint64_t seed = 0;
  // Mutation self-test: check membership in the Bang cell of -x instead of x.
  bool corrupt_membership = false;
  Exec exec = Exec::parallel;
};

// For random plank families, sign patterns x and points t of the open unit
// ball: whenever t has maximal norm in t + x - L, t must lie in the Bang
// cell M_x and outside every open plank.
OracleReport lemma7_harness(const Lemma7Options& options);

// Evaluates in_A_w on `points` random t in B against random plank sums w
// with |w| < 1, counting disagreements between its two membership forms.
OracleReport a_w_form_harness(std::uint64_t points, std::uint64_t seed);

}  // namespace capcover
