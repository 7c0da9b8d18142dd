// The Bang set L = { sum_i +-w_i } of a plank-vector family: maximal-norm
// signing, minimal violating subsets, and the Bang-cell diagnostics.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "capcover/parallel.hpp"
#include "capcover/separability.hpp"
#include "capcover/sphere.hpp"

namespace capcover {

struct SigningConfig {
  // Families up to this size are signed by exhaustive enumeration.
  int exact_threshold = 24;
  // Random starts of the local search used above the threshold.
  int restarts = 16;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
};

inline constexpr int kMaxExactSigning = 24;

// Plank vectors re-signed so that their plain sum is the chosen element of
// the Bang set.
struct OrientedFamily {
  std::vector<Vector> vectors;
  std::vector<double> half_widths;
  SignPattern signs_applied;  // vectors[i] = signs_applied[i] * input[i]
  Vector sum;
  bool heuristic = false;

  double norm() const { return sum.norm(); }
};

// Index set J with |sum_{i in J} w_i| > sin(sum_{i in J} a_i).
struct SubsetViolation {
  std::vector<int> indices;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Chooses signs maximizing |sum e_i w_i|. Exhaustive (Gray code over the
// 2^(n-1) patterns with e_0 = +1) when n <= config.exact_threshold, local
// search otherwise. Among maximizers the lexicographically smallest sign
// vector wins, ordering -1 before +1. `half_widths` may be empty, in which
// case asin|w_i| is used.
OrientedFamily max_norm_signing(std::span<const PlankVector> vectors,
                                std::span<const double> half_widths,
                                const SigningConfig& config);

// Local search only: flips any e_i with <w, e_i w_i> < |w_i|^2, which strictly
// increases |w|. Result is 1-flip optimal.
OrientedFamily local_search_signing(std::span<const PlankVector> vectors,
                                    std::span<const double> half_widths,
                                    int restarts, std::uint64_t seed);

// Cardinality-ascending search, so the first hit is inclusion-minimal.
// Returns nullopt when the whole family does not violate. Throws BudgetError
// above kMaxExactSigning vectors.
std::optional<SubsetViolation> find_minimal_violating_subset(
    const OrientedFamily& fam);

// Visits all 2^n elements of L (Gray-code order). n <= kMaxExactSigning.
void bang_set_enumerate(
    std::span<const PlankVector> vectors,
    const std::function<void(const SignPattern&, const Vector&)>& visit);

Vector signed_sum(std::span<const PlankVector> vectors,
                  const SignPattern& pattern);

// |t| >= |t + x - y| - kEpsGeom for every y in L, x the pattern's element.
bool is_max_in_translate(const Vector& t, const SignPattern& x_pattern,
                         std::span<const PlankVector> vectors);

// t in M_x = intersection of {y : <y, -e_i w_i> >= <w_i, w_i>}.
bool in_bang_cell(const Vector& t, const SignPattern& x_pattern,
                  std::span<const PlankVector> vectors);

// |<t, w_i>| >= <w_i, w_i> - kEpsGeom for every i.
bool outside_all_planks(const Vector& t, std::span<const PlankVector> vectors);

// Membership in A_w = {t in B : <t, -w> >= <w, w>}. Both the half-space form
// and the norm form |t| >= |t + 2w| are evaluated; a disagreement beyond
// kEpsGeom throws InvariantError. Throws ValidationError unless |t| < 1.
bool in_A_w(const Vector& t, const Vector& w);

}  // namespace capcover
