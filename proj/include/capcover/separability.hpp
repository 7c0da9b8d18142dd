// Non-separability of a cap family.
//
// A great sphere with unit normal n avoids cap (c, a) iff |<n,c>| > sin a.
// The family is separable iff some avoiding great sphere leaves caps on
// both sides, i.e. iff for some non-constant sign pattern e the open dual
// caps e_i D'_i (center e_i c_i, radius pi/2 - a_i) share a point. Each
// pattern is decided by maximizing the margin
//
//   g(n) = min_i ( e_i <n, c_i> - sin a_i )   over unit n,
//
// which is positive exactly when the pattern is realizable.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capcover/parallel.hpp"
#include "capcover/sphere.hpp"

namespace capcover {

struct SignPattern {
  std::vector<int> signs;  // entries are +1 or -1

  bool is_constant() const;
  SignPattern negated() const;
  std::string to_string() const;  // e.g. "+-+"
  friend bool operator==(const SignPattern&, const SignPattern&) = default;
};

struct SolverParams {
  int max_iters = 5000;
  double step_scale = 0.5;  // step length is step_scale / sqrt(k)
  int restarts = 8;         // random starts on top of the signed centers
  std::uint64_t seed = 0;
  // Upper bound on the number of active-set candidates examined by the
  // exact vertex enumeration; above it only the ascent runs.
  std::size_t vertex_budget = 200000;
  // Accept a connected intersection graph as a certificate of
  // non-separability.
  bool overlap_shortcut = true;
  Exec exec = Exec::parallel;
};

// Result of maximizing min_i(<n, a_i> - s_i) over the unit sphere.
struct MaximinResult {
  double value = 0.0;
  Vector argmax;
  // True when the active-set enumeration ran in full (the value is then the
  // global maximum for inputs in general position).
  bool exhaustive = false;
};

double min_margin(std::span<const Vector> axes, std::span<const double> offsets,
                  const Vector& n);

MaximinResult maximize_min_margin(std::span<const Vector> axes,
                                  std::span<const double> offsets,
                                  const SolverParams& params);

struct FeasibilityResult {
  double margin = 0.0;
  std::optional<Vector> witness;  // set iff margin > kEpsFeas
  bool exhaustive = false;
};

// Open cap with the same center and radius pi/2 - radius; the open flag is
// toggled so that dualizing twice restores the input.
Cap dual_cap(const Cap& c);

// Margin of the unit normal n for the pattern.
double pattern_margin(std::span<const Cap> caps, const SignPattern& pattern,
                      const Vector& n);

FeasibilityResult pattern_feasible(std::span<const Cap> caps,
                                   const SignPattern& pattern,
                                   const SolverParams& params);

enum class SeparabilityStatus { nonseparable, separable, indeterminate };
enum class SeparabilityMethod {
  trivial,
  overlap_graph,
  pattern_search,
  skipped,  // check not run
};

std::string to_string(SeparabilityStatus s);
std::string to_string(SeparabilityMethod m);
SeparabilityStatus status_from_string(const std::string& s);
SeparabilityMethod method_from_string(const std::string& s);

struct SeparabilityVerdict {
  SeparabilityStatus status = SeparabilityStatus::indeterminate;
  SeparabilityMethod method = SeparabilityMethod::pattern_search;
  std::optional<Vector> witness_normal;
  std::optional<SignPattern> witness_pattern;
  // Largest pattern margin found. NaN when no pattern was examined (single
  // cap, or overlap-graph certificate).
  double best_margin = 0.0;
  std::uint64_t patterns_checked = 0;

  bool separable() const { return status == SeparabilityStatus::separable; }
};

inline constexpr int kMaxSeparabilityCaps = 30;

// True iff the graph with an edge between every pair of (closed) caps that
// meet is connected. Intersecting caps cannot be separated by an avoiding
// great sphere, so connectivity certifies non-separability.
bool overlap_graph_connected(std::span<const Cap> caps);

// Throws BudgetError for more than kMaxSeparabilityCaps caps.
SeparabilityVerdict check_nonseparable(const Instance& inst,
                                       const SolverParams& params);

namespace detail {

// Walks masks over bits 0..n-2 (bit j set means cap j+1 gets sign -1) in
// order of increasing popcount, then increasing value.
class SplitMaskCursor {
 public:
  explicit SplitMaskCursor(int n);
  // False once every non-constant pattern has been produced.
  bool next(std::uint32_t& mask);

 private:
  std::uint32_t width_ = 0;
  std::uint32_t popcount_ = 0;
  std::uint32_t mask_ = 0;
  bool started_ = false;
};

SignPattern pattern_of_mask(int n, std::uint32_t mask);

}  // namespace detail

// Calls fn(pattern) for every non-constant pattern with signs[0] = +1, in
// order of increasing number of -1 entries; stops early when fn returns
// false. Throws BudgetError above kMaxSeparabilityCaps.
template <typename Fn>
void for_each_split_pattern(int n, Fn&& fn) {
  if (n > kMaxSeparabilityCaps) {
    throw BudgetError("sign pattern enumeration supports at most 30 caps");
  }
  detail::SplitMaskCursor cursor(n);
  std::uint32_t mask = 0;
  while (cursor.next(mask)) {
    if (!fn(detail::pattern_of_mask(n, mask))) return;
  }
}

}  // namespace capcover
