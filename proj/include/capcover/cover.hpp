// Constructive covering: a non-separable family of caps with radii summing
// to less than pi/2 is covered by one cap whose radius is that sum.
//
// Caps are dualized into zones, zones whose plank vectors sum past the
// bound are merged (smallest violating subsets first) until the maximal
// signed sum w satisfies |w| <= sin(sum of half-widths), and the cover cap
// is centered on +-w/|w|.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "capcover/bang.hpp"
#include "capcover/separability.hpp"
#include "capcover/sphere.hpp"

namespace capcover {

// The covering construction failed its own containment check.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// The input was refused because it is (or could not be shown not to be)
// separable.
class RefusedInput : public Error {
 public:
  RefusedInput(const std::string& what, SeparabilityVerdict verdict)
      : Error(what), verdict_(std::move(verdict)) {}
  const SeparabilityVerdict& verdict() const { return verdict_; }

 private:
  SeparabilityVerdict verdict_;
};

struct MergeStep {
  // Positions in the zone family as it was before this step.
  std::vector<int> merged_indices;
  // Original zone indices covered by the new zone.
  std::vector<int> members;
  Zone new_zone;
  // |w_I| - sin(a_I)
  double norm_slack = 0.0;
  // sin(a_I - a_i) - |w_I - w_i| per merged zone
  std::vector<double> member_slacks;
  double half_width_sum_before = 0.0;
  double half_width_sum_after = 0.0;
};

struct CoverOptions {
  bool skip_check = false;
  SolverParams solver;
  SigningConfig signing;
  // Re-run the separability check on the dualized family after every merge.
  bool check_merges_nonseparable = false;
};

struct MergeResult {
  Zone zone;
  Vector direction;  // w_I / |w_I|, before sign canonicalization
  double norm_slack = 0.0;
  std::vector<double> member_slacks;
};

// Merges zones whose oriented plank vectors are `oriented` (oriented[i] is
// +-w(zones[i])) into the zone with normal w_I/|w_I| and half-width equal to
// the sum of half-widths, w_I = sum oriented[i]. Throws InvariantError if
// the merge hypotheses fail beyond kEpsGeom and ConstructionError if the
// result does not contain every input zone.
MergeResult merge_zones(std::span<const Zone> zones,
                        std::span<const Vector> oriented);

struct Reduction {
  std::vector<Zone> zones;
  // For each current zone, the original indices it covers.
  std::vector<std::vector<int>> groups;
  std::vector<MergeStep> trace;
  OrientedFamily family;    // final orientation
  double initial_w_norm = 0.0;
  bool heuristic = false;   // some orientation used local search
};

// Throws HypothesisError when the half-widths sum to pi/2 or more.
Reduction reduce_to_small_w(std::span<const Zone> zones,
                            const CoverOptions& options);

struct CoveringZone {
  Zone zone;         // canonical normal, half-width = sum of inputs
  Vector direction;  // w/|w| with the sign of the final oriented sum
  Reduction reduction;
  std::vector<double> slacks;  // zone_containment_slack per input zone
  bool contains_all = false;
};

CoveringZone covering_zone(std::span<const Zone> zones,
                           const CoverOptions& options);

struct CoverCertificate {
  Cap cover_cap;
  std::vector<Cap> input_caps;
  std::vector<double> containment_slacks;
  std::vector<MergeStep> merge_trace;
  Vector final_w;
  double initial_w_norm = 0.0;
  bool heuristic_signing = false;
  SeparabilityVerdict separability;
  bool valid = false;
};

// Throws HypothesisError when the radii sum to pi/2 - kEpsGeom or more, and
// RefusedInput when the separability check (unless skipped) does not
// report the family non-separable.
CoverCertificate cover_caps(const Instance& inst, const CoverOptions& options);

// Recomputes slacks of `cover` against every cap.
std::vector<double> containment_slacks(const Cap& cover,
                                       std::span<const Cap> caps);

}  // namespace capcover
