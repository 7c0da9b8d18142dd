#include "capcover/cover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace capcover {

namespace {

double sum_half_widths(std::span<const Zone> zones) {
  double s = 0.0;
  for (const Zone& z : zones) s += z.half_width;
  return s;
}

std::string dump_zones(std::span<const Zone> zones) {
  std::string out;
  for (const Zone& z : zones) {
    out += fmt::format("  normal={} half_width={:.17g}\n", to_string(z.normal),
                       z.half_width);
  }
  return out;
}

}  // namespace

MergeResult merge_zones(std::span<const Zone> zones,
                        std::span<const Vector> oriented) {
  if (zones.size() < 2 || zones.size() != oriented.size()) {
    throw InvariantError(fmt::format(
        "merge needs at least two zones with matching vectors, got {}/{}",
        zones.size(), oriented.size()));
  }
  double alpha = 0.0;
  Vector w = Vector::Zero(oriented.front().size());
  for (std::size_t i = 0; i < zones.size(); ++i) {
    const double expected = std::sin(zones[i].half_width);
    if (std::abs(oriented[i].norm() - expected) > kEpsGeom ||
        std::abs(std::abs(oriented[i].dot(zones[i].normal)) - expected) >
            kEpsGeom) {
      throw ValidationError(fmt::format(
          "vector {} is not a signed plank vector of its zone", i));
    }
    alpha += zones[i].half_width;
    w += oriented[i];
  }
  if (alpha >= kHalfPi) {
    throw InvariantError(fmt::format(
        "merged half-width {:.17g} reaches pi/2", alpha));
  }

  MergeResult out;
  out.norm_slack = w.norm() - std::sin(alpha);
  if (out.norm_slack < -kEpsGeom) {
    throw InvariantError(fmt::format(
        "merge hypothesis |w_I| >= sin(a_I) fails by {:.3g}", -out.norm_slack));
  }
  for (std::size_t i = 0; i < zones.size(); ++i) {
    const double slack =
        std::sin(alpha - zones[i].half_width) - (w - oriented[i]).norm();
    if (slack < -kEpsGeom) {
      throw InvariantError(fmt::format(
          "merge hypothesis |w_I - w_{}| <= sin(a_I - a_{}) fails by {:.3g}", i,
          i, -slack));
    }
    out.member_slacks.push_back(slack);
  }

  out.direction = w / w.norm();
  out.zone = Zone{canonical_sign(out.direction), alpha};
  for (std::size_t i = 0; i < zones.size(); ++i) {
    if (!zone_contains_zone(out.zone, zones[i])) {
      throw ConstructionError(fmt::format(
          "merged zone (normal={}, half_width={:.17g}) misses zone {} by "
          "{:.3g}\n{}",
          to_string(out.zone.normal), alpha, i,
          -zone_containment_slack(out.zone, zones[i]), dump_zones(zones)));
    }
  }
  return out;
}

namespace {

Reduction reduce(std::span<const Zone> input, std::span<const Vector> poles,
                 const CoverOptions& options) {
  if (input.empty()) throw ValidationError("no zones to reduce");
  for (const Zone& z : input) {
    validate_zone(z);
    require_same_dim(z.normal, input.front().normal);
  }
  if (sum_half_widths(input) >= kHalfPi) {
    throw HypothesisError(fmt::format(
        "half-widths sum to {:.17g} >= pi/2", sum_half_widths(input)));
  }

  Reduction red;
  red.zones.assign(input.begin(), input.end());
  std::vector<Vector> pole;
  for (std::size_t i = 0; i < input.size(); ++i) {
    red.groups.push_back({static_cast<int>(i)});
    pole.push_back(poles.empty() ? input[i].normal : poles[i]);
  }

  const std::size_t max_merges = input.size() - 1;
  for (std::size_t round = 0;; ++round) {
    std::vector<PlankVector> vecs;
    std::vector<double> hw;
    for (const Zone& z : red.zones) {
      vecs.push_back(plank_vector(z));
      hw.push_back(z.half_width);
    }
    red.family = max_norm_signing(vecs, hw, options.signing);
    red.heuristic = red.heuristic || red.family.heuristic;
    if (round == 0) red.initial_w_norm = red.family.norm();

    const double before = sum_half_widths(red.zones);
    if (red.family.norm() <= std::sin(before) + kEpsGeom) break;
    if (round >= max_merges) {
      throw InvariantError("reduction exceeded n - 1 merges");
    }

    const auto violation = find_minimal_violating_subset(red.family);
    if (!violation) {
      throw InvariantError("family violates the bound but no subset does");
    }
    std::vector<Zone> sub;
    std::vector<Vector> sub_w;
    for (int i : violation->indices) {
      sub.push_back(red.zones[i]);
      sub_w.push_back(red.family.vectors[i]);
    }
    const MergeResult merged = merge_zones(sub, sub_w);

    MergeStep step;
    step.merged_indices = violation->indices;
    step.new_zone = merged.zone;
    step.norm_slack = merged.norm_slack;
    step.member_slacks = merged.member_slacks;
    step.half_width_sum_before = before;

    const int head = violation->indices.front();
    std::vector<Zone> zones;
    std::vector<std::vector<int>> groups;
    std::vector<Vector> next_pole;
    for (int i = 0; i < static_cast<int>(red.zones.size()); ++i) {
      const bool member =
          std::binary_search(violation->indices.begin(),
                             violation->indices.end(), i);
      if (i == head) {
        std::vector<int> g;
        for (int j : violation->indices) {
          g.insert(g.end(), red.groups[j].begin(), red.groups[j].end());
        }
        std::sort(g.begin(), g.end());
        step.members = g;
        zones.push_back(merged.zone);
        groups.push_back(std::move(g));
        const Vector& d = merged.direction;
        next_pole.push_back(d.dot(pole[head]) >= 0.0 ? d : Vector(-d));
      } else if (!member) {
        zones.push_back(red.zones[i]);
        groups.push_back(red.groups[i]);
        next_pole.push_back(pole[i]);
      }
    }
    red.zones = std::move(zones);
    red.groups = std::move(groups);
    pole = std::move(next_pole);

    step.half_width_sum_after = sum_half_widths(red.zones);
    if (std::abs(step.half_width_sum_after - before) > 1e-12) {
      throw InvariantError(fmt::format(
          "merge changed the total half-width from {:.17g} to {:.17g}",
          before, step.half_width_sum_after));
    }
    red.trace.push_back(std::move(step));

    if (options.check_merges_nonseparable) {
      Instance dual;
      dual.dim = static_cast<int>(input.front().normal.size()) - 1;
      for (std::size_t i = 0; i < red.zones.size(); ++i) {
        dual.caps.push_back(Cap{pole[i], red.zones[i].half_width});
      }
      const SeparabilityVerdict v = check_nonseparable(dual, options.solver);
      if (v.status != SeparabilityStatus::nonseparable) {
        throw InvariantError(fmt::format(
            "family became {} after merge {}", to_string(v.status),
            red.trace.size()));
      }
    }
  }
  return red;
}

CoveringZone covering(std::span<const Zone> zones,
                      std::span<const Vector> poles,
                      const CoverOptions& options) {
  CoveringZone out;
  out.reduction = reduce(zones, poles, options);
  const Vector& w = out.reduction.family.sum;
  const double wn = w.norm();
  if (!(wn > 0.0)) {
    throw InvariantError("maximal signed sum vanished");
  }
  out.direction = w / wn;
  out.zone = Zone{canonical_sign(out.direction), sum_half_widths(zones)};
  out.contains_all = true;
  for (const Zone& z : zones) {
    out.slacks.push_back(zone_containment_slack(out.zone, z));
    if (out.slacks.back() < -kEpsGeom) out.contains_all = false;
  }
  return out;
}

}  // namespace

Reduction reduce_to_small_w(std::span<const Zone> zones,
                            const CoverOptions& options) {
  return reduce(zones, {}, options);
}

CoveringZone covering_zone(std::span<const Zone> zones,
                           const CoverOptions& options) {
  return covering(zones, {}, options);
}

std::vector<double> containment_slacks(const Cap& cover,
                                       std::span<const Cap> caps) {
  std::vector<double> out;
  out.reserve(caps.size());
  for (const Cap& c : caps) out.push_back(cap_containment_slack(cover, c));
  return out;
}

CoverCertificate cover_caps(const Instance& inst, const CoverOptions& options) {
  validate_instance(inst);
  const double total = sum_of_radii(inst);
  if (total >= kHalfPi - kEpsGeom) {
    throw HypothesisError(fmt::format(
        "radii sum to {:.17g}; the covering theorem needs less than pi/2",
        total));
  }

  CoverCertificate cert;
  cert.input_caps = inst.caps;
  if (options.skip_check) {
    cert.separability.status = SeparabilityStatus::indeterminate;
    cert.separability.method = SeparabilityMethod::skipped;
    cert.separability.best_margin = std::numeric_limits<double>::quiet_NaN();
  } else {
    cert.separability = check_nonseparable(inst, options.solver);
    if (cert.separability.status != SeparabilityStatus::nonseparable) {
      throw RefusedInput(
          fmt::format("input is {}; refusing to cover",
                      to_string(cert.separability.status)),
          cert.separability);
    }
  }

  std::vector<Zone> zones;
  std::vector<Vector> poles;
  for (const Cap& c : inst.caps) {
    zones.push_back(cap_to_zone(c));
    poles.push_back(c.center);
  }
  const CoveringZone cz = covering(zones, poles, options);

  // Of the two caps of S minus the covering zone, take the one whose
  // concentric cap of the full radius fits the inputs best.
  auto worst = [&](const Vector& center) {
    double m = -std::numeric_limits<double>::infinity();
    for (const Cap& c : inst.caps) {
      m = std::max(m, spherical_distance(center, c.center) + c.radius);
    }
    return m;
  };
  const Vector plus = cz.direction;
  const Vector minus = -cz.direction;
  const Vector& center = worst(minus) < worst(plus) ? minus : plus;

  cert.cover_cap = Cap{center, total};
  cert.containment_slacks = containment_slacks(cert.cover_cap, inst.caps);
  cert.merge_trace = cz.reduction.trace;
  cert.final_w = cz.reduction.family.sum;
  cert.initial_w_norm = cz.reduction.initial_w_norm;
  cert.heuristic_signing = cz.reduction.heuristic;
  cert.valid = std::all_of(cert.containment_slacks.begin(),
                           cert.containment_slacks.end(),
                           [](double s) { return s >= -kEpsGeom; });
  return cert;
}

}  // namespace capcover
