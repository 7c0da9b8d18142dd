#include "capcover/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "capcover/bang.hpp"
#include "capcover/separability.hpp"

namespace capcover {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void merge_into(OracleReport& acc, OracleReport&& part) {
  acc.checked += part.checked;
  acc.violations += part.violations;
  acc.premises += part.premises;
  acc.max_violation = std::max(acc.max_violation, part.max_violation);
  for (Vector& w : part.witnesses) {
    if (acc.witnesses.size() >= kMaxWitnesses) break;
    acc.witnesses.push_back(std::move(w));
  }
}

// Runs batch(b) for b in [0, batches) and merges the partial reports in
// batch order, so the serial and parallel paths agree exactly.
template <typename Batch>
OracleReport run_batches(std::uint64_t batches, Exec exec, Batch&& batch) {
  std::vector<OracleReport> parts(batches);
  const auto count = static_cast<std::ptrdiff_t>(batches);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t b = 0; b < count; ++b) parts[b] = batch(b);
  } else {
    for (std::ptrdiff_t b = 0; b < count; ++b) parts[b] = batch(b);
  }
  OracleReport out;
  out.max_violation = kNegInf;
  for (OracleReport& p : parts) merge_into(out, std::move(p));
  return out;
}

void record(OracleReport& r, double excess, const Vector& p,
            double threshold) {
  r.max_violation = std::max(r.max_violation, excess);
  if (excess > threshold) {
    ++r.violations;
    if (r.witnesses.size() < kMaxWitnesses) r.witnesses.push_back(p);
  }
}

Vector random_in_ball(int ambient, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vector dir = random_unit_vector(ambient, rng);
  // Strictly inside: radius in [0, 1).
  return std::pow(unif(rng), 1.0 / ambient) * (1.0 - 1e-12) * dir;
}

const Vector& region_axis(const Region& r) {
  return std::holds_alternative<Cap>(r) ? std::get<Cap>(r).center
                                        : std::get<Zone>(r).normal;
}

}  // namespace

Vector sample_region(const Region& r, std::mt19937_64& rng) {
  if (const Cap* c = std::get_if<Cap>(&r)) return random_point_in_cap(*c, rng);
  const Zone& z = std::get<Zone>(r);
  const double bound = std::sin(z.half_width);
  const int ambient = static_cast<int>(z.normal.size());
  for (;;) {
    Vector p = random_unit_vector(ambient, rng);
    if (std::abs(p.dot(z.normal)) <= bound) return p;
  }
}

double region_excess(const Region& r, const Vector& p) {
  if (const Cap* c = std::get_if<Cap>(&r)) {
    return spherical_distance(c->center, p) - c->radius;
  }
  const Zone& z = std::get<Zone>(r);
  require_same_dim(z.normal, p);
  return std::abs(p.dot(z.normal)) - std::sin(z.half_width);
}

OracleReport sampled_containment(const Region& outer, const Region& inner,
                                 std::uint64_t samples, std::uint64_t seed,
                                 Exec exec) {
  require_same_dim(region_axis(outer), region_axis(inner));
  constexpr std::uint64_t kBatch = 4096;
  const std::uint64_t batches = (samples + kBatch - 1) / kBatch;
  return run_batches(batches, exec, [&](std::uint64_t b) {
    OracleReport r;
    r.max_violation = kNegInf;
    std::mt19937_64 rng(split_seed(seed, b));
    const std::uint64_t n = std::min(kBatch, samples - b * kBatch);
    for (std::uint64_t i = 0; i < n; ++i) {
      const Vector p = sample_region(inner, rng);
      record(r, region_excess(outer, p), p, kEpsGeom);
      ++r.checked;
    }
    return r;
  });
}

Vector fibonacci_direction(std::uint64_t i, std::uint64_t count) {
  static const double kGoldenAngle = kPi * (3.0 - std::sqrt(5.0));
  const double z =
      1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = kGoldenAngle * static_cast<double>(i);
  Vector v(3);
  v << r * std::cos(phi), r * std::sin(phi), z;
  return v;
}

OracleReport grid_separability(const Instance& inst, std::uint64_t resolution,
                               Exec exec) {
  validate_instance(inst);
  if (inst.dim != 2) {
    throw ValidationError(fmt::format(
        "grid separability oracle needs dim = 2, got {}", inst.dim));
  }
  const std::size_t n = inst.caps.size();
  std::vector<Eigen::Vector3d> centers;
  std::vector<double> sines;
  for (const Cap& c : inst.caps) {
    centers.emplace_back(c.center[0], c.center[1], c.center[2]);
    sines.push_back(std::sin(c.radius));
  }
  constexpr std::uint64_t kBatch = 1 << 16;
  const std::uint64_t batches = (resolution + kBatch - 1) / kBatch;
  return run_batches(batches, exec, [&](std::uint64_t b) {
    OracleReport r;
    r.max_violation = kNegInf;
    const std::uint64_t end = std::min(resolution, (b + 1) * kBatch);
    for (std::uint64_t i = b * kBatch; i < end; ++i) {
      const Vector d = fibonacci_direction(i, resolution);
      const Eigen::Vector3d dir(d[0], d[1], d[2]);
      ++r.checked;
      double margin = std::numeric_limits<double>::infinity();
      bool pos = false;
      bool neg = false;
      for (std::size_t k = 0; k < n; ++k) {
        const double s = dir.dot(centers[k]);
        margin = std::min(margin, std::abs(s) - sines[k]);
        (s > 0.0 ? pos : neg) = true;
      }
      if (!(pos && neg)) continue;
      record(r, margin, d, kEpsFeas);
    }
    return r;
  });
}

double enclosing_radius(const Vector& center, std::span<const Cap> caps) {
  double r = kNegInf;
  for (const Cap& c : caps) {
    r = std::max(r, spherical_distance(center, c.center) + c.radius);
  }
  return r;
}

EnclosingCap minimal_enclosing_cap_estimate(std::span<const Cap> caps,
                                            int iters, int restarts,
                                            std::uint64_t seed) {
  if (caps.empty()) throw ValidationError("no caps to enclose");
  for (const Cap& c : caps) {
    validate_cap(c);
    require_same_dim(c.center, caps.front().center);
  }
  const int ambient = static_cast<int>(caps.front().center.size());
  EnclosingCap best{caps.front().center,
                    enclosing_radius(caps.front().center, caps)};

  auto descend = [&](Vector x) {
    double step0 = 0.25;
    for (int k = 1; k <= iters; ++k) {
      const double f = enclosing_radius(x, caps);
      if (f < best.radius) best = {x, f};
      // The farthest cap defines the subgradient; move toward its center.
      std::size_t far = 0;
      double fmax = kNegInf;
      for (std::size_t i = 0; i < caps.size(); ++i) {
        const double v = spherical_distance(x, caps[i].center) + caps[i].radius;
        if (v > fmax) {
          fmax = v;
          far = i;
        }
      }
      Vector t = caps[far].center - caps[far].center.dot(x) * x;
      const double tn = t.norm();
      if (tn < 1e-15) break;
      const double dist = spherical_distance(x, caps[far].center);
      const double step = std::min(dist, step0 / std::sqrt(double(k)));
      x = geodesic_point(x, t / tn, step).normalized();
    }
  };

  Vector mean = Vector::Zero(ambient);
  for (const Cap& c : caps) mean += c.center;
  if (mean.norm() > 1e-9) descend(mean.normalized());
  for (const Cap& c : caps) descend(c.center);
  std::mt19937_64 rng(seed);
  for (int r = 0; r < restarts; ++r) descend(random_unit_vector(ambient, rng));

  // Bisection polish: caps (c_i, r - a_i) share a point iff
  // max_n min_i(<n, c_i> - cos(r - a_i)) >= 0.
  double lo = 0.0;
  for (const Cap& c : caps) lo = std::max(lo, c.radius);
  double hi = best.radius;
  if (hi - lo < kHalfPi) {
    std::vector<Vector> axes;
    for (const Cap& c : caps) axes.push_back(c.center);
    std::vector<double> offsets(caps.size());
    SolverParams params;
    params.seed = seed;
    params.restarts = 2;
    params.max_iters = 500;
    for (int it = 0; it < 64 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      for (std::size_t i = 0; i < caps.size(); ++i) {
        offsets[i] = std::cos(mid - caps[i].radius);
      }
      const MaximinResult m = maximize_min_margin(axes, offsets, params);
      if (m.value >= 0.0) {
        hi = mid;
        const double f = enclosing_radius(m.argmax, caps);
        if (f < best.radius) best = {m.argmax, f};
      } else {
        lo = mid;
      }
    }
  }
  return best;
}

OracleReport lemma7_harness(const Lemma7Options& options) {
  return run_batches(options.families, options.exec, [&](std::uint64_t f) {
    OracleReport r;
    r.max_violation = kNegInf;
    std::mt19937_64 rng(split_seed(options.seed, f));
    std::uniform_int_distribution<int> pick_n(1, std::max(1, options.max_n));
    std::uniform_int_distribution<int> pick_ambient(2, 3);
    std::uniform_real_distribution<double> pick_alpha(0.02, 1.4);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);

    const int n = pick_n(rng);
    const int ambient = pick_ambient(rng);
    std::vector<PlankVector> vecs;
    for (int i = 0; i < n; ++i) {
      vecs.push_back(
          {std::sin(pick_alpha(rng)) * random_unit_vector(ambient, rng)});
    }
    for (std::uint64_t s = 0; s < options.samples_per_family; ++s) {
      SignPattern x;
      for (int i = 0; i < n; ++i) x.signs.push_back(coin(rng) ? 1 : -1);
      Vector t;
      if (coin(rng)) {
        t = random_in_ball(ambient, rng);
      } else {
        // Near -x the premise holds often; keep t inside B.
        const Vector xs = signed_sum(vecs, x);
        t = -(0.5 + 1.5 * unif(rng)) * xs +
            0.2 * random_in_ball(ambient, rng);
        const double tn = t.norm();
        if (tn >= 1.0) t *= (1.0 - 1e-9) * unif(rng) / tn;
      }
      ++r.checked;
      if (!is_max_in_translate(t, x, vecs)) continue;
      ++r.premises;
      const SignPattern cell = options.corrupt_membership ? x.negated() : x;
      const bool ok = in_bang_cell(t, cell, vecs) && outside_all_planks(t, vecs);
      record(r, ok ? 0.0 : 1.0, t, 0.5);
    }
    return r;
  });
}

OracleReport a_w_form_harness(std::uint64_t points, std::uint64_t seed) {
  OracleReport r;
  r.max_violation = kNegInf;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_n(1, 6);
  std::uniform_int_distribution<int> pick_ambient(2, 3);
  std::uniform_real_distribution<double> pick_alpha(0.01, 0.25);
  constexpr std::uint64_t kPerFamily = 1000;
  Vector w;
  for (std::uint64_t i = 0; i < points; ++i) {
    if (i % kPerFamily == 0) {
      const int ambient = pick_ambient(rng);
      const int n = pick_n(rng);
      std::vector<PlankVector> vecs;
      for (int k = 0; k < n; ++k) {
        vecs.push_back(
            {std::sin(pick_alpha(rng)) * random_unit_vector(ambient, rng)});
      }
      SigningConfig cfg;
      cfg.exec = Exec::serial;
      w = max_norm_signing(vecs, {}, cfg).sum;
    }
    const Vector t = random_in_ball(static_cast<int>(w.size()), rng);
    ++r.checked;
    try {
      in_A_w(t, w);
    } catch (const InvariantError&) {
      record(r, 1.0, t, 0.5);
    }
  }
  return r;
}

}  // namespace capcover
