#include "capcover/separability.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace capcover {

bool SignPattern::is_constant() const {
  return std::all_of(signs.begin(), signs.end(),
                     [&](int s) { return s == signs.front(); });
}

SignPattern SignPattern::negated() const {
  SignPattern out = *this;
  for (int& s : out.signs) s = -s;
  return out;
}

std::string SignPattern::to_string() const {
  std::string out;
  out.reserve(signs.size());
  for (int s : signs) out.push_back(s > 0 ? '+' : '-');
  return out;
}

std::string to_string(SeparabilityStatus s) {
  switch (s) {
    case SeparabilityStatus::nonseparable: return "nonseparable";
    case SeparabilityStatus::separable: return "separable";
    case SeparabilityStatus::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

std::string to_string(SeparabilityMethod m) {
  switch (m) {
    case SeparabilityMethod::trivial: return "trivial";
    case SeparabilityMethod::overlap_graph: return "overlap_graph";
    case SeparabilityMethod::pattern_search: return "pattern_search";
    case SeparabilityMethod::skipped: return "skipped";
  }
  return "pattern_search";
}

SeparabilityStatus status_from_string(const std::string& s) {
  if (s == "nonseparable") return SeparabilityStatus::nonseparable;
  if (s == "separable") return SeparabilityStatus::separable;
  if (s == "indeterminate") return SeparabilityStatus::indeterminate;
  throw ValidationError("unknown separability status '" + s + "'");
}

SeparabilityMethod method_from_string(const std::string& s) {
  if (s == "trivial") return SeparabilityMethod::trivial;
  if (s == "overlap_graph") return SeparabilityMethod::overlap_graph;
  if (s == "pattern_search") return SeparabilityMethod::pattern_search;
  if (s == "skipped") return SeparabilityMethod::skipped;
  throw ValidationError("unknown separability method '" + s + "'");
}

double min_margin(std::span<const Vector> axes, std::span<const double> offsets,
                  const Vector& n) {
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < axes.size(); ++i) {
    v = std::min(v, axes[i].dot(n) - offsets[i]);
  }
  return v;
}

namespace {

std::size_t subset_count(std::size_t m, std::size_t kmax) {
  std::size_t total = 0;
  std::size_t binom = 1;
  for (std::size_t k = 1; k <= kmax && k <= m; ++k) {
    binom = binom * (m - k + 1) / k;
    total += binom;
    if (total > (std::size_t{1} << 40)) break;
  }
  return total;
}

// Visits every k-subset of {0..m-1} in lexicographic order.
template <typename Fn>
void for_each_subset(int m, int k, Fn&& fn) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  for (;;) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Points of the sphere where every constraint of the subset is active with
// a common value and the stationarity condition of the maximin problem can
// hold. The global maximizer is among the candidates of some subset of at
// most (ambient dimension) constraints.
template <typename Emit>
void vertex_candidates(std::span<const Vector> axes,
                       std::span<const double> offsets,
                       const std::vector<int>& subset, Emit&& emit) {
  const auto dim = axes.front().size();
  const auto k = static_cast<Eigen::Index>(subset.size());
  Matrix a(dim, k);
  Vector s(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    a.col(j) = axes[subset[j]];
    s[j] = offsets[subset[j]];
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
  const Vector& sv = svd.singularValues();
  const double tol = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index j = 0; j < sv.size(); ++j) rank += sv[j] > tol ? 1 : 0;

  if (rank == k) {
    // n = A beta with A^T n = s + t 1 and |n| = 1: quadratic in t.
    const Matrix gram = a.transpose() * a;
    Eigen::LDLT<Matrix> ldlt(gram);
    const Vector p = ldlt.solve(s);
    const Vector q = ldlt.solve(Vector::Ones(k));
    const double qa = q.sum();
    const double qb = 2.0 * p.sum();
    const double qc = s.dot(p) - 1.0;
    double disc = qb * qb - 4.0 * qa * qc;
    if (!(qa > 0.0) || disc < -1e-12) return;
    disc = std::sqrt(std::max(0.0, disc));
    for (double t : {(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)}) {
      const Vector n = a * (p + t * q);
      const double nn = n.norm();
      if (nn > 1e-12) emit(Vector(n / nn));
    }
    return;
  }
  if (rank + 1 != k) return;

  // Minimal dependent subset: the active values fix the component of n in
  // span(A); the orthogonal component is free, so try a few directions.
  const Matrix basis = svd.matrixU().leftCols(rank);
  Matrix m(k, rank + 1);
  m.leftCols(rank) = a.transpose() * basis;
  m.col(rank).setConstant(-1.0);
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) return;
  const Vector sol = lu.solve(s);
  const Vector y = sol.head(rank);
  double rest = 1.0 - y.squaredNorm();
  if (rest < -1e-12) return;
  rest = std::max(0.0, rest);
  const Vector inside = basis * y;
  if (rank == dim) {
    if (rest <= 1e-9) emit(Vector(inside.normalized()));
    return;
  }
  const double len = std::sqrt(rest);
  auto emit_dir = [&](const Vector& u) {
    const Vector n = inside + len * u;
    const double nn = n.norm();
    if (nn > 1e-12) emit(Vector(n / nn));
  };
  for (Eigen::Index j = rank; j < dim; ++j) {
    const Vector u = svd.matrixU().col(j);
    emit_dir(u);
    emit_dir(-u);
  }
  for (std::size_t l = 0; l < axes.size(); ++l) {
    Vector u = axes[l] - basis * (basis.transpose() * axes[l]);
    const double un = u.norm();
    if (un < 1e-12) continue;
    u /= un;
    emit_dir(u);
    emit_dir(-u);
  }
}

// Projected supergradient ascent on the sphere from `start`.
void ascend(std::span<const Vector> axes, std::span<const double> offsets,
            const Vector& start, const SolverParams& params,
            MaximinResult& best) {
  Vector n = start.normalized();
  double local_best = -std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int k = 1; k <= params.max_iters; ++k) {
    std::size_t arg = 0;
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const double vi = axes[i].dot(n) - offsets[i];
      if (vi < v) {
        v = vi;
        arg = i;
      }
    }
    if (v > best.value) {
      best.value = v;
      best.argmax = n;
    }
    if (v > local_best + 1e-15) {
      local_best = v;
      stale = 0;
    } else if (++stale > 300) {
      break;
    }
    Vector g = axes[arg] - axes[arg].dot(n) * n;
    const double gn = g.norm();
    if (gn < 1e-15) break;
    n += (params.step_scale / std::sqrt(static_cast<double>(k))) * (g / gn);
    n.normalize();
  }
}

}  // namespace

MaximinResult maximize_min_margin(std::span<const Vector> axes,
                                  std::span<const double> offsets,
                                  const SolverParams& params) {
  if (axes.empty() || axes.size() != offsets.size()) {
    throw ValidationError("maximin: need matching nonempty axes and offsets");
  }
  const auto m = axes.size();
  const auto dim = static_cast<std::size_t>(axes.front().size());
  MaximinResult best;
  best.value = -std::numeric_limits<double>::infinity();
  best.argmax = axes.front();

  auto consider = [&](const Vector& n) {
    const double v = min_margin(axes, offsets, n);
    if (v > best.value) {
      best.value = v;
      best.argmax = n;
    }
  };

  const std::size_t kmax = std::min(m, dim);
  if (subset_count(m, kmax) <= params.vertex_budget) {
    for (std::size_t k = 1; k <= kmax; ++k) {
      for_each_subset(static_cast<int>(m), static_cast<int>(k),
                      [&](const std::vector<int>& subset) {
                        vertex_candidates(axes, offsets, subset, consider);
                      });
    }
    best.exhaustive = true;
    const Vector start = best.argmax;
    ascend(axes, offsets, start, params, best);
    return best;
  }

  for (const Vector& a : axes) ascend(axes, offsets, a, params, best);
  std::mt19937_64 rng(params.seed);
  for (int r = 0; r < params.restarts; ++r) {
    ascend(axes, offsets, random_unit_vector(static_cast<int>(dim), rng),
           params, best);
  }
  return best;
}

Cap dual_cap(const Cap& c) {
  return Cap{c.center, kHalfPi - c.radius, !c.open};
}

double pattern_margin(std::span<const Cap> caps, const SignPattern& pattern,
                      const Vector& n) {
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < caps.size(); ++i) {
    v = std::min(v, pattern.signs[i] * caps[i].center.dot(n) -
                        std::sin(caps[i].radius));
  }
  return v;
}

FeasibilityResult pattern_feasible(std::span<const Cap> caps,
                                   const SignPattern& pattern,
                                   const SolverParams& params) {
  if (caps.empty() || pattern.signs.size() != caps.size()) {
    throw ValidationError(fmt::format(
        "pattern of length {} for {} caps", pattern.signs.size(), caps.size()));
  }
  std::vector<Vector> axes;
  std::vector<double> offsets;
  axes.reserve(caps.size());
  offsets.reserve(caps.size());
  for (std::size_t i = 0; i < caps.size(); ++i) {
    require_same_dim(caps[i].center, caps.front().center);
    axes.push_back(pattern.signs[i] * caps[i].center);
    offsets.push_back(std::sin(caps[i].radius));
  }
  const MaximinResult r = maximize_min_margin(axes, offsets, params);
  FeasibilityResult out;
  out.margin = r.value;
  out.exhaustive = r.exhaustive;
  if (r.value > kEpsFeas) out.witness = r.argmax;
  return out;
}

bool overlap_graph_connected(std::span<const Cap> caps) {
  const std::size_t n = caps.size();
  if (n <= 1) return true;
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < n; ++j) {
      if (seen[j]) continue;
      const double d = spherical_distance(caps[i].center, caps[j].center);
      if (d <= caps[i].radius + caps[j].radius + kEpsGeom) {
        seen[j] = true;
        ++reached;
        stack.push_back(j);
      }
    }
  }
  return reached == n;
}

namespace detail {

SplitMaskCursor::SplitMaskCursor(int n)
    : width_(n >= 2 ? static_cast<std::uint32_t>(n - 1) : 0) {}

bool SplitMaskCursor::next(std::uint32_t& mask) {
  if (width_ == 0) return false;
  const std::uint32_t limit = 1u << width_;
  if (started_) {
    // Gosper's hack: next mask with the same popcount.
    const std::uint32_t c = mask_ & (~mask_ + 1u);
    const std::uint32_t r = mask_ + c;
    mask_ = (((r ^ mask_) >> 2) / c) | r;
  }
  if (!started_ || mask_ >= limit) {
    if (popcount_ == width_) return false;
    ++popcount_;
    mask_ = (1u << popcount_) - 1u;
    started_ = true;
  }
  mask = mask_;
  return true;
}

SignPattern pattern_of_mask(int n, std::uint32_t mask) {
  SignPattern p;
  p.signs.assign(n, 1);
  for (int i = 1; i < n; ++i) {
    if (mask & (1u << (i - 1))) p.signs[i] = -1;
  }
  return p;
}

}  // namespace detail

namespace {

// Exact maxima of the two-constraint problems; every pattern margin is
// bounded above by the smallest of its pair maxima.
struct PairBounds {
  int n = 0;
  std::vector<double> same;      // signs agree
  std::vector<double> opposite;  // signs differ

  double bound(const SignPattern& p) const {
    double b = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const auto idx = static_cast<std::size_t>(i * n + j);
        b = std::min(b, p.signs[i] == p.signs[j] ? same[idx] : opposite[idx]);
      }
    }
    return b;
  }
};

PairBounds pair_bounds(std::span<const Cap> caps, const SolverParams& params) {
  PairBounds pb;
  pb.n = static_cast<int>(caps.size());
  pb.same.assign(caps.size() * caps.size(), 0.0);
  pb.opposite.assign(caps.size() * caps.size(), 0.0);
  SolverParams p = params;
  p.restarts = 0;
  for (int i = 0; i < pb.n; ++i) {
    for (int j = i + 1; j < pb.n; ++j) {
      const std::array<double, 2> off{std::sin(caps[i].radius),
                                      std::sin(caps[j].radius)};
      const std::array<Vector, 2> same{caps[i].center, caps[j].center};
      const std::array<Vector, 2> opp{caps[i].center, -caps[j].center};
      const auto idx = static_cast<std::size_t>(i * pb.n + j);
      pb.same[idx] = maximize_min_margin(same, off, p).value;
      pb.opposite[idx] = maximize_min_margin(opp, off, p).value;
    }
  }
  return pb;
}

struct PatternProbe {
  double margin = 0.0;
  std::optional<Vector> witness;
};

PatternProbe probe(std::span<const Cap> caps, const PairBounds& bounds,
                   const SignPattern& pattern, std::uint32_t mask,
                   const SolverParams& params) {
  const double ub = bounds.bound(pattern);
  if (ub < -kEpsFeas) return {ub, std::nullopt};
  SolverParams p = params;
  p.seed = split_seed(params.seed, mask);
  const FeasibilityResult r = pattern_feasible(caps, pattern, p);
  return {r.margin, r.witness};
}

}  // namespace

SeparabilityVerdict check_nonseparable(const Instance& inst,
                                       const SolverParams& params) {
  validate_instance(inst);
  const int n = static_cast<int>(inst.caps.size());
  if (n > kMaxSeparabilityCaps) {
    throw BudgetError(fmt::format(
        "separability check supports at most {} caps, got {}",
        kMaxSeparabilityCaps, n));
  }
  SeparabilityVerdict v;
  v.best_margin = std::numeric_limits<double>::quiet_NaN();
  if (n == 1) {
    v.status = SeparabilityStatus::nonseparable;
    v.method = SeparabilityMethod::trivial;
    return v;
  }
  if (params.overlap_shortcut && overlap_graph_connected(inst.caps)) {
    v.status = SeparabilityStatus::nonseparable;
    v.method = SeparabilityMethod::overlap_graph;
    return v;
  }

  v.method = SeparabilityMethod::pattern_search;
  const PairBounds bounds = pair_bounds(inst.caps, params);
  const std::span<const Cap> caps(inst.caps);

  // Probes run in ordered blocks so that the first feasible pattern in
  // enumeration order wins regardless of scheduling.
  constexpr std::size_t kBlock = 512;
  std::vector<std::uint32_t> masks;
  std::vector<PatternProbe> results;
  double best = -std::numeric_limits<double>::infinity();
  bool gray = false;
  detail::SplitMaskCursor cursor(n);
  for (;;) {
    masks.clear();
    std::uint32_t mask = 0;
    while (masks.size() < kBlock && cursor.next(mask)) masks.push_back(mask);
    if (masks.empty()) break;
    results.assign(masks.size(), PatternProbe{});
    const auto count = static_cast<std::ptrdiff_t>(masks.size());
    if (params.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t b = 0; b < count; ++b) {
        results[b] = probe(caps, bounds, detail::pattern_of_mask(n, masks[b]),
                           masks[b], params);
      }
    } else {
      for (std::ptrdiff_t b = 0; b < count; ++b) {
        results[b] = probe(caps, bounds, detail::pattern_of_mask(n, masks[b]),
                           masks[b], params);
      }
    }
    for (std::size_t b = 0; b < masks.size(); ++b) {
      ++v.patterns_checked;
      const PatternProbe& r = results[b];
      if (r.margin > best) best = r.margin;
      if (r.margin > kEpsFeas) {
        v.status = SeparabilityStatus::separable;
        v.witness_normal = r.witness;
        v.witness_pattern = detail::pattern_of_mask(n, masks[b]);
        v.best_margin = r.margin;
        return v;
      }
      if (r.margin >= -kEpsFeas) gray = true;
    }
  }
  v.best_margin = best;
  v.status = gray ? SeparabilityStatus::indeterminate
                  : SeparabilityStatus::nonseparable;
  return v;
}

}  // namespace capcover
