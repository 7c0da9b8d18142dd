#include "capcover/bang.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace capcover {

namespace {

// Signs e_1..e_{n-1} packed in bits 0..n-2 (set bit means -1); e_0 = +1.
using Mask = std::uint32_t;

// Lexicographic order on sign vectors with -1 before +1.
bool lex_less(Mask a, Mask b) {
  const Mask diff = a ^ b;
  if (diff == 0) return false;
  const Mask low = diff & (~diff + 1u);
  return (a & low) != 0;
}

struct Candidate {
  double norm2 = -1.0;
  Mask mask = 0;
};

// Norms within this relative distance are treated as ties so that the
// lexicographic rule, not roundoff, picks among symmetric maximizers.
constexpr double kTieRel = 1e-12;

bool better(const Candidate& a, const Candidate& b) {
  const double tol = kTieRel * std::max(1.0, std::max(a.norm2, b.norm2));
  if (a.norm2 > b.norm2 + tol) return true;
  if (b.norm2 > a.norm2 + tol) return false;
  return lex_less(a.mask, b.mask);
}

Vector sum_for_mask(std::span<const PlankVector> v, Mask mask) {
  Vector s = v[0].w;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (mask & (Mask{1} << (i - 1))) {
      s -= v[i].w;
    } else {
      s += v[i].w;
    }
  }
  return s;
}

// Scans Gray codes of the counters lo..hi-1.
Candidate scan_range(std::span<const PlankVector> v, std::uint64_t lo,
                     std::uint64_t hi) {
  Candidate best;
  Mask gray = static_cast<Mask>(lo ^ (lo >> 1));
  Vector s = sum_for_mask(v, gray);
  best = {s.squaredNorm(), gray};
  for (std::uint64_t m = lo + 1; m < hi; ++m) {
    const int bit = std::countr_zero(m);
    gray ^= Mask{1} << bit;
    const Vector& w = v[static_cast<std::size_t>(bit) + 1].w;
    if (gray & (Mask{1} << bit)) {
      s.noalias() -= 2.0 * w;
    } else {
      s.noalias() += 2.0 * w;
    }
    const Candidate c{s.squaredNorm(), gray};
    if (better(c, best)) best = c;
  }
  return best;
}

Candidate exact_signing(std::span<const PlankVector> v, Exec exec) {
  const std::uint64_t total = std::uint64_t{1} << (v.size() - 1);
  if (exec == Exec::serial || total < 4096) {
    return scan_range(v, 0, total);
  }
  // Chunk boundaries do not depend on the thread count; the reduction runs
  // in chunk order.
  constexpr std::uint64_t kChunks = 64;
  std::vector<Candidate> partial(kChunks);
  const auto chunks = static_cast<std::ptrdiff_t>(kChunks);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::uint64_t lo = total * static_cast<std::uint64_t>(c) / kChunks;
    const std::uint64_t hi =
        total * static_cast<std::uint64_t>(c + 1) / kChunks;
    if (lo < hi) partial[c] = scan_range(v, lo, hi);
  }
  Candidate best = partial[0];
  for (const Candidate& c : partial) {
    if (c.norm2 >= 0.0 && better(c, best)) best = c;
  }
  return best;
}

SignPattern pattern_from_mask(std::size_t n, Mask mask) {
  SignPattern p;
  p.signs.assign(n, 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (mask & (Mask{1} << (i - 1))) p.signs[i] = -1;
  }
  return p;
}

Mask mask_from_pattern(const SignPattern& p) {
  Mask m = 0;
  for (std::size_t i = 1; i < p.signs.size(); ++i) {
    if (p.signs[i] < 0) m |= Mask{1} << (i - 1);
  }
  return m;
}

std::vector<double> resolve_half_widths(std::span<const PlankVector> vectors,
                                        std::span<const double> half_widths) {
  if (!half_widths.empty()) {
    if (half_widths.size() != vectors.size()) {
      throw ValidationError("half_widths and vectors differ in length");
    }
    return {half_widths.begin(), half_widths.end()};
  }
  std::vector<double> out;
  out.reserve(vectors.size());
  for (const PlankVector& p : vectors) {
    out.push_back(std::asin(std::min(1.0, p.w.norm())));
  }
  return out;
}

OrientedFamily make_family(std::span<const PlankVector> vectors,
                           std::vector<double> half_widths,
                           const SignPattern& pattern, bool heuristic) {
  OrientedFamily fam;
  fam.half_widths = std::move(half_widths);
  fam.signs_applied = pattern;
  fam.heuristic = heuristic;
  fam.sum = Vector::Zero(vectors.front().w.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    fam.vectors.push_back(pattern.signs[i] * vectors[i].w);
    fam.sum += fam.vectors.back();
  }
  return fam;
}

void check_family(std::span<const PlankVector> vectors) {
  if (vectors.empty()) throw ValidationError("empty plank-vector family");
  for (const PlankVector& p : vectors) {
    require_same_dim(p.w, vectors.front().w);
  }
}

// 1-flip local search from `signs`; returns the final squared norm.
double improve(std::span<const PlankVector> v, std::vector<int>& signs,
               Vector& s) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double gain = v[i].w.squaredNorm() - signs[i] * s.dot(v[i].w);
      if (gain > 1e-14) {
        s -= 2.0 * signs[i] * v[i].w;
        signs[i] = -signs[i];
        changed = true;
      }
    }
  }
  return s.squaredNorm();
}

}  // namespace

OrientedFamily local_search_signing(std::span<const PlankVector> vectors,
                                    std::span<const double> half_widths,
                                    int restarts, std::uint64_t seed) {
  check_family(vectors);
  if (vectors.size() > 32) {
    // Masks are 32-bit; the tie-break below needs them.
    throw BudgetError("local search signing supports at most 33 vectors");
  }
  const std::size_t n = vectors.size();
  std::vector<double> hw = resolve_half_widths(vectors, half_widths);

  Candidate best;
  auto consider = [&](std::vector<int> signs) {
    Vector s = Vector::Zero(vectors.front().w.size());
    for (std::size_t i = 0; i < n; ++i) s += signs[i] * vectors[i].w;
    improve(vectors, signs, s);
    if (signs[0] < 0) {
      for (int& e : signs) e = -e;
    }
    SignPattern p{signs};
    const Candidate c{signed_sum(vectors, p).squaredNorm(),
                      mask_from_pattern(p)};
    if (best.norm2 < 0.0 || better(c, best)) best = c;
  };

  // Greedy start: longest vectors first, each aligned with the running sum.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return vectors[a].w.squaredNorm() > vectors[b].w.squaredNorm();
  });
  std::vector<int> greedy(n, 1);
  Vector s = Vector::Zero(vectors.front().w.size());
  for (std::size_t i : order) {
    greedy[i] = s.dot(vectors[i].w) < 0.0 ? -1 : 1;
    s += greedy[i] * vectors[i].w;
  }
  consider(greedy);

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int r = 0; r < restarts; ++r) {
    std::vector<int> signs(n);
    for (int& e : signs) e = coin(rng) ? 1 : -1;
    consider(std::move(signs));
  }
  return make_family(vectors, std::move(hw), pattern_from_mask(n, best.mask),
                     true);
}

OrientedFamily max_norm_signing(std::span<const PlankVector> vectors,
                                std::span<const double> half_widths,
                                const SigningConfig& config) {
  check_family(vectors);
  const int n = static_cast<int>(vectors.size());
  if (n > std::min(config.exact_threshold, kMaxExactSigning)) {
    return local_search_signing(vectors, half_widths, config.restarts,
                                config.seed);
  }
  std::vector<double> hw = resolve_half_widths(vectors, half_widths);
  const Candidate best = exact_signing(vectors, config.exec);
  return make_family(vectors, std::move(hw),
                     pattern_from_mask(vectors.size(), best.mask), false);
}

std::optional<SubsetViolation> find_minimal_violating_subset(
    const OrientedFamily& fam) {
  const int n = static_cast<int>(fam.vectors.size());
  const double total_alpha =
      std::accumulate(fam.half_widths.begin(), fam.half_widths.end(), 0.0);
  if (fam.sum.norm() <= std::sin(total_alpha) + kEpsGeom) return std::nullopt;
  if (n > kMaxExactSigning) {
    throw BudgetError(fmt::format(
        "minimal violating subset search supports at most {} zones, got {}",
        kMaxExactSigning, n));
  }
  // Singletons never violate since |w_i| = sin a_i.
  std::vector<int> idx;
  for (int k = 2; k <= n; ++k) {
    idx.resize(k);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      Vector s = Vector::Zero(fam.sum.size());
      double alpha = 0.0;
      for (int i : idx) {
        s += fam.vectors[i];
        alpha += fam.half_widths[i];
      }
      const double lhs = s.norm();
      const double rhs = std::sin(alpha);
      if (lhs > rhs + kEpsGeom) return SubsetViolation{idx, lhs, rhs};
      int i = k - 1;
      while (i >= 0 && idx[i] == n - k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  throw InvariantError("whole family violates but no subset was found");
}

Vector signed_sum(std::span<const PlankVector> vectors,
                  const SignPattern& pattern) {
  if (pattern.signs.size() != vectors.size()) {
    throw ValidationError("sign pattern length does not match the family");
  }
  Vector s = Vector::Zero(vectors.front().w.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    s += pattern.signs[i] * vectors[i].w;
  }
  return s;
}

void bang_set_enumerate(
    std::span<const PlankVector> vectors,
    const std::function<void(const SignPattern&, const Vector&)>& visit) {
  check_family(vectors);
  const std::size_t n = vectors.size();
  if (n > static_cast<std::size_t>(kMaxExactSigning)) {
    throw BudgetError(fmt::format(
        "Bang set enumeration supports at most {} vectors, got {}",
        kMaxExactSigning, n));
  }
  SignPattern p;
  p.signs.assign(n, 1);
  Vector s = signed_sum(vectors, p);
  visit(p, s);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t m = 1; m < total; ++m) {
    const int bit = std::countr_zero(m);
    p.signs[bit] = -p.signs[bit];
    s += 2.0 * p.signs[bit] * vectors[bit].w;
    visit(p, s);
  }
}

bool is_max_in_translate(const Vector& t, const SignPattern& x_pattern,
                         std::span<const PlankVector> vectors) {
  const Vector x = signed_sum(vectors, x_pattern);
  const double tn = t.norm();
  bool ok = true;
  bang_set_enumerate(vectors, [&](const SignPattern&, const Vector& y) {
    if (ok && (t + x - y).norm() > tn + kEpsGeom) ok = false;
  });
  return ok;
}

bool in_bang_cell(const Vector& t, const SignPattern& x_pattern,
                  std::span<const PlankVector> vectors) {
  if (x_pattern.signs.size() != vectors.size()) {
    throw ValidationError("sign pattern length does not match the family");
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const Vector& w = vectors[i].w;
    require_same_dim(t, w);
    if (-x_pattern.signs[i] * t.dot(w) < w.squaredNorm() - kEpsGeom) {
      return false;
    }
  }
  return true;
}

bool outside_all_planks(const Vector& t, std::span<const PlankVector> vectors) {
  return std::all_of(vectors.begin(), vectors.end(), [&](const PlankVector& p) {
    return std::abs(t.dot(p.w)) >= p.w.squaredNorm() - kEpsGeom;
  });
}

bool in_A_w(const Vector& t, const Vector& w) {
  require_same_dim(t, w);
  if (!(t.norm() < 1.0)) {
    throw ValidationError("in_A_w: t must lie in the open unit ball");
  }
  const double halfspace = -t.dot(w) - w.squaredNorm();
  const double by_norms = 0.25 * (t.squaredNorm() - (t + 2.0 * w).squaredNorm());
  if (std::abs(halfspace - by_norms) > kEpsGeom) {
    throw InvariantError(fmt::format(
        "A_w membership forms disagree: {:.17g} vs {:.17g}", halfspace,
        by_norms));
  }
  return halfspace >= -kEpsGeom;
}

}  // namespace capcover
