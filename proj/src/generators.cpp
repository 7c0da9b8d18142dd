#include "capcover/generators.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "capcover/parallel.hpp"

namespace capcover {

std::vector<double> random_radii(int n, double total, std::uint64_t seed) {
  if (n < 1) throw ValidationError("need at least one radius");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  std::vector<double> r(n);
  for (double& x : r) x = unif(rng);
  const double s = std::accumulate(r.begin(), r.end(), 0.0);
  for (double& x : r) x *= total / s;
  return r;
}

namespace {

std::vector<double> expand_radii(int n, std::span<const double> radii) {
  if (n < 1) throw ValidationError("chain needs n >= 1");
  if (radii.size() == 1) return std::vector<double>(n, radii.front());
  if (static_cast<int>(radii.size()) != n) {
    throw ValidationError(fmt::format("expected {} radii, got {}", n,
                                      radii.size()));
  }
  return {radii.begin(), radii.end()};
}

Instance chain_along(int dim, const std::vector<double>& radii,
                     double overlap_factor, const Vector& start,
                     const Vector& tangent) {
  const double total = std::accumulate(radii.begin(), radii.end(), 0.0);
  if (!(total < kHalfPi - 1e-3)) {
    throw HypothesisError(fmt::format(
        "chain radii sum to {:.17g}; need less than pi/2 - 1e-3", total));
  }
  if (!(overlap_factor >= 0.0 && overlap_factor <= 1.0)) {
    throw ValidationError("overlap factor must lie in [0, 1]");
  }
  Instance inst;
  inst.dim = dim;
  double arc = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (i > 0) arc += (radii[i - 1] + radii[i]) * (1.0 - overlap_factor);
    inst.caps.push_back(
        Cap{geodesic_point(start, tangent, arc).normalized(), radii[i]});
  }
  validate_instance(inst);
  return inst;
}

}  // namespace

Instance gen_chain(int dim, int n, std::span<const double> radii,
                   double overlap_factor, std::uint64_t seed) {
  if (dim < 1) throw ValidationError("dim must be >= 1");
  const std::vector<double> r = expand_radii(n, radii);
  std::mt19937_64 rng(seed);
  const Vector start = random_unit_vector(dim + 1, rng);
  const Vector tangent = random_tangent(start, rng);
  return chain_along(dim, r, overlap_factor, start, tangent);
}

Instance gen_chain_on_equator(int dim, std::span<const double> radii,
                              double overlap_factor) {
  if (dim < 1) throw ValidationError("dim must be >= 1");
  const std::vector<double> r(radii.begin(), radii.end());
  if (r.empty()) throw ValidationError("chain needs n >= 1");
  return chain_along(dim, r, overlap_factor, Vector::Unit(dim + 1, 0),
                     Vector::Unit(dim + 1, 1));
}

Instance gen_separable(int dim, std::uint64_t seed) {
  if (dim < 1) throw ValidationError("dim must be >= 1");
  std::mt19937_64 rng(seed);
  const Vector c = random_unit_vector(dim + 1, rng);
  const Vector t = random_tangent(c, rng);
  const Vector far = geodesic_point(-c, t, 0.05).normalized();
  Instance inst;
  inst.dim = dim;
  inst.caps = {Cap{c, 0.1}, Cap{far, 0.15}};
  return inst;
}

Instance gen_random_tree(int dim, int n, std::uint64_t seed, double total) {
  if (dim < 1) throw ValidationError("dim must be >= 1");
  if (!(total > 0.0 && total < kHalfPi)) {
    throw HypothesisError("tree radii must sum to less than pi/2");
  }
  const std::vector<double> radii = random_radii(n, total, seed);
  std::mt19937_64 rng(split_seed(seed, 1));
  std::uniform_real_distribution<double> reach(0.2, 1.0);
  Instance inst;
  inst.dim = dim;
  inst.caps.push_back(Cap{random_unit_vector(dim + 1, rng), radii[0]});
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    const Cap& parent = inst.caps[pick(rng)];
    const Vector t = random_tangent(parent.center, rng);
    const double d = (parent.radius + radii[i]) * reach(rng);
    inst.caps.push_back(
        Cap{geodesic_point(parent.center, t, d).normalized(), radii[i]});
  }
  validate_instance(inst);
  return inst;
}

}  // namespace capcover
