#include "capcover/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace capcover {

void require_unit(const Vector& p, const char* what) {
  if (p.size() == 0) {
    throw ValidationError(fmt::format("{}: empty vector", what));
  }
  const double n = p.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kEpsUnit) {
    throw ValidationError(
        fmt::format("{}: expected a unit vector, norm is {:.17g}", what, n));
  }
}

void require_same_dim(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(
        fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
  }
}

void validate_cap(const Cap& c) {
  require_unit(c.center, "cap center");
  if (!(c.radius > 0.0) || !(c.radius < kHalfPi)) {
    throw ValidationError(fmt::format(
        "cap radius must lie in (0, pi/2), got {:.17g}", c.radius));
  }
}

void validate_zone(const Zone& z) {
  require_unit(z.normal, "zone normal");
  if (!(z.half_width > 0.0) || !(z.half_width < kHalfPi)) {
    throw ValidationError(fmt::format(
        "zone half-width must lie in (0, pi/2), got {:.17g}", z.half_width));
  }
}

void validate_instance(const Instance& inst) {
  if (inst.dim < 1) {
    throw ValidationError(fmt::format("dim must be >= 1, got {}", inst.dim));
  }
  if (inst.caps.empty()) {
    throw ValidationError("instance has no caps");
  }
  for (std::size_t i = 0; i < inst.caps.size(); ++i) {
    const Cap& c = inst.caps[i];
    if (c.center.size() != inst.dim + 1) {
      throw DimensionMismatch(fmt::format(
          "cap {}: center has {} coordinates, expected {}", i,
          c.center.size(), inst.dim + 1));
    }
    validate_cap(c);
  }
}

double spherical_distance(const Vector& p, const Vector& q) {
  require_same_dim(p, q);
  // Same value as acos(<p,q>) for unit vectors, but accurate near 0 and pi.
  return 2.0 * std::atan2((p - q).norm(), (p + q).norm());
}

bool cap_contains_point(const Cap& c, const Vector& p) {
  return spherical_distance(c.center, p) <= c.radius + kEpsGeom;
}

double cap_containment_slack(const Cap& outer, const Cap& inner) {
  return outer.radius - spherical_distance(outer.center, inner.center) -
         inner.radius;
}

bool cap_contains_cap(const Cap& outer, const Cap& inner) {
  return cap_containment_slack(outer, inner) >= -kEpsGeom;
}

bool zone_contains_point(const Zone& z, const Vector& p) {
  require_same_dim(z.normal, p);
  return std::abs(p.dot(z.normal)) <= std::sin(z.half_width) + kEpsGeom;
}

double zone_containment_slack(const Zone& outer, const Zone& inner) {
  const double theta = spherical_distance(outer.normal, inner.normal);
  const double phi = std::min(theta, kPi - theta);
  return outer.half_width - phi - inner.half_width;
}

bool zone_contains_zone(const Zone& outer, const Zone& inner) {
  return zone_containment_slack(outer, inner) >= -kEpsGeom;
}

Vector canonical_sign(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) return v;
    if (v[i] < 0.0) return -v;
  }
  return v;
}

Zone cap_to_zone(const Cap& c) {
  return Zone{canonical_sign(c.center), c.radius};
}

std::pair<Cap, Cap> zone_to_antipodal_caps(const Zone& z) {
  const double r = kHalfPi - z.half_width;
  return {Cap{z.normal, r, true}, Cap{-z.normal, r, true}};
}

PlankVector plank_vector(const Zone& z) {
  return PlankVector{std::sin(z.half_width) * z.normal};
}

Zone zone_of_plank_vector(const PlankVector& p) {
  const double n = p.w.norm();
  if (!(n > 0.0)) {
    throw ValidationError("plank vector is zero");
  }
  if (n >= 1.0) {
    throw ValidationError(fmt::format(
        "plank vector norm {:.17g} >= 1 (half-width would reach pi/2)", n));
  }
  return Zone{canonical_sign(p.w / n), std::asin(n)};
}

Vector random_unit_vector(int ambient, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(ambient);
  do {
    for (int i = 0; i < ambient; ++i) v[i] = gauss(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

Vector random_tangent(const Vector& axis, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(axis.size());
  for (;;) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    v -= v.dot(axis) * axis;
    const double n = v.norm();
    if (n > 1e-9) return v / n;
  }
}

Vector geodesic_point(const Vector& from, const Vector& tangent,
                      double angle) {
  return std::cos(angle) * from + std::sin(angle) * tangent;
}

Vector random_point_in_cap(const Cap& c, std::mt19937_64& rng) {
  const auto d = static_cast<int>(c.center.size()) - 1;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double theta = 0.0;
  if (d == 2) {
    // Archimedes: the height cos(theta) is uniform on [cos r, 1].
    const double lo = std::cos(c.radius);
    theta = std::acos(std::clamp(lo + (1.0 - lo) * unif(rng), -1.0, 1.0));
  } else {
    // Polar angle density is proportional to sin^{d-1}(theta); sin is
    // increasing on [0, pi/2] so the envelope is sin^{d-1}(radius).
    const double top = std::sin(std::min(c.radius, kHalfPi));
    for (;;) {
      theta = c.radius * unif(rng);
      if (d <= 1) break;
      if (unif(rng) <= std::pow(std::sin(theta) / top, d - 1)) break;
    }
  }
  const Vector t = random_tangent(c.center, rng);
  return geodesic_point(c.center, t, theta).normalized();
}

Vector random_point_in_cap(const Cap& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_point_in_cap(c, rng);
}

Rotation random_rotation(int dim, std::uint64_t seed) {
  const int n = dim + 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (q.determinant() < 0.0) q.col(0) = -q.col(0);
  return Rotation{q};
}

Rotation identity_rotation(int dim) {
  return Rotation{Matrix::Identity(dim + 1, dim + 1)};
}

Vector apply_rotation(const Rotation& r, const Vector& v) {
  if (r.matrix.cols() != v.size()) {
    throw DimensionMismatch(fmt::format("rotation of size {} applied to {}",
                                        r.matrix.cols(), v.size()));
  }
  return r.matrix * v;
}

Instance apply_rotation(const Rotation& r, const Instance& inst) {
  Instance out = inst;
  for (Cap& c : out.caps) c.center = apply_rotation(r, c.center);
  return out;
}

double sum_of_radii(const Instance& inst) {
  double s = 0.0;
  for (const Cap& c : inst.caps) s += c.radius;
  return s;
}

std::string to_string(const Vector& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt::format("{:.6g}", v[i]);
  }
  return out + ")";
}

}  // namespace capcover
