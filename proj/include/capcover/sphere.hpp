// Spherical primitives: points, caps, zones, plank vectors and the duality
// maps between them. Everything here is a pure function of its arguments.

#pragma once

#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace capcover {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

// Unit-norm checks.
inline constexpr double kEpsUnit = 1e-12;
// Geometric predicates (containment, violations, Bang cells).
inline constexpr double kEpsGeom = 1e-9;
// Feasibility margins of the separability solver.
inline constexpr double kEpsFeas = 1e-7;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Invalid input value (non-unit center, degenerate radius, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A hypothesis of the covering theorem is not satisfied by the input.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

// Combinatorial enumeration beyond the supported size.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// An internal invariant failed; indicates a bug upstream of the check.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// A closed (or, when `open` is set, open) spherical cap: points within
// angular distance `radius` of `center`.
struct Cap {
  Vector center;
  double radius = 0.0;
  bool open = false;
};

// A closed zone: points within angular distance `half_width` of the great
// sphere orthogonal to `normal`. `normal` and `-normal` denote the same set.
struct Zone {
  Vector normal;
  double half_width = 0.0;
};

// w(P) of the open centrally symmetric plank P = {x : |<x,w>| < <w,w>}.
struct PlankVector {
  Vector w;
};

struct Instance {
  int dim = 0;  // sphere dimension d; points live in R^{d+1}
  std::vector<Cap> caps;
};

struct Rotation {
  Matrix matrix;
};

// Throws ValidationError unless |p| = 1 within kEpsUnit.
void require_unit(const Vector& p, const char* what);
void require_same_dim(const Vector& a, const Vector& b);

// Throws ValidationError for radii outside (0, pi/2) or non-unit centers.
void validate_cap(const Cap& c);
void validate_zone(const Zone& z);
// Checks dim >= 1, nonempty, center lengths and every cap. Does not check
// the sum of radii (the cover pipeline does that).
void validate_instance(const Instance& inst);

double spherical_distance(const Vector& p, const Vector& q);

bool cap_contains_point(const Cap& c, const Vector& p);
bool cap_contains_cap(const Cap& outer, const Cap& inner);
// outer.radius - dist(outer.center, inner.center) - inner.radius
double cap_containment_slack(const Cap& outer, const Cap& inner);

bool zone_contains_point(const Zone& z, const Vector& p);
bool zone_contains_zone(const Zone& outer, const Zone& inner);
// outer.half_width - phi - inner.half_width, phi the angle between the
// normals folded into [0, pi/2].
double zone_containment_slack(const Zone& outer, const Zone& inner);

// Flips v so that its first nonzero coordinate is positive.
Vector canonical_sign(const Vector& v);

Zone cap_to_zone(const Cap& c);
// The two open caps making up S minus z, centered at +normal and -normal.
std::pair<Cap, Cap> zone_to_antipodal_caps(const Zone& z);

PlankVector plank_vector(const Zone& z);
// Throws ValidationError if |w| >= 1 or w = 0.
Zone zone_of_plank_vector(const PlankVector& p);

// Uniform random direction in R^dim_ambient.
Vector random_unit_vector(int ambient, std::mt19937_64& rng);
// Uniform unit vector orthogonal to the unit vector `axis`.
Vector random_tangent(const Vector& axis, std::mt19937_64& rng);
// Area-uniform point of the cap.
Vector random_point_in_cap(const Cap& c, std::mt19937_64& rng);
Vector random_point_in_cap(const Cap& c, std::uint64_t seed);

Rotation random_rotation(int dim, std::uint64_t seed);
Rotation identity_rotation(int dim);
Vector apply_rotation(const Rotation& r, const Vector& v);
Instance apply_rotation(const Rotation& r, const Instance& inst);

// Point at angular distance `angle` from `from` along the geodesic with unit
// tangent `tangent` (tangent must be orthogonal to `from`).
Vector geodesic_point(const Vector& from, const Vector& tangent, double angle);

double sum_of_radii(const Instance& inst);

std::string to_string(const Vector& v);

}  // namespace capcover
