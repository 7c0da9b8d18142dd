#include <cmath>

#include <gtest/gtest.h>

#include "capcover/oracle.hpp"
#include "capcover/sphere.hpp"

using namespace capcover;

namespace {

Vector e(int i) { return Vector::Unit(3, i); }

Vector v3(double x, double y, double z) {
  Vector v(3);
  v << x, y, z;
  return v;
}

// Unit vector at angle `a` from e_0 in the e_0 e_1 plane.
Vector at_angle(double a) { return v3(std::cos(a), std::sin(a), 0.0); }

}  // namespace

TEST(Distance, Examples) {
  EXPECT_EQ(spherical_distance(e(0), e(0)), 0.0);
  EXPECT_NEAR(spherical_distance(e(0), -e(0)), kPi, 1e-15);
  EXPECT_NEAR(spherical_distance(e(0), e(1)), kHalfPi, 1e-15);
}

TEST(Distance, AccurateForTinyAngles) {
  for (double a : {1e-12, 1e-9, 1e-6, 1e-3}) {
    EXPECT_NEAR(spherical_distance(e(0), at_angle(a)), a, 1e-15 * (1 + a));
  }
  EXPECT_NEAR(spherical_distance(e(0), -at_angle(1e-9)), kPi - 1e-9, 1e-15);
}

TEST(Distance, RejectsBadInput) {
  EXPECT_THROW(spherical_distance(e(0), Vector::Unit(4, 0)), DimensionMismatch);
}

TEST(CapContainsPoint, Examples) {
  const Cap c{e(0), kPi / 6};
  EXPECT_TRUE(cap_contains_point(c, e(0)));
  EXPECT_FALSE(cap_contains_point(c, e(1)));
  EXPECT_TRUE(cap_contains_point(c, at_angle(kPi / 6)));
}

TEST(CapContainsCap, Examples) {
  const Cap inner{e(0), kPi / 6};
  EXPECT_TRUE(cap_contains_cap(inner, inner));

  const Cap outer{e(0), kPi / 3};
  const Cap tight{at_angle(kPi / 6), kPi / 6};
  EXPECT_TRUE(cap_contains_cap(outer, tight));
  EXPECT_NEAR(cap_containment_slack(outer, tight), 0.0, 1e-15);
  EXPECT_TRUE(sampled_containment(outer, tight, 100000, 1).pass());

  const Cap loose{at_angle(kPi / 6 + 0.01), kPi / 6};
  EXPECT_FALSE(cap_contains_cap(outer, loose));
  EXPECT_FALSE(sampled_containment(outer, loose, 100000, 1).pass());
}

TEST(ZoneContainsPoint, Examples) {
  const Zone z{e(2), kPi / 6};
  EXPECT_TRUE(zone_contains_point(z, e(0)));
  EXPECT_TRUE(zone_contains_point(z, at_angle(1.234)));
  EXPECT_FALSE(zone_contains_point(z, e(2)));
  for (double t : {0.0, 0.7, 2.0, 4.5}) {
    const double s = std::cos(kPi / 6);
    EXPECT_TRUE(zone_contains_point(z, v3(s * std::cos(t), s * std::sin(t), 0.5)));
  }
}

TEST(ZoneContainsZone, Examples) {
  EXPECT_TRUE(zone_contains_zone(Zone{e(2), 0.5}, Zone{e(2), 0.3}));
  EXPECT_TRUE(zone_contains_zone(Zone{e(2), 0.5}, Zone{-e(2), 0.5}));
  EXPECT_FALSE(zone_contains_zone(Zone{e(2), 0.3}, Zone{e(2), 0.5}));

  const Zone outer{e(0), kPi / 3};
  const Zone tight{at_angle(kPi / 6), kPi / 6};
  EXPECT_TRUE(zone_contains_zone(outer, tight));
  EXPECT_TRUE(sampled_containment(outer, tight, 100000, 2).pass());

  const Zone loose{at_angle(kPi / 6 + 0.01), kPi / 6};
  EXPECT_FALSE(zone_contains_zone(outer, loose));
  EXPECT_FALSE(sampled_containment(outer, loose, 100000, 2).pass());

  // Normals nearly antipodal act like nearly equal normals.
  const Zone flipped{-at_angle(kPi / 6), kPi / 6};
  EXPECT_TRUE(zone_contains_zone(outer, flipped));
}

TEST(CapToZone, Examples) {
  const Zone z = cap_to_zone(Cap{e(2), kPi / 6});
  EXPECT_EQ(z.normal, e(2));
  EXPECT_EQ(z.half_width, kPi / 6);
  const Zone zm = cap_to_zone(Cap{-e(2), kPi / 6});
  EXPECT_EQ(zm.normal, e(2));

  const Cap c{at_angle(2.5), 0.4};
  const auto [p, q] = zone_to_antipodal_caps(cap_to_zone(c));
  EXPECT_TRUE(p.open);
  EXPECT_TRUE(q.open);
  EXPECT_NEAR(p.radius, kHalfPi - 0.4, 1e-15);
  EXPECT_NEAR(q.radius, kHalfPi - 0.4, 1e-15);
  const bool matches = (p.center - c.center).norm() < 1e-15 ||
                       (q.center - c.center).norm() < 1e-15;
  EXPECT_TRUE(matches);
  EXPECT_NEAR((p.center + q.center).norm(), 0.0, 1e-15);
}

TEST(ZoneToCaps, Examples) {
  const auto [p, q] = zone_to_antipodal_caps(Zone{e(2), kPi / 6});
  EXPECT_NEAR(p.radius, kPi / 3, 1e-15);
  EXPECT_EQ(p.center, e(2));
  EXPECT_EQ(q.center, -e(2));

  const auto [a, b] = zone_to_antipodal_caps(Zone{e(2), kHalfPi - 1e-3});
  EXPECT_NEAR(a.radius, 1e-3, 1e-15);
  EXPECT_NEAR(b.radius, 1e-3, 1e-15);

  // Back through cap_to_zone, both caps give the same zone.
  const Zone z{canonical_sign(at_angle(-0.3)), 0.2};
  const auto [c1, c2] = zone_to_antipodal_caps(z);
  for (const Cap& c : {c1, c2}) {
    Cap closed{c.center, kHalfPi - c.radius};
    const Zone back = cap_to_zone(closed);
    EXPECT_NEAR((back.normal - z.normal).norm(), 0.0, 1e-15);
    EXPECT_NEAR(back.half_width, z.half_width, 1e-15);
  }
}

TEST(PlankVector, Examples) {
  const PlankVector w = plank_vector(Zone{e(2), kPi / 6});
  EXPECT_NEAR((w.w - v3(0, 0, 0.5)).norm(), 0.0, 1e-15);

  const double eps = 1e-4;
  EXPECT_NEAR(plank_vector(Zone{e(0), kHalfPi - eps}).w.norm(), std::cos(eps),
              1e-15);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Zone z{canonical_sign(random_unit_vector(4, rng)),
                 std::uniform_real_distribution<double>(0.01, 1.5)(rng)};
    const Zone back = zone_of_plank_vector(plank_vector(z));
    EXPECT_NEAR((back.normal - z.normal).norm(), 0.0, 1e-14);
    EXPECT_NEAR(back.half_width, z.half_width, 1e-12);
  }
  EXPECT_THROW(zone_of_plank_vector(PlankVector{Vector::Zero(3)}),
               ValidationError);
  EXPECT_THROW(zone_of_plank_vector(PlankVector{e(0)}), ValidationError);
}

TEST(CanonicalSign, FirstNonzeroCoordinatePositive) {
  EXPECT_EQ(canonical_sign(v3(0, -1, 0)), v3(0, 1, 0));
  EXPECT_EQ(canonical_sign(v3(-0.6, 0.8, 0)), v3(0.6, -0.8, 0));
  EXPECT_EQ(canonical_sign(v3(0, 0.6, -0.8)), v3(0, 0.6, -0.8));
}

TEST(Sampling, PointsLieInCap) {
  for (int dim : {1, 2, 3, 5}) {
    std::mt19937_64 rng(dim);
    const Cap c{random_unit_vector(dim + 1, rng), kPi / 6};
    for (int i = 0; i < 10000; ++i) {
      const Vector p = random_point_in_cap(c, rng);
      ASSERT_NEAR(p.norm(), 1.0, 1e-12);
      ASSERT_TRUE(cap_contains_point(c, p));
    }
  }
}

TEST(Sampling, CapAreaUniformOnS2) {
  // On S^2 the cap measure is proportional to 1 - cos(r): half of the
  // samples of a cap of radius R fall within arccos((1 + cos R) / 2).
  std::mt19937_64 rng(11);
  const Cap c{e(2), 1.0};
  const double median = std::acos((1.0 + std::cos(1.0)) / 2.0);
  int inside = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    if (spherical_distance(random_point_in_cap(c, rng), e(2)) < median) ++inside;
  }
  EXPECT_NEAR(inside / double(n), 0.5, 0.015);
}

TEST(Rotation, PreservesDistancesAndOrientation) {
  for (int dim : {1, 2, 3, 4}) {
    const Rotation r = random_rotation(dim, 17 + dim);
    EXPECT_NEAR(r.matrix.determinant(), 1.0, 1e-12);
    EXPECT_NEAR((r.matrix.transpose() * r.matrix -
                 Matrix::Identity(dim + 1, dim + 1))
                    .norm(),
                0.0, 1e-12);
    std::mt19937_64 rng(dim);
    Instance inst{dim, {}};
    for (int i = 0; i < 6; ++i) {
      inst.caps.push_back(Cap{random_unit_vector(dim + 1, rng), 0.1});
    }
    const Instance rot = apply_rotation(r, inst);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        EXPECT_NEAR(spherical_distance(inst.caps[i].center, inst.caps[j].center),
                    spherical_distance(rot.caps[i].center, rot.caps[j].center),
                    1e-12);
      }
    }
  }
}

TEST(Rotation, IdentityLeavesInstanceUnchanged) {
  std::mt19937_64 rng(3);
  Instance inst{2, {Cap{random_unit_vector(3, rng), 0.2},
                    Cap{random_unit_vector(3, rng), 0.3}}};
  const Instance same = apply_rotation(identity_rotation(2), inst);
  for (std::size_t i = 0; i < inst.caps.size(); ++i) {
    EXPECT_EQ(same.caps[i].center, inst.caps[i].center);
    EXPECT_EQ(same.caps[i].radius, inst.caps[i].radius);
  }
}

TEST(Validation, RejectsBadCaps) {
  EXPECT_THROW(validate_cap(Cap{e(0), 0.0}), ValidationError);
  EXPECT_THROW(validate_cap(Cap{e(0), kHalfPi}), ValidationError);
  EXPECT_THROW(validate_cap(Cap{2.0 * e(0), 0.1}), ValidationError);
  Instance mixed{2, {Cap{e(0), 0.1}, Cap{Vector::Unit(4, 0), 0.1}}};
  EXPECT_THROW(validate_instance(mixed), DimensionMismatch);
}
