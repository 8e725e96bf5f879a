#include <doctest.h>

#include <cmath>
#include <random>

#include "comblab/geometry.hpp"

using namespace comblab;

TEST_CASE("comb construction") {
  CHECK(build_comb(1).heights() == std::vector<double>{1.0});
  CHECK(build_comb(3).heights() == std::vector<double>{1.0, 0.5, 0.25});
  CHECK_THROWS_AS(build_comb(0), GeometryError);
  for (int j = 0; j < 40; ++j) CHECK(dyadic_level(tooth_height(j)) == j);
  CHECK(dyadic_level(0.75) == -1);
}

TEST_CASE("truncation") {
  const auto t0 = truncate(build_comb(1), 0);
  CHECK(t0.cut_length() == 1.0);
  const auto t2 = truncate(build_comb(3), 2);
  CHECK(t2.cut_length() == 0.25);
  CHECK(t2.base.heights() == std::vector<double>{1.0, 0.5, 0.25});
  // the strip below the cut reaches the bottom edge
  CHECK_FALSE(contains(DomainSpec{t2}, {0.5, 0.1}));
  CHECK(contains(DomainSpec{t2}, {-0.5, 0.1}));
  CHECK(contains(DomainSpec{t2}, {0.5, 0.3}));
  CHECK_THROWS_AS(truncate(build_comb(1), -1), GeometryError);
}

TEST_CASE("partial comb contains the full comb") {
  CHECK(build_partial_comb(0).num_slits == 1);
  CHECK(build_partial_comb(2).num_slits == 3);
  const DomainSpec g = build_partial_comb(3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), uy(0.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const Point p{ux(rng), uy(rng)};
    if (comb_contains(p)) CHECK(contains(g, p));
  }
}

TEST_CASE("fan embedding") {
  const auto a = embed_F(Point{-0.5, 1.0});
  CHECK(a[0] == -0.5);
  CHECK(a[1] == 1.0);
  CHECK(a[2] == 0.0);
  const auto b = embed_F(Point{0.9, 0.75});
  CHECK(b[0] == doctest::Approx(0.9 * std::cos(0.5)).epsilon(1e-14));
  CHECK(b[1] == 0.75);
  CHECK(b[2] == doctest::Approx(0.9 * std::sin(0.5)).epsilon(1e-14));
  CHECK(b[0] == doctest::Approx(0.78986).epsilon(1e-4));
  CHECK(b[2] == doctest::Approx(0.43148).epsilon(1e-5));
  CHECK(band_angle(0) == 1.0);

  const auto up = ExtendedPoint::make({0.9, 0.5}, Sheet::upper(1));
  const auto lo = ExtendedPoint::make({0.9, 0.5}, Sheet::lower(1));
  // chord between bands 1 and 2
  const double chord = 2.0 * 0.9 * std::sin((0.5 - 0.25) / 2.0);
  CHECK(dist_ext(up, lo) == doctest::Approx(chord).epsilon(1e-12));
  CHECK(dist_ext(up, lo) == doctest::Approx(0.22442).epsilon(1e-4));
  CHECK(dist_ext(up, up) == 0.0);
  // the Euclidean gap of interior points closing in on the two sides vanishes
  const double d = 1e-9;
  CHECK(dist_ext(ExtendedPoint{{0.9, 0.5 + d}, {}}, ExtendedPoint{{0.9, 0.5 - d}, {}}) ==
        doctest::Approx(chord).epsilon(1e-6));
}

TEST_CASE("extended point invariants") {
  CHECK_THROWS_AS(ExtendedPoint::make({0.5, 0.7}, Sheet::upper(0)), GeometryError);
  CHECK_THROWS_AS(ExtendedPoint::make({0.1, 1.0}, Sheet::tip(0)), GeometryError);
  CHECK_THROWS_AS(ExtendedPoint::make({0.5, 0.1}, Sheet::inaccessible()), GeometryError);
  CHECK_NOTHROW(ExtendedPoint::make({0.5, 0.0}, Sheet::inaccessible()));
  CHECK(phi(ExtendedPoint::make({0.5, 1.0}, Sheet::lower(0))) == Point{0.5, 1.0});
}

namespace {
ExtendedPoint random_extended(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(-1.0, 1.0), uy(0.0, 2.0), u01(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 4), tooth(0, 6);
  switch (pick(rng)) {
    case 0: {
      const int j = tooth(rng);
      return ExtendedPoint::make({u01(rng) * 0.999 + 0.001, tooth_height(j)}, Sheet::upper(j));
    }
    case 1: {
      const int j = tooth(rng);
      return ExtendedPoint::make({u01(rng) * 0.999 + 0.001, tooth_height(j)}, Sheet::lower(j));
    }
    case 2: {
      const int j = tooth(rng);
      return ExtendedPoint::make({0.0, tooth_height(j)}, Sheet::tip(j));
    }
    default:
      for (;;) {
        const Point p{ux(rng), uy(rng)};
        if (comb_contains(p)) return ExtendedPoint{p, {}};
      }
  }
}
}  // namespace

TEST_CASE("extended distance is a metric") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_extended(rng), b = random_extended(rng), c = random_extended(rng);
    CHECK(dist_ext(a, b) == doctest::Approx(dist_ext(b, a)).epsilon(1e-15));
    CHECK(dist_ext(a, c) <= dist_ext(a, b) + dist_ext(b, c) + 1e-12);
    CHECK(dist_ext(a, b) >= 0.0);
    if (a != b) CHECK(dist_ext(a, b) > 0.0);
    if (a.sheet.kind == SheetKind::Free && b.sheet.kind == SheetKind::Free) {
      // F only opens up the right half; across x1 = 0 the chord is shorter
      if ((a.xy.x < 0.0) == (b.xy.x < 0.0)) CHECK(distance(a.xy, b.xy) <= dist_ext(a, b) + 1e-12);
      else CHECK(dist_ext(a, b) <= distance(a.xy, b.xy) + 1e-12);
    }
  }
}

TEST_CASE("boundary classification") {
  const CombSpec c = build_comb(8);
  CHECK(classify_boundary(c, ExtendedPoint::make({0.5, 0.0}, Sheet::inaccessible())) == BoundaryClass::InaccessibleI);
  CHECK(classify_boundary(c, ExtendedPoint{{0.5, 0.0}, {}}) == BoundaryClass::InaccessibleI);
  CHECK(classify_boundary(c, ExtendedPoint{{0.0, 0.0}, {}}) == BoundaryClass::OriginAccessible);
  CHECK(classify_boundary(c, ExtendedPoint::make({0.0, 0.5}, Sheet::tip(1))) == BoundaryClass::ToothTip);
  CHECK(classify_boundary(c, ExtendedPoint::make({0.5, 0.5}, Sheet::upper(1))) == BoundaryClass::ToothTwoSided);
  CHECK(classify_boundary(c, ExtendedPoint{{-1.0, 0.3}, {}}) == BoundaryClass::OuterRegular);
  CHECK(classify_boundary(c, ExtendedPoint{{1.0, 0.5}, {}}) == BoundaryClass::OuterRegular);
  CHECK_THROWS_AS(classify_boundary(c, ExtendedPoint{{-0.5, 0.3}, {}}), GeometryError);
  CHECK_FALSE(on_prime_end_boundary(BoundaryClass::InaccessibleI));
  CHECK(on_prime_end_boundary(BoundaryClass::OriginAccessible));
}

TEST_CASE("mazurkiewicz distance") {
  const CombSpec c = build_comb(6);
  const double res = 1.0 / 128;
  CHECK(mazurkiewicz_dist_approx(c, {-0.5, 0.5}, {-0.5, 1.5}, res) == doctest::Approx(1.0).epsilon(res));
  CHECK(mazurkiewicz_dist_approx(c, {0.3, 0.7}, {0.3, 0.7}, res) == 0.0);
  const double d = 0.01;
  CHECK(mazurkiewicz_dist_approx(c, {0.6, 0.5 + d}, {0.6, 0.5 - d}, res) >= 0.6 - res);
  // lower bound by the chord on random pairs
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), uy(0.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    Point a, b;
    do a = {ux(rng), uy(rng)}; while (!comb_contains(a) || a.y < 0.04);
    do b = {ux(rng), uy(rng)}; while (!comb_contains(b) || b.y < 0.04);
    CHECK(mazurkiewicz_dist_approx(c, a, b, 1.0 / 64) >= distance(a, b) - 2.0 / 64);
  }
}

TEST_CASE("domain json round trip") {
  const DomainSpec d = truncate(build_comb(4), 3);
  const auto back = domain_from_json(to_json(d));
  CHECK(describe(back) == describe(d));
  CHECK_THROWS(domain_from_json(nlohmann::json{{"type", "comb"}}));
}
