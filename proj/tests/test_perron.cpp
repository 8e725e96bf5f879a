#include <doctest.h>

#include <cmath>
#include <numbers>

#include "comblab/perron.hpp"

using namespace comblab;

namespace {
constexpr double pi = std::numbers::pi;

LabConfig lab(double p = 2.0) {
  LabConfig c;
  c.solver.p = p;
  c.threads = 2;
  return c;
}
}  // namespace

TEST_CASE("jump reference function") {
  CHECK(jump_reference_U(0.0, 1.0, 0.0, pi, pi / 2) == doctest::Approx(0.5));
  CHECK(jump_reference_U(0.0, 1.0, 0.0, pi, 1e-12) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(jump_reference_U(0.0, 1.0, 0.0, pi, pi - 1e-12) == doctest::Approx(1.0).epsilon(1e-10));
  for (const double th : {0.1, 1.0, 3.0}) CHECK(jump_reference_U(0.3, 0.3, 0.0, pi, th) == 0.3);
  CHECK_THROWS_AS(jump_reference_U(0.0, 1.0, 0.0, pi, 4.0), ExperimentError);
  CHECK_THROWS_AS(jump_reference_U(0.0, 1.0, 0.0, pi, 0.0), ExperimentError);
  CHECK_THROWS_AS(jump_reference_U(0.0, 1.0, 0.0, 7.0, 1.0), ExperimentError);
  // shifting both directions by a full turn, and swapping the two sides
  const Point x0{1.0, 1.5};
  for (const Point q : {Point{0.9, 1.6}, Point{0.8, 1.5}, Point{0.95, 1.2}}) {
    const double u = jump_reference_U(x0, 0.0, 1.0, pi / 2, 3 * pi / 2, q);
    CHECK(jump_reference_U(x0, 0.0, 1.0, pi / 2 + 2 * pi, 3 * pi / 2 + 2 * pi, q) == doctest::Approx(u));
    CHECK(jump_reference_U(x0, 1.0, 0.0, 3 * pi / 2, pi / 2, q) == doctest::Approx(u));
  }
}

TEST_CASE("full-turn sector at a tooth tip") {
  const auto jt = JumpSpec::tooth_tip(1, 0.0, 1.0);
  CHECK(jt.alpha2 - jt.alpha1 == doctest::Approx(2 * pi));
  const auto up = ExtendedPoint::make({0.3, 0.5}, Sheet::upper(1));
  const auto lo = ExtendedPoint::make({0.3, 0.5}, Sheet::lower(1));
  CHECK(jump_angle(jt, up) == 0.0);
  CHECK(jump_angle(jt, lo) == doctest::Approx(2 * pi));
  CHECK(jump_reference_U(jt, ExtendedPoint{{-0.1, 0.5}, {}}) == doctest::Approx(0.5));
  CHECK(jump_reference_U(jt, ExtendedPoint{{0.0, 0.6}, {}}) == doctest::Approx(0.25));
  const auto f = BoundaryFunctionSpec::jump(jt);
  CHECK(f(up, BoundaryClass::ToothTwoSided) == 0.0);
  CHECK(f(lo, BoundaryClass::ToothTwoSided) == 1.0);
  CHECK(f(ExtendedPoint::make({0.0, 0.5}, Sheet::tip(1)), BoundaryClass::ToothTip) == 0.5);
}

TEST_CASE("boundary data") {
  auto f = BoundaryFunctionSpec::expression("y/2 + s*x");
  CHECK(f(ExtendedPoint::make({0.5, 1.0}, Sheet::upper(0)), BoundaryClass::ToothTwoSided) == 1.0);
  CHECK(f(ExtendedPoint::make({0.5, 1.0}, Sheet::lower(0)), BoundaryClass::ToothTwoSided) == 0.0);
  CHECK_THROWS_AS(f(ExtendedPoint{{0.0, 0.1}, Sheet::cut()}, BoundaryClass::Cut), ExperimentError);
  f.value_on_I = 7.0;
  f.overrides.push_back({{1.0, 1.5}, -3.0});
  CHECK(f(ExtendedPoint::make({0.5, 0.0}, Sheet::inaccessible()), BoundaryClass::InaccessibleI) == 7.0);
  CHECK(f(ExtendedPoint{{1.0, 1.5}, {}}, BoundaryClass::OuterRegular) == -3.0);
  const auto [lo, hi] = BoundaryFunctionSpec::expression("y/2").range();
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
  const auto b = BoundaryFunctionSpec::bump({1.0, 1.0}, 0.25, 2.0);
  CHECK(b(ExtendedPoint{{1.0, 1.125}, {}}, BoundaryClass::OuterRegular) == doctest::Approx(1.0));
  CHECK(b.range().second == 2.0);
}

TEST_CASE("boundary data from json") {
  const auto f = BoundaryFunctionSpec::from_json(nlohmann::json::parse(
      R"({"expression": "x", "bumps": [{"center": [1, 1.5], "radius": 0.25}], "value_on_I": 3, "bounds": [-1, 2]})"));
  CHECK(f.terms.size() == 2);
  CHECK(f.range() == std::pair{-1.0, 2.0});
  CHECK_THROWS(BoundaryFunctionSpec::from_json(nlohmann::json::parse(R"({"expresion": "x"})")));
  CHECK_THROWS(BoundaryFunctionSpec::from_json(nlohmann::json::parse(R"({"jumps": [{"kind": "nowhere"}]})")));
}

TEST_CASE("bracket of constant data") {
  const auto rep = perron_bracket(BoundaryFunctionSpec::constant(1.0), {0, 1, 2}, default_probes(), lab(3.0));
  CHECK(rep.rows.size() == 3);
  for (const auto& r : rep.rows) {
    CHECK(r.upper == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.lower == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(r.width()) <= 1e-9);
  }
}

TEST_CASE("bracket shrinks and mirrors") {
  const auto f = BoundaryFunctionSpec::expression("y/2");
  const auto g = BoundaryFunctionSpec::expression("2 - y/2");
  const auto rf = perron_bracket(f, {2, 3, 4}, default_probes(), lab());
  const auto rg = perron_bracket(g, {2, 3, 4}, default_probes(), lab());
  CHECK(rf.ordered);
  for (std::size_t i = 0; i < rf.rows.size(); ++i) {
    CHECK(rf.rows[i].upper + rg.rows[i].lower == doctest::Approx(2.0).epsilon(1e-8));
    if (i > 0) {
      CHECK(rf.rows[i].width() < rf.rows[i - 1].width());
      CHECK(rf.rows[i].upper <= rf.rows[i - 1].upper + 1e-6);
      CHECK(rf.rows[i].lower >= rf.rows[i - 1].lower - 1e-6);
    }
  }
  CHECK_THROWS_AS(perron_bracket(f, {2}, {{0.5, 0.1}}, lab()), ExperimentError);
}

TEST_CASE("invariance under data on the cut") {
  const auto f = BoundaryFunctionSpec::expression("y/2");
  const auto rep = invariance_experiment(f, {0.0, 0.5, 1.0, 5.0}, {2, 3}, default_probes(), lab());
  CHECK(rep.inside_bracket);
  CHECK(rep.pairwise_within_width);
  // overrides at the extremes reproduce the bracket; 5 is clipped to sup f
  for (const auto& o : rep.overrides) {
    if (o.requested == 5.0) {
      CHECK(o.clipped);
      CHECK(o.used == 1.0);
    }
  }
  for (std::size_t i = 0; i < rep.max_pairwise.size(); ++i)
    CHECK(rep.max_pairwise[i].second == doctest::Approx(rep.bracket.rows[i].width()).epsilon(1e-7));
  const auto one = invariance_experiment(BoundaryFunctionSpec::constant(1.0), {0.0, 1.0, 2.0}, {1}, default_probes(), lab());
  for (const auto& [k, d] : one.max_pairwise) CHECK(d <= 1e-9);
}

TEST_CASE("regularity probe") {
  const auto f = BoundaryFunctionSpec::expression("y/2 + 0.25*s*x");
  Approach up;
  up.direction = {0.0, 1.0};
  Approach down;
  down.direction = {0.0, -1.0};
  const auto ru = regularity_probe(f, ExtendedPoint::make({0.5, 1.0}, Sheet::upper(0)), up, 2, lab());
  const auto rl = regularity_probe(f, ExtendedPoint::make({0.5, 1.0}, Sheet::lower(0)), down, 2, lab());
  CHECK(ru.f_x0 == 0.625);
  CHECK(rl.f_x0 == 0.375);
  CHECK(ru.decreasing);
  CHECK(rl.decreasing);
  CHECK(ru.rows.back().discrepancy() < 5e-2);
  CHECK(rl.rows.back().discrepancy() < 5e-2);
  CHECK_THROWS_AS(regularity_probe(f, ExtendedPoint::make({0.5, 1.0}, Sheet::upper(0)), down, 2, lab()), ExperimentError);
  const auto rc = regularity_probe(BoundaryFunctionSpec::constant(0.3), ExtendedPoint{{1.0, 1.5}, {}}, Approach{}, 2, lab());
  for (const auto& r : rc.rows) CHECK(r.discrepancy() <= 1e-6);
}

TEST_CASE("jump experiment") {
  const auto e = JumpSpec::outer_wall(1.5, 0.0, 1.0);
  const auto rep = jump_experiment(BoundaryFunctionSpec::jump(e), {e}, {0.0, 1.0}, 2, default_probes(), Approach{}, lab());
  CHECK(rep.levels.size() == 3);
  CHECK(rep.difference_decreasing);
  CHECK(rep.approach_decreasing);
  const JumpSpec origin{ExtendedPoint{{0.0, 0.0}, {}}, 0.0, 1.0, 0.0, pi};
  CHECK_THROWS_AS(jump_experiment(BoundaryFunctionSpec::jump(e), {origin}, {0.0, 1.0}, 2, default_probes(), Approach{}, lab()),
                  ExperimentError);
}

TEST_CASE("blow-up bumps") {
  const auto b2 = blowup_bump(2);
  CHECK(b2.center == Point{1.0, 3.0 / 8.0});
  CHECK(b2.radius == 1.0 / 16.0);
  for (int j = 1; j < 10; ++j) {
    // each support stays inside the band between teeth j and j-1
    const auto b = blowup_bump(j);
    CHECK(b.center.y - b.radius > tooth_height(j));
    CHECK(b.center.y + b.radius < tooth_height(j - 1));
  }
  const auto rep = blowup_probe(1, {-0.5, 1.0}, 5, lab());
  CHECK(rep.bump_values[0] > 1e-12);
  CHECK(rep.u_J[0] >= 1.8);
  CHECK_THROWS_AS(blowup_probe(1, {-0.5, 1.0}, 1, lab()), ExperimentError);
}
