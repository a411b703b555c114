#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "oscillab/cubes.hpp"
#include "oscillab/norms.hpp"

using namespace oscillab;

namespace {

std::set<std::size_t> cell_set(const Cube& q) {
  const auto c = oracle::cells(q);
  return {c.begin(), c.end()};
}

bool subset(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("cube basics") {
  const Cube q(2, 16, {14, 3}, 4);
  CHECK(q.measure() == doctest::Approx(1.0 / 16));
  CHECK(q.cell_count() == 16);
  CHECK(q.wraps());
  const auto listed = q.cells();
  CHECK(cell_set(q) == std::set<std::size_t>(listed.begin(), listed.end()));
  CHECK_THROWS_AS(Cube(1, 12, {0, 0}, 4), ParameterError);
  CHECK_THROWS_AS(Cube(1, 16, {0, 0}, 0), ParameterError);
  const auto children = Cube(1, 16, {4, 0}, 8).children();
  REQUIRE(children.size() == 2);
  CHECK(children[0] == Cube(1, 16, {4, 0}, 4));
  CHECK(children[1] == Cube(1, 16, {8, 0}, 4));
}

TEST_CASE("dilate examples") {
  const Cube q(1, 64, {16, 0}, 16);
  const Dilation d1 = dilate(q, 1);
  CHECK(d1.cube == q);
  CHECK_FALSE(d1.saturated);
  const Dilation d2 = dilate(q, 2);
  CHECK(d2.cube.sidelength() == 0.5);
  CHECK(d2.cube == Cube(1, 64, {8, 0}, 32));
  const Dilation d8 = dilate(q, 8);
  CHECK(d8.saturated);
  CHECK(d8.cube.cell_count() == 64);
  CHECK_THROWS_AS(dilate(q, 0.5), ParameterError);
  CHECK(saturation_index(q) == 2);
}

TEST_CASE("dilation contains the exact concentric cube and is monotone") {
  CounterRng rng(11, 0);
  for (int t = 0; t < 300; ++t) {
    const int n = t % 2 ? 2 : 1;
    const int m = n == 1 ? 64 : 32;
    const Cube q = oracle::random_cube(n, m, rng);
    const double l1 = rng.uniform(1, 6), l2 = l1 + rng.uniform(0, 4);
    const auto a = cell_set(dilated(q, l1)), b = cell_set(dilated(q, l2));
    CHECK(subset(cell_set(q), a));
    CHECK(subset(a, b));
    const Cube d = dilated(q, l1);
    if (d.is_full()) continue;
    // exact concentric interval [c - l1*l/2, c + l1*l/2) lies inside the snapped cube
    for (int ax = 0; ax < n; ++ax) {
      const double centre = q.anchor_cell(ax) + 0.5 * q.side_cells();
      const double lo = centre - 0.5 * l1 * q.side_cells();
      double start = d.anchor_cell(ax);
      while (start > lo + 1e-9) start -= m;
      CHECK(start <= lo + 1e-9);
      CHECK(start + d.side_cells() >= lo + l1 * q.side_cells() - 1e-9);
    }
  }
}

TEST_CASE("dyadic_adapted_grid tiles and nests") {
  const DyadicGrid g0 = dyadic_adapted_grid(Cube(1, 64, {8, 0}, 32), 0);
  REQUIRE(g0.level(0).size() == 1);
  const DyadicGrid g1 = dyadic_adapted_grid(Cube(2, 32, {4, 4}, 16), 1);
  CHECK(g1.level(1).size() == 4);
  const Cube root(1, 64, {24, 0}, 32);
  const DyadicGrid g3 = dyadic_adapted_grid(root, 3);
  for (int lvl = 0; lvl <= 3; ++lvl) {
    std::multiset<std::size_t> all;
    for (const Cube& c : g3.level(lvl)) {
      CHECK(c.side_cells() == 32 >> lvl);
      for (std::size_t i : oracle::cells(c)) all.insert(i);
      if (lvl > 0) {
        bool has_parent = false;
        for (const Cube& p : g3.level(lvl - 1)) has_parent = has_parent || p.contains(c);
        CHECK(has_parent);
      }
    }
    CHECK(std::set<std::size_t>(all.begin(), all.end()) == cell_set(root));
    CHECK(all.size() == 32);
  }
  CHECK_THROWS_AS(dyadic_adapted_grid(root, 6), ParameterError);
}

TEST_CASE("whitney examples") {
  const int m = 64;
  const DyadicGrid grid = torus_grid_adapted_to(Cube::full(1, m));
  CHECK(whitney_decompose(CellSet::empty(1, m), grid).empty());
  CHECK_THROWS_AS(whitney_decompose(CellSet::of_cube(Cube::full(1, m)), grid), DomainError);

  const Cube r(1, m, {16, 0}, 16);
  const CellSet omega = CellSet::of_cube(r);
  const auto cubes = whitney_decompose(omega, grid);
  const auto facts = oracle::whitney_facts(omega, cubes);
  CHECK(facts.disjoint);
  CHECK(facts.covers);
  CHECK(facts.four_inside);
  CHECK(facts.ten_meets);
  for (const auto& wc : cubes) CHECK(r.contains(wc.cube));
  CHECK(check_whitney(omega, cubes).all());
}

TEST_CASE("whitney invariants on random open sets") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const int n = s % 2 ? 2 : 1;
    const int m = n == 1 ? 128 : 32;
    const RealField f = oracle::random_real(n, m, 4000 + s);
    const RealField mf = maximal_function(f, 1);
    CounterRng rng(s, 9);
    const double t = rng.uniform(0.2, 3);
    const CellSet omega = CellSet::where(mf, [&](double v) { return v > t; });
    if (omega.is_full()) continue;
    const auto cubes = whitney_decompose(omega, torus_grid_adapted_to(Cube::full(n, m)));
    const auto facts = oracle::whitney_facts(omega, cubes);
    CHECK(facts.disjoint);
    CHECK(facts.covers);
    CHECK(facts.four_inside);
    CHECK(facts.ten_meets);
    const WhitneyCheck wc = check_whitney(omega, cubes);
    CHECK(wc.all());
    CHECK(wc.cubes == cubes.size());
  }
}

TEST_CASE("sample_disjoint_families") {
  const Cube q(2, 32, {0, 16}, 16);
  const auto fams = sample_disjoint_families(q, 12, 99, FamilyStrategy::dyadic_packing);
  REQUIRE(fams.size() >= 2);
  CHECK(fams[0] == CubeFamily{q});
  CHECK(fams[1] == q.children());
  CHECK(fams == sample_disjoint_families(q, 12, 99, FamilyStrategy::dyadic_packing));
  for (const auto& fam : fams) {
    CHECK(pairwise_disjoint(fam));
    std::vector<int> hits(32 * 32, 0);
    for (const Cube& c : fam) {
      CHECK(q.contains(c));
      for (std::size_t i : oracle::cells(c)) ++hits[i];
    }
    CHECK(*std::max_element(hits.begin(), hits.end()) <= 1);
  }
  const RealField f = oracle::random_real(2, 32, 5);
  const auto st = sample_disjoint_families(q, 12, 7, FamilyStrategy::stopping_time, &f);
  for (const auto& fam : st) {
    CHECK(pairwise_disjoint(fam));
    for (const Cube& c : fam) CHECK(q.contains(c));
  }
  CHECK(parse_family_strategy("stopping-time") == FamilyStrategy::stopping_time);
}

TEST_CASE("cell sets") {
  const Cube a(1, 32, {30, 0}, 4);
  const CellSet s = CellSet::of_cube(a);
  CHECK(s.count() == 4);
  CHECK(s.contains(31));
  CHECK(s.contains(1));
  CHECK(s.count_in(Cube(1, 32, {0, 0}, 8)) == 2);
  CHECK(s.subset_of(Cube(1, 32, {28, 0}, 8)));
  CHECK(s.measure() == doctest::Approx(0.125));
}
