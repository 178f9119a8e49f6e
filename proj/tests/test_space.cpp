#include "doctest.h"

#include <set>

#include <nlohmann/json.hpp>

#include "dta/space.hpp"
#include "helpers.hpp"

using namespace dta;

TEST_CASE("grid enumeration is lexicographic and exhaustive") {
  DeploymentSpace space({{"a", {1, 2}}, {"b", {10}}});
  std::vector<Point> pts;
  space.for_each_point([&](const Point& p, std::uint64_t) { pts.push_back(p); });
  REQUIRE(pts.size() == 2);
  CHECK(pts[0] == Point{1, 10});
  CHECK(pts[1] == Point{2, 10});

  DeploymentSpace square({{"a", {0, 1}}, {"b", {0, 1}}});
  std::set<Point> distinct;
  square.for_each_point([&](const Point& p, std::uint64_t) { distinct.insert(p); });
  CHECK(distinct.size() == 4);
}

TEST_CASE("cardinality equals the direct product") {
  std::vector<double> many;
  for (int i = 0; i < 500; ++i) many.push_back(i);
  DeploymentSpace space({{"k", {1, 2, 3, 4, 5}}, {"tuples", many}});
  CHECK(space.cardinality() == 5ULL * 500ULL);
  std::uint64_t streamed = 0;
  space.for_each_point([&](const Point&, std::uint64_t) { ++streamed; });
  CHECK(streamed == 2500);
}

TEST_CASE("cardinality overflow is detected") {
  std::vector<Dimension> dims;
  for (int d = 0; d < 5; ++d) {
    Dimension dim;
    dim.name = "d" + std::to_string(d);
    for (int i = 0; i < 10000; ++i) dim.levels.push_back(i);
    dims.push_back(std::move(dim));
  }
  // 10^20 > 2^64
  CHECK_THROWS_AS(DeploymentSpace(std::move(dims)), std::overflow_error);
}

TEST_CASE("rank round-trip and grid closure") {
  const DeploymentSpace space = testing::make_grid(3, 7);
  space.for_each_point([&](const Point& p, std::uint64_t rank) {
    CHECK(space.rank_of(p) == rank);
    CHECK(space.point_at(rank) == p);
  });
  CHECK_FALSE(space.on_grid({1.5, 1, 1}));
  CHECK_THROWS_AS(space.rank_of({1.5, 1, 1}), std::invalid_argument);
}

TEST_CASE("space definition validation") {
  CHECK_THROWS(DeploymentSpace(std::vector<Dimension>{}));
  CHECK_THROWS(DeploymentSpace(std::vector<Dimension>{{"a", {}}}));
  CHECK_THROWS(DeploymentSpace({{"a", {1, 1}}}));  // not strictly increasing
  CHECK_THROWS(DeploymentSpace({{"a", {2, 1}}}));
  CHECK_THROWS(DeploymentSpace({{"a", {1}}, {"a", {1}}}));  // duplicate name
}

TEST_CASE("empty region is the whole space") {
  const DeploymentSpace space = testing::make_grid(2, 5);
  const Region root;
  space.for_each_point([&](const Point& p, std::uint64_t) { CHECK(root.contains(p)); });
  CHECK(region_grid_count(space, root) == 25);
}

TEST_CASE("on-boundary points belong to the below-or-on side") {
  Hyperplane flat;
  flat.coeffs = {1.0, 0.0};
  flat.offset = -3.0;  // x1 = 3
  const Region below = Region{}.refined(flat, true);
  const Region above = Region{}.refined(flat, false);
  CHECK(below.contains({3.0, 7.0}));
  CHECK_FALSE(above.contains({3.0, 7.0}));
  CHECK(above.contains({3.5, 7.0}));
}

TEST_CASE("region membership agrees with per-point sign evaluation") {
  const DeploymentSpace space = testing::make_grid(2, 20);
  Rng rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    Region region;
    std::vector<std::pair<Hyperplane, bool>> constraints;
    for (int c = 0; c < 3; ++c) {
      Hyperplane h;
      h.coeffs = {rng.gaussian(), rng.gaussian()};
      if (h.coeffs[0] == 0.0 && h.coeffs[1] == 0.0) h.coeffs[0] = 1.0;
      h.offset = 10.0 * rng.gaussian();
      const bool below = rng.uniform01() < 0.5;
      region = region.refined(h, below);
      constraints.emplace_back(h, below);
    }
    space.for_each_point([&](const Point& p, std::uint64_t) {
      bool expected = true;
      for (const auto& [h, below] : constraints) {
        double s = h.offset;
        for (std::size_t i = 0; i < p.size(); ++i) s += h.coeffs[i] * p[i];
        if ((s <= 0.0) != below) expected = false;
      }
      CHECK(region.contains(p) == expected);
    });
  }
}

TEST_CASE("region grid counts") {
  const DeploymentSpace space = testing::make_grid(2, 50);
  CHECK(region_grid_count(space, Region{}) == 2500);

  // halving cut on a symmetric even grid: x1 <= midpoint
  Hyperplane half;
  half.coeffs = {1.0, 0.0};
  half.offset = -25.5;
  CHECK(region_grid_count(space, Region{}.refined(half, true)) == 1250);
  CHECK(region_grid_count(space, Region{}.refined(half, false)) == 1250);

  // arbitrary oblique cut vs brute-force filtered count
  const DeploymentSpace small = testing::make_grid(2, 20);
  Hyperplane oblique;
  oblique.coeffs = {0.6, -1.3};
  oblique.offset = 4.2;
  const Region r = Region{}.refined(oblique, true);
  std::uint64_t brute = 0;
  small.for_each_point([&](const Point& p, std::uint64_t) {
    if (0.6 * p[0] - 1.3 * p[1] + 4.2 <= 0.0) ++brute;
  });
  CHECK(region_grid_count(small, r) == brute);
}

TEST_CASE("hyperplane normalization fixes scale and sign") {
  Hyperplane h;
  h.coeffs = {-3.0, 4.0};
  h.offset = 10.0;
  h.normalize();
  CHECK(h.coeffs[0] == doctest::Approx(0.6));
  CHECK(h.coeffs[1] == doctest::Approx(-0.8));
  CHECK(h.offset == doctest::Approx(-2.0));
  CHECK(h.coeffs[0] * h.coeffs[0] + h.coeffs[1] * h.coeffs[1] == doctest::Approx(1.0));
}

TEST_CASE("space json round-trip with categorical labels") {
  nlohmann::json j = {{"dimensions",
                       {{{"name", "nodes"}, {"levels", {2, 4, 8}}},
                        {{"name", "skew"}, {"levels", {0, 1, 2}}}}},
                      {"categorical", {{"skew", {"low", "mid", "high"}}}}};
  const DeploymentSpace space = DeploymentSpace::from_json(j);
  CHECK(space.num_dims() == 2);
  CHECK(space.cardinality() == 9);
  CHECK(space.categorical.at("skew")[2] == "high");
  const DeploymentSpace again = DeploymentSpace::from_json(space.to_json());
  CHECK(again.cardinality() == 9);

  nlohmann::json bad = j;
  bad["categorical"]["skew"] = {"low", "mid"};  // label count mismatch
  CHECK_THROWS(DeploymentSpace::from_json(bad));
  nlohmann::json bad2 = j;
  bad2["dimensions"][1]["levels"] = {1, 2, 3};  // not 0..k-1
  CHECK_THROWS(DeploymentSpace::from_json(bad2));
}
