#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dta/deployers.hpp"
#include "dta/linmodel.hpp"
#include "helpers.hpp"

using namespace dta;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/dta_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("synthetic formulas on identity-scaled coordinates") {
  // levels {0, 1}: the unit-box map is the identity
  const DeploymentSpace space({{"x1", {0, 1}}, {"x2", {0, 1}}});

  SyntheticDeployer lin(space, SyntheticFunction::with_coeffs(SyntheticKind::kLin, {0.8, 0.2}));
  CHECK(*lin.evaluate({1.0, 1.0}).value == doctest::Approx(1.0));
  CHECK(*lin.evaluate({0.0, 1.0}).value == doctest::Approx(0.2));

  SyntheticDeployer gauss(space, SyntheticFunction::with_coeffs(SyntheticKind::kGauss, {3.0, 5.0}));
  CHECK(*gauss.evaluate({0.0, 0.0}).value == doctest::Approx(1.0));

  SyntheticDeployer hat(space, SyntheticFunction::with_coeffs(SyntheticKind::kHat, {3.0, 5.0}));
  CHECK(*hat.evaluate({0.0, 0.0}).value == doctest::Approx(0.0));

  // remaining formula relationships at a probe point
  const std::vector<double> a = {0.5, 1.5};
  SyntheticDeployer exp_d(space, SyntheticFunction::with_coeffs(SyntheticKind::kExp, a));
  SyntheticDeployer expabs(space, SyntheticFunction::with_coeffs(SyntheticKind::kExpAbs, a));
  SyntheticDeployer expsq(space, SyntheticFunction::with_coeffs(SyntheticKind::kExpSq, a));
  SyntheticDeployer wave(space, SyntheticFunction::with_coeffs(SyntheticKind::kWave, a));
  const Point p = {1.0, 1.0};
  const double f1 = 0.5 + 1.5;
  CHECK(*exp_d.evaluate(p).value == doctest::Approx(std::exp(f1)));
  CHECK(*expabs.evaluate(p).value == doctest::Approx(std::exp(std::abs(f1))));
  CHECK(*expsq.evaluate(p).value == doctest::Approx(std::exp(-f1 * f1)));
  CHECK(*wave.evaluate(p).value == doctest::Approx(std::cos(f1) * std::exp(f1)));
}

TEST_CASE("synthetic evaluation is pure and deterministic") {
  const DeploymentSpace space = testing::make_grid(2, 10);
  SyntheticDeployer dep(space, SyntheticFunction::generate(SyntheticKind::kWave, 2, 123));
  space.for_each_point([&](const Point& p, std::uint64_t) {
    const double a = *dep.evaluate(p).value;
    const double b = *dep.evaluate(p).value;
    CHECK(a == b);
  });
  // same seed regenerates the same coefficients
  const auto f1 = SyntheticFunction::generate(SyntheticKind::kWave, 2, 123);
  const auto f2 = SyntheticFunction::generate(SyntheticKind::kWave, 2, 123);
  CHECK(f1.coeffs == f2.coeffs);
}

TEST_CASE("replay round-trips a synthetic grid bitwise") {
  const DeploymentSpace space = testing::make_grid(2, 50);
  SyntheticDeployer dep(space, SyntheticFunction::generate(SyntheticKind::kLin, 2, 9));
  TempFile csv("replay.csv");
  const std::uint64_t rows = dump_grid_csv(space, dep, csv.path);
  CHECK(rows == 2500);
  GridReplay replay = GridReplay::load(csv.path, space);
  CHECK(replay.size() == 2500);
  space.for_each_point([&](const Point& p, std::uint64_t) {
    CHECK(*replay.evaluate(p).value == *dep.evaluate(p).value);
  });
}

TEST_CASE("replay load failures are loud and specific") {
  const DeploymentSpace space({{"x1", {1, 2}}, {"x2", {1, 2}}});

  SUBCASE("missing point is named") {
    TempFile csv("missing.csv");
    std::ofstream out(csv.path);
    out << "x1,x2,metric\n1,1,10\n1,2,20\n2,1,30\n";  // (2,2) absent
    out.close();
    CHECK_THROWS_WITH_AS(GridReplay::load(csv.path, space),
                         doctest::Contains("missing grid point (x1=2, x2=2)"),
                         std::runtime_error);
  }
  SUBCASE("duplicate point rejected") {
    TempFile csv("dup.csv");
    std::ofstream out(csv.path);
    out << "x1,x2,metric\n1,1,10\n1,1,11\n1,2,20\n2,1,30\n2,2,40\n";
    out.close();
    CHECK_THROWS_WITH_AS(GridReplay::load(csv.path, space), doctest::Contains("duplicate"),
                         std::runtime_error);
  }
  SUBCASE("non-numeric metric rejected") {
    TempFile csv("nan.csv");
    std::ofstream out(csv.path);
    out << "x1,x2,metric\n1,1,abc\n1,2,20\n2,1,30\n2,2,40\n";
    out.close();
    CHECK_THROWS_WITH_AS(GridReplay::load(csv.path, space), doctest::Contains("non-numeric"),
                         std::runtime_error);
  }
  SUBCASE("wrong header rejected") {
    TempFile csv("hdr.csv");
    std::ofstream out(csv.path);
    out << "x1,weird,metric\n";
    out.close();
    CHECK_THROWS(GridReplay::load(csv.path, space));
  }
}

TEST_CASE("command deployer substitution, failure kinds") {
  const DeploymentSpace space({{"x1", {1, 3.5}}, {"x2", {1, 2}}});

  SUBCASE("echo returns the substituted value") {
    CommandDeployer dep(space, "echo {x1}", 10.0);
    const auto r = dep.evaluate({3.5, 2.0});
    REQUIRE(r.ok());
    CHECK(*r.value == doctest::Approx(3.5));
  }
  SUBCASE("non-zero exit is process-failed") {
    CommandDeployer dep(space, "false", 10.0);
    const auto r = dep.evaluate({1.0, 1.0});
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->kind == DeployFailure::Kind::kProcessFailed);
  }
  SUBCASE("unparsable output is parse-failed") {
    CommandDeployer dep(space, "echo not-a-number", 10.0);
    const auto r = dep.evaluate({1.0, 1.0});
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->kind == DeployFailure::Kind::kParseFailed);
  }
  SUBCASE("slow commands time out") {
    CommandDeployer dep(space, "sleep 5", 0.2);
    const auto r = dep.evaluate({1.0, 1.0});
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->kind == DeployFailure::Kind::kTimeout);
  }
  SUBCASE("unknown placeholder rejected at construction") {
    CHECK_THROWS_AS(CommandDeployer(space, "echo {bogus}", 1.0), std::invalid_argument);
  }
}

TEST_CASE("complexity_r2 endpoints") {
  const DeploymentSpace space = testing::make_grid(2, 60);
  SyntheticDeployer lin(space, SyntheticFunction::generate(SyntheticKind::kLin, 2, 1));
  CHECK(complexity_r2(space, lin) == doctest::Approx(1.0));
  SyntheticDeployer gauss(space, SyntheticFunction::generate(SyntheticKind::kGauss, 2, 1));
  CHECK(complexity_r2(space, gauss) < 0.2);
  SyntheticDeployer poly(space, SyntheticFunction::generate(SyntheticKind::kPoly, 2, 1));
  CHECK(complexity_r2(space, poly) >= 0.85);
}

TEST_CASE("plane-bump deployer geometry") {
  const DeploymentSpace space = testing::make_grid(2, 50);
  PlaneBumpDeployer dep(space, 42);
  const auto box = dep.bump_box_raw();
  REQUIRE(box.size() == 2);
  // the bump peak dominates the plane at the center of the box
  Point center(2), corner{1.0, 1.0};
  for (int i = 0; i < 2; ++i) center[i] = 0.5 * (box[i].first + box[i].second);
  CHECK(*dep.evaluate(center).value > *dep.evaluate(corner).value + 1.0);
  // 3-sigma box sits inside the grid
  for (int i = 0; i < 2; ++i) {
    CHECK(box[i].first >= 1.0);
    CHECK(box[i].second <= 50.0);
  }
}
