#include "doctest.h"

#include <cmath>
#include <numeric>

#include "dta/linmodel.hpp"
#include "dta/rng.hpp"

using namespace dta;

namespace {

// Independent normal-equations oracle: builds [X 1]^T [X 1] b = [X 1]^T y
// and solves it with plain Gauss-Jordan elimination. Valid for the
// full-rank cases it is used on.
LinearModel normal_equations_oracle(const std::vector<LabeledSample>& samples) {
  const std::size_t n = samples[0].input.size();
  const std::size_t d = n + 1;
  std::vector<std::vector<double>> a(d, std::vector<double>(d + 1, 0.0));
  for (const LabeledSample& s : samples) {
    std::vector<double> row(d, 1.0);
    for (std::size_t i = 0; i < n; ++i) row[i] = s.input[i];
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) a[i][j] += row[i] * row[j];
      a[i][d] += row[i] * s.output;
    }
  }
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    const double div = a[col][col];
    for (std::size_t j = col; j <= d; ++j) a[col][j] /= div;
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t j = col; j <= d; ++j) a[r][j] -= f * a[col][j];
    }
  }
  LinearModel m;
  for (std::size_t i = 0; i < n; ++i) m.coeffs.push_back(a[i][d]);
  m.intercept = a[n][d];
  return m;
}

double ss_res(const LinearModel& m, const std::vector<LabeledSample>& samples) {
  double acc = 0.0;
  for (const LabeledSample& s : samples) {
    const double r = s.output - m.predict(s.input);
    acc += r * r;
  }
  return acc;
}

}  // namespace

TEST_CASE("fit recovers y = 0.8 x1 + 0.2 x2") {
  const std::vector<LabeledSample> samples = {
      {{0, 0}, 0.0}, {{1, 0}, 0.8}, {{0, 1}, 0.2}, {{1, 1}, 1.0}};
  const LinearModel m = fit_ols(samples);
  CHECK(m.coeffs[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.coeffs[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(m.intercept == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("single sample gives zero slopes and the output as intercept") {
  const LinearModel m = fit_ols({{{3.0, -7.0}, 4.5}});
  CHECK(m.coeffs[0] == 0.0);
  CHECK(m.coeffs[1] == 0.0);
  CHECK(m.intercept == doctest::Approx(4.5));
  CHECK_THROWS_AS(fit_ols({}), std::invalid_argument);
}

TEST_CASE("identical inputs give the mean as intercept") {
  const LinearModel m = fit_ols({{{2, 2}, 1.0}, {{2, 2}, 3.0}, {{2, 2}, 5.0}});
  CHECK(m.coeffs[0] == doctest::Approx(0.0).scale(1));
  CHECK(m.coeffs[1] == doctest::Approx(0.0).scale(1));
  CHECK(m.intercept == doctest::Approx(3.0));
}

TEST_CASE("fit matches the normal-equations oracle on random POLY data") {
  Rng rng(7);
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 30; ++i) {
    const double x = 4.0 * rng.uniform01() - 2.0;
    const double y = 4.0 * rng.uniform01() - 2.0;
    samples.push_back({{x, y}, 0.9 * x * x + 0.4 * y * y});
  }
  const LinearModel got = fit_ols(samples);
  const LinearModel want = normal_equations_oracle(samples);
  CHECK(got.coeffs[0] == doctest::Approx(want.coeffs[0]).epsilon(1e-9));
  CHECK(got.coeffs[1] == doctest::Approx(want.coeffs[1]).epsilon(1e-9));
  CHECK(got.intercept == doctest::Approx(want.intercept).epsilon(1e-9));
}

TEST_CASE("ols is locally optimal in squared residuals") {
  Rng rng(11);
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 25; ++i) {
    const double x = rng.uniform01() * 10.0;
    const double y = rng.uniform01() * 10.0;
    samples.push_back({{x, y}, 2.0 * x - y + rng.gaussian()});
  }
  const LinearModel m = fit_ols(samples);
  const double base = ss_res(m, samples);
  for (std::size_t i = 0; i < m.coeffs.size(); ++i) {
    for (double delta : {1e-3, -1e-3}) {
      LinearModel p = m;
      p.coeffs[i] += delta;
      CHECK(ss_res(p, samples) >= base - 1e-9);
    }
  }
  LinearModel p = m;
  p.intercept += 1e-3;
  CHECK(ss_res(p, samples) >= base - 1e-9);
}

TEST_CASE("r_squared endpoints") {
  std::vector<LabeledSample> linear;
  for (int i = 0; i < 10; ++i)
    linear.push_back({{double(i), double(2 * i)}, 3.0 * i - 1.0});
  CHECK(r_squared(fit_ols(linear), linear) == doctest::Approx(1.0));

  // constant targets fitted by the intercept
  std::vector<LabeledSample> constant;
  for (int i = 0; i < 6; ++i) constant.push_back({{double(i), 1.0}, 0.1});
  CHECK(r_squared(fit_ols(constant), constant) == doctest::Approx(1.0));
}

TEST_CASE("r_squared of a sharp gaussian bump is near zero") {
  // e^(-g r^2) over a dense symmetric grid is even in every coordinate, so
  // the best linear fit degenerates to the mean.
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      const double x = -2.0 + 4.0 * i / 49.0;
      const double y = -2.0 + 4.0 * j / 49.0;
      samples.push_back({{x, y}, std::exp(-(x * x + y * y))});
    }
  }
  CHECK(r_squared(fit_ols(samples), samples) < 0.2);
}

TEST_CASE("r_squared beats random competitor models on the training set") {
  Rng rng(3);
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 40; ++i) {
    const double x = rng.uniform01() * 5.0;
    const double y = rng.uniform01() * 5.0;
    samples.push_back({{x, y}, x + 0.5 * y * y});
  }
  const LinearModel best = fit_ols(samples);
  const double best_r2 = r_squared(best, samples);
  for (int trial = 0; trial < 50; ++trial) {
    LinearModel other;
    other.coeffs = {best.coeffs[0] + rng.gaussian(), best.coeffs[1] + rng.gaussian()};
    other.intercept = best.intercept + rng.gaussian();
    CHECK(r_squared(other, samples) <= best_r2 + 1e-12);
  }
}

TEST_CASE("cv error is zero for exactly linear data") {
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 10; ++i)
    samples.push_back({{double(i), double(i % 3)}, 2.0 * i + 0.5 * (i % 3) + 1.0});
  CHECK(cv_error(samples, 5, 99) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("cv clamps to leave-one-out and rejects tiny inputs") {
  const std::vector<LabeledSample> two = {{{0.0}, 1.0}, {{1.0}, 3.0}};
  // each fold trains on one point: constant model, squared error (y1-y0)^2
  CHECK(cv_error(two, 10, 1) == doctest::Approx(4.0));
  CHECK_THROWS_AS(cv_error({{{0.0}, 1.0}}, 10, 1), std::invalid_argument);
}

TEST_CASE("cv matches a duplicate implementation of the fold loop") {
  Rng data_rng(21);
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 40; ++i) {
    const double x = data_rng.uniform01();
    const double y = data_rng.uniform01();
    samples.push_back({{x, y}, std::exp(std::abs(3.0 * x - 2.0 * y))});
  }
  const std::uint64_t seed = 1234;
  const int folds = 10;

  // independent re-implementation
  const std::size_t m = samples.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t k = std::min<std::size_t>(folds, m);
  double total = 0.0;
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = m / k + (f < m % k ? 1 : 0);
    std::vector<LabeledSample> train;
    for (std::size_t i = 0; i < m; ++i)
      if (i < start || i >= start + size) train.push_back(samples[order[i]]);
    const LinearModel model = fit_ols(train);
    for (std::size_t i = start; i < start + size; ++i) {
      const double r = samples[order[i]].output - model.predict(samples[order[i]].input);
      total += r * r;
    }
    start += size;
  }
  const double oracle = total / double(m);
  CHECK(cv_error(samples, folds, seed) == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("mse and mae basics") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  CHECK(mse(a, a) == 0.0);
  CHECK(mae(a, a) == 0.0);
  CHECK(mse(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 3.0}) == doctest::Approx(5.0));
  CHECK(mae(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 3.0}) == doctest::Approx(2.0));
  CHECK_THROWS(mse(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}));
  CHECK_THROWS(mse(std::vector<double>{}, std::vector<double>{}));
}

TEST_CASE("mse/mae match a naive loop on random vectors") {
  Rng rng(17);
  std::vector<double> p(100), q(100);
  for (int i = 0; i < 100; ++i) {
    p[i] = rng.gaussian() * 10.0;
    q[i] = rng.gaussian() * 10.0;
  }
  double se = 0.0, ae = 0.0;
  for (int i = 0; i < 100; ++i) {
    se += (p[i] - q[i]) * (p[i] - q[i]);
    ae += std::abs(p[i] - q[i]);
  }
  CHECK(mse(p, q) == doctest::Approx(se / 100.0).epsilon(1e-12));
  CHECK(mae(p, q) == doctest::Approx(ae / 100.0).epsilon(1e-12));
  // Jensen: mae^2 <= mse
  CHECK(mae(p, q) * mae(p, q) <= mse(p, q) + 1e-12);
}
