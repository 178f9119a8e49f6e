#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dta/space.hpp"

namespace dta {

/// Affine model y = coeffs . x + intercept.
struct LinearModel {
  std::vector<double> coeffs;
  double intercept = 0.0;

  double predict(const Point& p) const;
};

/// A fitted leaf model with its goodness-of-fit numbers. cv_error empty
/// means "max uncertainty" (too few samples to cross-validate); the sampler
/// substitutes the current maximum leaf error for it.
struct FitReport {
  LinearModel model;
  double r_squared = 0.0;
  std::optional<double> cv_error;
};

/// Compensated (Neumaier) summation; keeps error aggregation stable enough
/// for the 1e-9 oracle comparisons.
double stable_sum(std::span<const double> values);

/// Least-squares fit. Rank-deficient systems (fewer samples than n+1,
/// collinear inputs) get the minimum-norm slope solution with the intercept
/// anchored at the means, so a single sample yields zero slopes and
/// intercept equal to its output. Throws std::invalid_argument on empty input.
LinearModel fit_ols(const std::vector<LabeledSample>& samples);

/// Coefficient of determination, clamped to [0,1]. Constant targets give 1
/// when the residuals are zero and 0 otherwise.
double r_squared(const LinearModel& model, const std::vector<LabeledSample>& samples);

/// Mean squared held-out residual over k folds, k = min(folds, |samples|).
/// Fold assignment is a deterministic function of the seed. Throws
/// std::invalid_argument with fewer than 2 samples.
double cv_error(const std::vector<LabeledSample>& samples, int folds, std::uint64_t seed);

double mse(std::span<const double> predicted, std::span<const double> actual);
double mae(std::span<const double> predicted, std::span<const double> actual);

/// Population (divide-by-N) variance.
double population_variance(std::span<const double> values);

}  // namespace dta
