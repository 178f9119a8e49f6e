#include "dta/linmodel.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "dta/rng.hpp"

namespace dta {

double LinearModel::predict(const Point& p) const {
  if (p.size() != coeffs.size())
    throw std::invalid_argument("LinearModel::predict: dimension mismatch");
  double acc = intercept;
  for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * p[i];
  return acc;
}

double stable_sum(std::span<const double> values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

LinearModel fit_ols(const std::vector<LabeledSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("fit_ols: empty sample list");
  const std::size_t n = samples[0].input.size();
  const std::size_t m = samples.size();

  Eigen::VectorXd mean_x = Eigen::VectorXd::Zero(n);
  double mean_y = 0.0;
  for (const LabeledSample& s : samples) {
    for (std::size_t i = 0; i < n; ++i) mean_x[i] += s.input[i];
    mean_y += s.output;
  }
  mean_x /= static_cast<double>(m);
  mean_y /= static_cast<double>(m);

  // Centered normal equations: S beta = c with S the scatter matrix. The
  // pseudo-inverse through the eigendecomposition gives the minimum-norm
  // slope vector when S is singular.
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd cross = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd dx(n);
  for (const LabeledSample& s : samples) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = s.input[i] - mean_x[i];
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(dx, 1.0);
    cross += dx * (s.output - mean_y);
  }
  scatter = scatter.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lmax = lambda.size() > 0 ? std::max(0.0, lambda[lambda.size() - 1]) : 0.0;
  const double tol = lmax * static_cast<double>(n) * 1e-12;
  Eigen::VectorXd inv_lambda(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    inv_lambda[i] = lambda[i] > tol ? 1.0 / lambda[i] : 0.0;
  const Eigen::VectorXd beta =
      eig.eigenvectors() * inv_lambda.asDiagonal() * (eig.eigenvectors().transpose() * cross);

  LinearModel model;
  model.coeffs.assign(beta.data(), beta.data() + n);
  model.intercept = mean_y - beta.dot(mean_x);
  return model;
}

double r_squared(const LinearModel& model, const std::vector<LabeledSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("r_squared: empty sample list");
  const std::size_t m = samples.size();
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = samples[i].output;
  const double mean_y = stable_sum(y) / static_cast<double>(m);

  std::vector<double> res2(m), tot2(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = samples[i].output - model.predict(samples[i].input);
    const double t = samples[i].output - mean_y;
    res2[i] = r * r;
    tot2[i] = t * t;
  }
  const double ss_res = stable_sum(res2);
  const double ss_tot = stable_sum(tot2);

  // Constant-target degeneracy: the tolerance absorbs rounding in the mean.
  const double eps = 1e-12 * static_cast<double>(m) * std::max(1.0, mean_y * mean_y);
  if (ss_tot <= eps) return ss_res <= eps ? 1.0 : 0.0;
  const double r2 = 1.0 - ss_res / ss_tot;
  return std::min(1.0, std::max(0.0, r2));
}

double cv_error(const std::vector<LabeledSample>& samples, int folds, std::uint64_t seed) {
  const std::size_t m = samples.size();
  if (m < 2) throw std::invalid_argument("cv_error: insufficient data (need >= 2 samples)");
  const std::size_t k = std::min<std::size_t>(std::max(folds, 2), m);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  // Contiguous blocks of the shuffled order; the first m%k folds get one
  // extra element. Residuals are pooled over all held-out points.
  std::vector<double> sq;
  sq.reserve(m);
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = m / k + (f < m % k ? 1 : 0);
    const std::size_t end = start + size;
    std::vector<LabeledSample> train;
    train.reserve(m - size);
    for (std::size_t i = 0; i < m; ++i)
      if (i < start || i >= end) train.push_back(samples[order[i]]);
    const LinearModel model = fit_ols(train);
    for (std::size_t i = start; i < end; ++i) {
      const LabeledSample& s = samples[order[i]];
      const double r = s.output - model.predict(s.input);
      sq.push_back(r * r);
    }
    start = end;
  }
  return stable_sum(sq) / static_cast<double>(m);
}

double mse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("mse: length mismatch");
  if (predicted.empty()) throw std::invalid_argument("mse: empty input");
  std::vector<double> sq(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    sq[i] = d * d;
  }
  return stable_sum(sq) / static_cast<double>(predicted.size());
}

double mae(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("mae: length mismatch");
  if (predicted.empty()) throw std::invalid_argument("mae: empty input");
  std::vector<double> ab(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) ab[i] = std::abs(predicted[i] - actual[i]);
  return stable_sum(ab) / static_cast<double>(predicted.size());
}

double population_variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mean = stable_sum(values) / static_cast<double>(values.size());
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    sq[i] = d * d;
  }
  return stable_sum(sq) / static_cast<double>(values.size());
}

}  // namespace dta
