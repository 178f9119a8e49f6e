#include "dta/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dta {

namespace {

void partition_by(const Hyperplane& plane, const std::vector<LabeledSample>& samples,
                  std::vector<LabeledSample>& below, std::vector<LabeledSample>& above) {
  below.clear();
  above.clear();
  for (const LabeledSample& s : samples) {
    if (plane.below_or_on(s.input))
      below.push_back(s);
    else
      above.push_back(s);
  }
}

struct DataExtent {
  std::vector<double> lo, hi;
};

DataExtent extent_of(const std::vector<LabeledSample>& samples) {
  const std::size_t n = samples[0].input.size();
  DataExtent e{samples[0].input, samples[0].input};
  for (const LabeledSample& s : samples) {
    for (std::size_t i = 0; i < n; ++i) {
      e.lo[i] = std::min(e.lo[i], s.input[i]);
      e.hi[i] = std::max(e.hi[i], s.input[i]);
    }
  }
  return e;
}

// Axis-parallel scan. Keeps planes on the 1/range coefficient scale so the
// SA walk that starts from them perturbs coefficients proportionally to
// their own magnitude.
std::optional<SplitResult> axis_scan(const std::vector<LabeledSample>& samples,
                                     std::size_t min_side, const SplitScoreFn& score_fn) {
  const std::size_t n = samples[0].input.size();
  std::optional<SplitResult> best;
  std::vector<double> values;
  std::vector<LabeledSample> below, above;
  for (std::size_t d = 0; d < n; ++d) {
    values.clear();
    for (const LabeledSample& s : samples) values.push_back(s.input[d]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.size() < 2) continue;
    const double range = values.back() - values.front();
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double threshold = 0.5 * (values[i] + values[i + 1]);
      Hyperplane plane;
      plane.coeffs.assign(n, 0.0);
      plane.coeffs[d] = 1.0 / range;
      plane.offset = -threshold / range;
      partition_by(plane, samples, below, above);
      if (below.size() < min_side || above.size() < min_side) continue;
      const double score = score_fn(below, above);
      if (!best || score < best->score) best = SplitResult{plane, score};
    }
  }
  return best;
}

}  // namespace

double split_score(const std::vector<LabeledSample>& left,
                   const std::vector<LabeledSample>& right) {
  if (left.empty() || right.empty())
    throw std::invalid_argument("split_score: both sides must be non-empty");
  const auto side_r2 = [](const std::vector<LabeledSample>& side) {
    if (side.size() == 1) return 1.0;  // one point fits any line exactly
    return r_squared(fit_ols(side), side);
  };
  const double n1 = static_cast<double>(left.size());
  const double n2 = static_cast<double>(right.size());
  return -(n1 * side_r2(left) + n2 * side_r2(right)) / (n1 + n2);
}

Hyperplane perturb(const Hyperplane& v, double temp, const NeighborhoodScale& scale, Rng& rng) {
  if (temp <= 0.0) throw std::invalid_argument("perturb: temperature must be positive");
  Hyperplane out = v;
  while (true) {
    for (std::size_t i = 0; i < v.coeffs.size(); ++i)
      out.coeffs[i] = v.coeffs[i] + temp * scale.coeff[i] * rng.gaussian();
    out.offset = v.offset + temp * scale.offset * rng.gaussian();
    for (double c : out.coeffs)
      if (c != 0.0) return out;
  }
}

bool accept(double current_score, double candidate_score, double temp, Rng& rng) {
  if (temp <= 0.0) throw std::invalid_argument("accept: temperature must be positive");
  if (candidate_score <= current_score) return true;
  const double p = std::exp(-(candidate_score - current_score) / temp);
  return rng.uniform01() < p;
}

std::optional<SplitResult> best_axis_split(const std::vector<LabeledSample>& samples,
                                           std::size_t min_side, const SplitScoreFn& score_fn) {
  if (samples.empty()) throw std::invalid_argument("best_axis_split: empty sample list");
  auto best = axis_scan(samples, std::max<std::size_t>(min_side, 1), score_fn);
  if (best) best->plane.normalize();
  return best;
}

std::optional<SplitResult> sa_split(const std::vector<LabeledSample>& samples,
                                    const AnnealSchedule& sched, Rng& rng, std::size_t min_side,
                                    const SplitScoreFn& score_fn) {
  if (samples.empty()) throw std::invalid_argument("sa_split: empty sample list");
  min_side = std::max<std::size_t>(min_side, 1);
  const std::size_t n = samples[0].input.size();

  auto seed = axis_scan(samples, min_side, score_fn);
  if (!seed) return std::nullopt;

  const DataExtent extent = extent_of(samples);
  NeighborhoodScale scale;
  scale.coeff.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < sched.neighborhood_scale.size() && sched.neighborhood_scale[i] > 0.0) {
      scale.coeff[i] = sched.neighborhood_scale[i];
    } else {
      const double range = extent.hi[i] - extent.lo[i];
      scale.coeff[i] = range > 0.0 ? 1.0 / range : 1.0;
    }
  }
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    off += scale.coeff[i] * std::max(std::abs(extent.lo[i]), std::abs(extent.hi[i]));
  scale.offset = off > 0.0 ? off / static_cast<double>(n) : 1.0;

  Hyperplane current = seed->plane;
  double current_score = seed->score;
  SplitResult incumbent = *seed;

  std::vector<LabeledSample> below, above;
  double temp = sched.initial_temp;
  for (int iter = 0; iter < sched.max_iters; ++iter, temp *= sched.cooling_rate) {
    const Hyperplane candidate = perturb(current, temp, scale, rng);
    partition_by(candidate, samples, below, above);
    if (below.size() < min_side || above.size() < min_side) continue;
    const double score = score_fn(below, above);
    if (score < incumbent.score) incumbent = SplitResult{candidate, score};
    if (accept(current_score, score, temp, rng)) {
      current = candidate;
      current_score = score;
    }
  }

  incumbent.plane.normalize();
  return incumbent;
}

}  // namespace dta
