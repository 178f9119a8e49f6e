#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dta/linmodel.hpp"
#include "dta/rng.hpp"
#include "dta/space.hpp"

namespace dta {

/// Simulated annealing schedule. Temperature at step i is
/// initial_temp * cooling_rate^i. neighborhood_scale left empty means
/// "derive per leaf": 1 / (range of dimension i over the leaf's samples).
struct AnnealSchedule {
  int max_iters = 500;
  double initial_temp = 1.0;
  double cooling_rate = 0.99;
  std::vector<double> neighborhood_scale;
};

/// Perturbation scales: per-coefficient plus one for the offset term.
struct NeighborhoodScale {
  std::vector<double> coeff;
  double offset = 1.0;
};

using SplitScoreFn =
    std::function<double(const std::vector<LabeledSample>&, const std::vector<LabeledSample>&)>;

/// Size-weighted negative linear-fit quality of a candidate split:
///   -( |L1| R2_L1 + |L2| R2_L2 ) / ( |L1| + |L2| )
/// in [-1, 0], lower is better. A side with a single sample counts as a
/// perfect fit (R2 = 1). Throws std::invalid_argument if a side is empty.
double split_score(const std::vector<LabeledSample>& left,
                   const std::vector<LabeledSample>& right);

/// Gaussian step: coefficient i moves with stddev temp * scale.coeff[i],
/// the offset with stddev temp * scale.offset. Re-draws on an all-zero
/// coefficient result.
Hyperplane perturb(const Hyperplane& v, double temp, const NeighborhoodScale& scale, Rng& rng);

/// Metropolis rule: always accept non-worse candidates, otherwise accept
/// with probability exp(-(candidate - current) / temp).
bool accept(double current_score, double candidate_score, double temp, Rng& rng);

struct SplitResult {
  Hyperplane plane;  // normalized (unit norm, first nonzero coeff positive)
  double score = 0.0;
};

/// Best axis-parallel split over all (dimension, midpoint-between-adjacent-
/// observed-values) candidates whose sides both hold >= min_side samples.
/// Used to seed the SA walk and as the whole search in flat-tree mode.
std::optional<SplitResult> best_axis_split(const std::vector<LabeledSample>& samples,
                                           std::size_t min_side, const SplitScoreFn& score_fn);

/// Simulated-annealing search for a near-optimal oblique split of the given
/// samples. Returns the best-scoring hyperplane encountered (incumbent
/// tracking is separate from the SA walk); both sides of the returned plane
/// hold >= min_side samples. Returns nullopt when no admissible candidate
/// exists. Throws std::invalid_argument on an empty sample list.
std::optional<SplitResult> sa_split(const std::vector<LabeledSample>& samples,
                                    const AnnealSchedule& sched, Rng& rng,
                                    std::size_t min_side = 1,
                                    const SplitScoreFn& score_fn = split_score);

}  // namespace dta
