#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dta/obtree.hpp"
#include "dta/rng.hpp"
#include "dta/space.hpp"

namespace dta {

/// Leaf-score weights: error drives exploitation, size drives exploration,
/// cost (optional) penalizes expensive configurations.
struct Weights {
  double w_error = 1.0;
  double w_size = 0.5;
  double w_cost = 0.0;
};

/// Built-in deployment cost models: product of named dimensions, sum of
/// named dimensions, or a single dimension.
struct CostModel {
  enum class Kind { kProduct, kSum, kSingle };
  Kind kind = Kind::kProduct;
  std::vector<std::size_t> dim_indices;

  double point_cost(const Point& p) const;

  static CostModel from_json(const DeploymentSpace& space, const nlohmann::json& j);
  nlohmann::json to_json(const DeploymentSpace& space) const;
};

/// Set of grid points already consumed (sampled or permanently failed),
/// keyed by grid rank.
class SampledSet {
 public:
  bool contains(std::uint64_t rank) const { return ranks_.count(rank) != 0; }
  void insert(std::uint64_t rank) { ranks_.insert(rank); }
  std::size_t size() const { return ranks_.size(); }

 private:
  std::unordered_set<std::uint64_t> ranks_;
};

struct LeafScore {
  int leaf_id = 0;
  double error = 0.0;        // cv error, sentinel leaves resolved to maxError
  std::uint64_t size = 0;    // unsampled grid points inside the leaf
  double cost = 0.0;         // mean point cost over unsampled points
  double score = 0.0;
  std::uint64_t allocation = 0;
};

/// Scores every leaf: normalized error and unsampled-size terms (plus the
/// negated normalized cost term when a cost model is given), floored at 0.
/// Requires fit_leaf_models to have run on the tree.
std::vector<LeafScore> score_leaves(const ObliqueTree& tree, const DeploymentSpace& space,
                                    const Weights& weights, const CostModel* cost,
                                    const SampledSet& sampled);

/// Distributes the per-iteration budget proportionally to scores with
/// ceiling rounding, processing leaves in descending score order under a
/// running cap so that the total equals min(b, total unsampled). Per-leaf
/// allocations are capped by the leaf's unsampled count; surplus budget is
/// re-offered in descending score order. All-zero scores fall back to
/// round-robin. Throws std::invalid_argument when b is 0.
void allocate(std::vector<LeafScore>& scores, std::uint64_t b);

/// k distinct unsampled grid points inside the region, uniform without
/// replacement, deterministic given the rng state. Throws when k exceeds
/// the available points.
std::vector<Point> draw(const DeploymentSpace& space, const Region& region, std::uint64_t k,
                        const SampledSet& sampled, Rng& rng);

}  // namespace dta
