#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dta/anneal.hpp"
#include "dta/linmodel.hpp"
#include "dta/space.hpp"

namespace dta {

enum class TreeMode { kOblique, kFlat };
enum class SplitScorerKind { kRegression, kVarianceReduction };

struct TreeConfig {
  TreeMode mode = TreeMode::kOblique;
  SplitScorerKind scorer = SplitScorerKind::kRegression;
  std::size_t min_leaf_samples = 0;  // 0 = automatic: n + 2
  double min_split_gain = 0.01;      // on the split-score scale
};

/// Negated variance reduction of a candidate split, so that lower is better
/// like split_score:  -( Var(parent) - (|L1| Var(L1) + |L2| Var(L2)) / N ).
/// Population (divide-by-N) variances throughout.
double variance_reduction_score(const std::vector<LabeledSample>& left,
                                const std::vector<LabeledSample>& right);

/// Regression tree with oblique (multivariate hyperplane) test nodes and
/// linear models at the leaves. Value semantics: copying deep-copies, and
/// the expansion operations below return new trees.
class ObliqueTree {
 public:
  struct TreeNode;

  struct LeafNode {
    std::vector<LabeledSample> samples;
    std::optional<FitReport> fit;
    Region region;
    int id = 0;
  };

  struct TestNode {
    Hyperplane plane;
    std::unique_ptr<TreeNode> below;
    std::unique_ptr<TreeNode> above;
  };

  struct TreeNode {
    std::variant<TestNode, LeafNode> node;
  };

  /// Single leaf covering the whole space, holding the given samples.
  static ObliqueTree single_root(std::vector<LabeledSample> samples);

  ObliqueTree(const ObliqueTree& other);
  ObliqueTree& operator=(const ObliqueTree& other);
  ObliqueTree(ObliqueTree&&) noexcept = default;
  ObliqueTree& operator=(ObliqueTree&&) noexcept = default;

  std::size_t leaf_count() const;

  template <typename F>
  void for_each_leaf(F&& fn) const {
    walk_leaves(root_.get(), fn);
  }

  /// Routes a point by hyperplane signs (on-boundary goes below).
  const LeafNode& leaf_for(const Point& p) const;

  /// Prediction of the leaf model the point routes to. Requires
  /// fit_leaf_models (or deserialization) to have populated the models.
  double predict(const Point& p) const;

  /// Adds a sample to the leaf whose region contains it.
  void insert_sample(const LabeledSample& s);

  std::vector<LabeledSample> all_samples() const;

  nlohmann::json to_json(const DeploymentSpace* space = nullptr) const;
  static ObliqueTree from_json(const nlohmann::json& j);

 private:
  ObliqueTree() = default;

  template <typename F>
  static void walk_leaves(const TreeNode* node, F&& fn) {
    if (const auto* test = std::get_if<TestNode>(&node->node)) {
      walk_leaves(test->below.get(), fn);
      walk_leaves(test->above.get(), fn);
    } else {
      fn(std::get<LeafNode>(node->node));
    }
  }

  std::unique_ptr<TreeNode> root_;
  int next_leaf_id_ = 0;

  friend ObliqueTree expand_tree(const ObliqueTree&, const TreeConfig&, const AnnealSchedule&,
                                 std::uint64_t);
  friend ObliqueTree rebuild_from_scratch(std::vector<LabeledSample>, const TreeConfig&,
                                          const AnnealSchedule&, std::uint64_t);
  friend void fit_leaf_models(ObliqueTree&, int, std::uint64_t);
  friend struct TreeOps;
};

/// One expansion pass (every eligible leaf is considered once). A leaf with
/// at least 2 * min_leaf_samples samples runs the configured split search;
/// it is replaced by a test node only when the best split improves on the
/// unsplit leaf's own score by at least min_split_gain. Per-leaf searches
/// draw from independent RNG streams derived from (seed, leaf id).
ObliqueTree expand_tree(const ObliqueTree& tree, const TreeConfig& cfg,
                        const AnnealSchedule& sched, std::uint64_t seed);

/// Builds a tree from a single root by repeated expansion until no leaf
/// changes. Deterministic given the seed.
ObliqueTree rebuild_from_scratch(std::vector<LabeledSample> samples, const TreeConfig& cfg,
                                 const AnnealSchedule& sched, std::uint64_t seed);

/// Fits a model on every leaf: OLS coefficients, training R-squared and
/// k-fold CV error. Leaves with fewer than 2 samples get an empty cv_error
/// (max-uncertainty sentinel); empty leaves borrow the pooled model of the
/// nearest ancestor.
void fit_leaf_models(ObliqueTree& tree, int folds, std::uint64_t seed);

}  // namespace dta
