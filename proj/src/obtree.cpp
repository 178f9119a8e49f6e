#include "dta/obtree.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace dta {

double variance_reduction_score(const std::vector<LabeledSample>& left,
                                const std::vector<LabeledSample>& right) {
  if (left.empty() || right.empty())
    throw std::invalid_argument("variance_reduction_score: both sides must be non-empty");
  std::vector<double> yl, yr, yp;
  yl.reserve(left.size());
  yr.reserve(right.size());
  yp.reserve(left.size() + right.size());
  for (const LabeledSample& s : left) {
    yl.push_back(s.output);
    yp.push_back(s.output);
  }
  for (const LabeledSample& s : right) {
    yr.push_back(s.output);
    yp.push_back(s.output);
  }
  const double n1 = static_cast<double>(left.size());
  const double n2 = static_cast<double>(right.size());
  const double weighted =
      (n1 * population_variance(yl) + n2 * population_variance(yr)) / (n1 + n2);
  return -(population_variance(yp) - weighted);
}

namespace {

using TreeNode = ObliqueTree::TreeNode;
using LeafNode = ObliqueTree::LeafNode;
using TestNode = ObliqueTree::TestNode;

std::unique_ptr<TreeNode> clone_node(const TreeNode& src) {
  auto out = std::make_unique<TreeNode>();
  if (const auto* test = std::get_if<TestNode>(&src.node)) {
    TestNode copy;
    copy.plane = test->plane;
    copy.below = clone_node(*test->below);
    copy.above = clone_node(*test->above);
    out->node = std::move(copy);
  } else {
    out->node = std::get<LeafNode>(src.node);
  }
  return out;
}

void collect_samples(const TreeNode& node, std::vector<LabeledSample>& out) {
  if (const auto* test = std::get_if<TestNode>(&node.node)) {
    collect_samples(*test->below, out);
    collect_samples(*test->above, out);
  } else {
    const auto& leaf = std::get<LeafNode>(node.node);
    out.insert(out.end(), leaf.samples.begin(), leaf.samples.end());
  }
}

std::size_t auto_min_leaf(const TreeConfig& cfg, std::size_t n_dims) {
  return cfg.min_leaf_samples > 0 ? cfg.min_leaf_samples : n_dims + 2;
}

SplitScoreFn scorer_for(const TreeConfig& cfg) {
  if (cfg.scorer == SplitScorerKind::kVarianceReduction)
    return [](const auto& a, const auto& b) { return variance_reduction_score(a, b); };
  return [](const auto& a, const auto& b) { return split_score(a, b); };
}

// Score the leaf would keep if left unsplit, on the scale of the configured
// scorer, minus the required gain. Returns nullopt when the leaf cannot be
// improved (already perfect / zero variance).
std::optional<double> split_threshold(const TreeConfig& cfg, const LeafNode& leaf) {
  if (cfg.scorer == SplitScorerKind::kVarianceReduction) {
    std::vector<double> y;
    y.reserve(leaf.samples.size());
    for (const LabeledSample& s : leaf.samples) y.push_back(s.output);
    const double var = population_variance(y);
    if (var <= 0.0) return std::nullopt;
    return -cfg.min_split_gain * var;
  }
  const double leaf_r2 = r_squared(fit_ols(leaf.samples), leaf.samples);
  return -leaf_r2 - cfg.min_split_gain;
}

// Expands eligible leaves in place. When `only` is given, leaves with ids
// outside it are skipped; because per-leaf RNG streams depend only on
// (seed, leaf id), a skipped leaf would have reproduced its previous search
// verbatim, so the result is identical to the unfiltered pass.
bool expand_in_place(std::unique_ptr<TreeNode>& node, const TreeConfig& cfg,
                     const AnnealSchedule& sched, std::uint64_t seed,
                     const std::unordered_set<int>* only, int& next_leaf_id,
                     std::vector<int>* created) {
  if (auto* test = std::get_if<TestNode>(&node->node)) {
    const bool a = expand_in_place(test->below, cfg, sched, seed, only, next_leaf_id, created);
    const bool b = expand_in_place(test->above, cfg, sched, seed, only, next_leaf_id, created);
    return a || b;
  }

  auto& leaf = std::get<LeafNode>(node->node);
  if (only && only->find(leaf.id) == only->end()) return false;
  if (leaf.samples.empty()) return false;
  const std::size_t min_leaf = auto_min_leaf(cfg, leaf.samples[0].input.size());
  if (leaf.samples.size() < 2 * min_leaf) return false;

  const auto threshold = split_threshold(cfg, leaf);
  if (!threshold) return false;

  const SplitScoreFn score_fn = scorer_for(cfg);
  std::optional<SplitResult> result;
  if (cfg.mode == TreeMode::kFlat) {
    result = best_axis_split(leaf.samples, min_leaf, score_fn);
  } else {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(leaf.id)));
    result = sa_split(leaf.samples, sched, rng, min_leaf, score_fn);
  }
  if (!result || result->score > *threshold) return false;

  LeafNode below, above;
  below.region = leaf.region.refined(result->plane, true);
  above.region = leaf.region.refined(result->plane, false);
  below.id = next_leaf_id++;
  above.id = next_leaf_id++;
  for (LabeledSample& s : leaf.samples) {
    if (result->plane.below_or_on(s.input))
      below.samples.push_back(std::move(s));
    else
      above.samples.push_back(std::move(s));
  }
  if (created) {
    created->push_back(below.id);
    created->push_back(above.id);
  }

  TestNode test;
  test.plane = result->plane;
  test.below = std::make_unique<TreeNode>(TreeNode{std::move(below)});
  test.above = std::make_unique<TreeNode>(TreeNode{std::move(above)});
  node->node = std::move(test);
  return true;
}

void fit_node(TreeNode& node, int folds, std::uint64_t seed,
              const std::vector<LabeledSample>* pooled) {
  if (auto* test = std::get_if<TestNode>(&node.node)) {
    std::vector<LabeledSample> subtree;
    collect_samples(node, subtree);
    fit_node(*test->below, folds, seed, &subtree);
    fit_node(*test->above, folds, seed, &subtree);
    return;
  }
  auto& leaf = std::get<LeafNode>(node.node);
  FitReport report;
  if (!leaf.samples.empty()) {
    report.model = fit_ols(leaf.samples);
    report.r_squared = r_squared(report.model, leaf.samples);
    if (leaf.samples.size() >= 2)
      report.cv_error = cv_error(leaf.samples, folds,
                                 Rng::mix(seed, static_cast<std::uint64_t>(leaf.id)));
  } else if (pooled && !pooled->empty()) {
    report.model = fit_ols(*pooled);
    report.r_squared = 0.0;
  } else {
    leaf.fit.reset();
    return;
  }
  leaf.fit = std::move(report);
}

nlohmann::json node_to_json(const TreeNode& node, const DeploymentSpace* space) {
  if (const auto* test = std::get_if<TestNode>(&node.node)) {
    return {{"type", "test"},
            {"coeffs", test->plane.coeffs},
            {"offset", test->plane.offset},
            {"below", node_to_json(*test->below, space)},
            {"above", node_to_json(*test->above, space)}};
  }
  const auto& leaf = std::get<LeafNode>(node.node);
  nlohmann::json j{{"type", "leaf"}, {"id", leaf.id}, {"sample_count", leaf.samples.size()}};
  if (space) j["grid_count"] = region_grid_count(*space, leaf.region);
  if (leaf.fit) {
    j["model"] = {{"coeffs", leaf.fit->model.coeffs}, {"intercept", leaf.fit->model.intercept}};
    j["r_squared"] = leaf.fit->r_squared;
    if (leaf.fit->cv_error)
      j["cv_error"] = *leaf.fit->cv_error;
    else
      j["cv_error"] = nullptr;
  }
  return j;
}

std::unique_ptr<TreeNode> node_from_json(const nlohmann::json& j, const Region& region,
                                         int& max_id) {
  auto out = std::make_unique<TreeNode>();
  const std::string type = j.at("type").get<std::string>();
  if (type == "test") {
    TestNode test;
    test.plane.coeffs = j.at("coeffs").get<std::vector<double>>();
    test.plane.offset = j.at("offset").get<double>();
    test.below = node_from_json(j.at("below"), region.refined(test.plane, true), max_id);
    test.above = node_from_json(j.at("above"), region.refined(test.plane, false), max_id);
    out->node = std::move(test);
    return out;
  }
  if (type != "leaf") throw std::invalid_argument("tree json: unknown node type '" + type + "'");
  LeafNode leaf;
  leaf.id = j.at("id").get<int>();
  leaf.region = region;
  max_id = std::max(max_id, leaf.id);
  if (j.contains("model")) {
    FitReport fit;
    fit.model.coeffs = j.at("model").at("coeffs").get<std::vector<double>>();
    fit.model.intercept = j.at("model").at("intercept").get<double>();
    fit.r_squared = j.value("r_squared", 0.0);
    if (j.contains("cv_error") && !j.at("cv_error").is_null())
      fit.cv_error = j.at("cv_error").get<double>();
    leaf.fit = std::move(fit);
  }
  out->node = std::move(leaf);
  return out;
}

}  // namespace

ObliqueTree ObliqueTree::single_root(std::vector<LabeledSample> samples) {
  ObliqueTree tree;
  LeafNode root;
  root.samples = std::move(samples);
  root.id = 0;
  tree.next_leaf_id_ = 1;
  tree.root_ = std::make_unique<TreeNode>(TreeNode{std::move(root)});
  return tree;
}

ObliqueTree::ObliqueTree(const ObliqueTree& other)
    : root_(other.root_ ? clone_node(*other.root_) : nullptr),
      next_leaf_id_(other.next_leaf_id_) {}

ObliqueTree& ObliqueTree::operator=(const ObliqueTree& other) {
  if (this != &other) {
    root_ = other.root_ ? clone_node(*other.root_) : nullptr;
    next_leaf_id_ = other.next_leaf_id_;
  }
  return *this;
}

std::size_t ObliqueTree::leaf_count() const {
  std::size_t count = 0;
  for_each_leaf([&](const LeafNode&) { ++count; });
  return count;
}

const ObliqueTree::LeafNode& ObliqueTree::leaf_for(const Point& p) const {
  const TreeNode* node = root_.get();
  while (const auto* test = std::get_if<TestNode>(&node->node))
    node = test->plane.below_or_on(p) ? test->below.get() : test->above.get();
  return std::get<LeafNode>(node->node);
}

double ObliqueTree::predict(const Point& p) const {
  const LeafNode& leaf = leaf_for(p);
  if (!leaf.fit) throw std::logic_error("ObliqueTree::predict: leaf models not fitted");
  return leaf.fit->model.predict(p);
}

void ObliqueTree::insert_sample(const LabeledSample& s) {
  TreeNode* node = root_.get();
  while (auto* test = std::get_if<TestNode>(&node->node))
    node = test->plane.below_or_on(s.input) ? test->below.get() : test->above.get();
  std::get<LeafNode>(node->node).samples.push_back(s);
}

std::vector<LabeledSample> ObliqueTree::all_samples() const {
  std::vector<LabeledSample> out;
  collect_samples(*root_, out);
  return out;
}

nlohmann::json ObliqueTree::to_json(const DeploymentSpace* space) const {
  return node_to_json(*root_, space);
}

ObliqueTree ObliqueTree::from_json(const nlohmann::json& j) {
  ObliqueTree tree;
  int max_id = -1;
  tree.root_ = node_from_json(j, Region{}, max_id);
  tree.next_leaf_id_ = max_id + 1;
  return tree;
}

ObliqueTree expand_tree(const ObliqueTree& tree, const TreeConfig& cfg,
                        const AnnealSchedule& sched, std::uint64_t seed) {
  ObliqueTree out = tree;
  const std::size_t before = out.all_samples().size();
  expand_in_place(out.root_, cfg, sched, seed, nullptr, out.next_leaf_id_, nullptr);
  if (out.all_samples().size() != before)
    throw std::logic_error("expand_tree: sample conservation violated");
  return out;
}

ObliqueTree rebuild_from_scratch(std::vector<LabeledSample> samples, const TreeConfig& cfg,
                                 const AnnealSchedule& sched, std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("rebuild_from_scratch: empty sample list");
  ObliqueTree tree = ObliqueTree::single_root(std::move(samples));

  // Fixpoint loop over the frontier of newly created leaves. Leaves that
  // declined to split once would decline again (same stream, same samples).
  std::unordered_set<int> frontier{0};
  while (!frontier.empty()) {
    std::vector<int> created;
    expand_in_place(tree.root_, cfg, sched, seed, &frontier, tree.next_leaf_id_, &created);
    frontier.clear();
    frontier.insert(created.begin(), created.end());
  }
  return tree;
}

void fit_leaf_models(ObliqueTree& tree, int folds, std::uint64_t seed) {
  fit_node(*tree.root_, folds, seed, nullptr);
}

}  // namespace dta
