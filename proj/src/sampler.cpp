#include "dta/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dta {

double CostModel::point_cost(const Point& p) const {
  double acc = kind == Kind::kProduct ? 1.0 : 0.0;
  for (std::size_t i : dim_indices) {
    if (kind == Kind::kProduct)
      acc *= p[i];
    else
      acc += p[i];
  }
  if (kind == Kind::kSingle) acc = p[dim_indices.at(0)];
  if (!(acc >= 0.0) || !std::isfinite(acc))
    throw std::domain_error("CostModel: cost must be finite and non-negative");
  return acc;
}

CostModel CostModel::from_json(const DeploymentSpace& space, const nlohmann::json& j) {
  CostModel m;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "product")
    m.kind = Kind::kProduct;
  else if (kind == "sum")
    m.kind = Kind::kSum;
  else if (kind == "single")
    m.kind = Kind::kSingle;
  else
    throw std::invalid_argument("cost model: unknown kind '" + kind + "'");
  for (const auto& name : j.at("dims").get<std::vector<std::string>>()) {
    const auto idx = space.dim_index(name);
    if (!idx) throw std::invalid_argument("cost model: unknown dimension '" + name + "'");
    m.dim_indices.push_back(*idx);
  }
  if (m.dim_indices.empty()) throw std::invalid_argument("cost model: needs at least one dimension");
  if (m.kind == Kind::kSingle && m.dim_indices.size() != 1)
    throw std::invalid_argument("cost model: kind 'single' takes exactly one dimension");
  return m;
}

nlohmann::json CostModel::to_json(const DeploymentSpace& space) const {
  const char* k = kind == Kind::kProduct ? "product" : kind == Kind::kSum ? "sum" : "single";
  std::vector<std::string> names;
  for (std::size_t i : dim_indices) names.push_back(space.dim(i).name);
  return {{"kind", k}, {"dims", names}};
}

std::vector<LeafScore> score_leaves(const ObliqueTree& tree, const DeploymentSpace& space,
                                    const Weights& weights, const CostModel* cost,
                                    const SampledSet& sampled) {
  struct Accum {
    const FitReport* fit = nullptr;
    std::uint64_t size = 0;
    double cost_sum = 0.0;
  };
  std::map<int, Accum> by_leaf;
  tree.for_each_leaf([&](const ObliqueTree::LeafNode& leaf) {
    if (!leaf.fit) throw std::logic_error("score_leaves: leaf models not fitted");
    by_leaf[leaf.id].fit = &*leaf.fit;
  });

  // One routing pass over the grid gathers unsampled sizes and cost sums.
  space.for_each_point([&](const Point& p, std::uint64_t rank) {
    if (sampled.contains(rank)) return;
    Accum& acc = by_leaf.at(tree.leaf_for(p).id);
    ++acc.size;
    if (cost) acc.cost_sum += cost->point_cost(p);
  });

  double max_error = 0.0, max_cost = 0.0;
  std::uint64_t max_size = 0;
  for (const auto& [id, acc] : by_leaf) {
    if (acc.fit->cv_error) max_error = std::max(max_error, *acc.fit->cv_error);
    max_size = std::max(max_size, acc.size);
    if (cost && acc.size > 0) max_cost = std::max(max_cost, acc.cost_sum / acc.size);
  }

  const double err_norm = max_error > 0.0 ? max_error : 1.0;
  const double size_norm = max_size > 0 ? static_cast<double>(max_size) : 1.0;
  const double cost_norm = max_cost > 0.0 ? max_cost : 1.0;

  std::vector<LeafScore> out;
  for (const auto& [id, acc] : by_leaf) {
    LeafScore row;
    row.leaf_id = id;
    row.error = acc.fit->cv_error ? *acc.fit->cv_error : max_error;
    row.size = acc.size;
    row.cost = (cost && acc.size > 0) ? acc.cost_sum / acc.size : 0.0;
    double score = weights.w_error * (row.error / err_norm) +
                   weights.w_size * (static_cast<double>(row.size) / size_norm);
    if (cost) score -= weights.w_cost * (row.cost / cost_norm);
    row.score = std::max(0.0, score);
    out.push_back(row);
  }
  return out;
}

namespace {

// score/sum * b with FP noise snapped away so exact integer shares stay
// exact before the ceiling.
std::uint64_t ceil_share(double score, double sum, std::uint64_t b) {
  const double q = score / sum * static_cast<double>(b);
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q)))
    return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::ceil(q));
}

}  // namespace

void allocate(std::vector<LeafScore>& scores, std::uint64_t b) {
  if (b == 0) throw std::invalid_argument("allocate: budget must be positive");
  for (LeafScore& s : scores) s.allocation = 0;

  std::vector<LeafScore*> order;
  for (LeafScore& s : scores) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const LeafScore* a, const LeafScore* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->leaf_id < b->leaf_id;
  });

  std::uint64_t capacity = 0;
  double sum_scores = 0.0;
  for (const LeafScore* s : order) {
    capacity += s->size;
    sum_scores += s->score;
  }
  std::uint64_t remaining = std::min(b, capacity);

  if (sum_scores <= 0.0) {
    // Uniform round-robin in leaf-id order.
    std::vector<LeafScore*> by_id = order;
    std::sort(by_id.begin(), by_id.end(),
              [](const LeafScore* a, const LeafScore* b) { return a->leaf_id < b->leaf_id; });
    while (remaining > 0) {
      for (LeafScore* s : by_id) {
        if (remaining == 0) break;
        if (s->allocation < s->size) {
          ++s->allocation;
          --remaining;
        }
      }
    }
    return;
  }

  for (LeafScore* s : order) {
    if (remaining == 0) break;
    const std::uint64_t raw = ceil_share(s->score, sum_scores, b);
    const std::uint64_t take = std::min({raw, remaining, s->size});
    s->allocation = take;
    remaining -= take;
  }
  // Capacity caps can strand budget; re-offer it in descending score order.
  for (LeafScore* s : order) {
    if (remaining == 0) break;
    const std::uint64_t spare = s->size - s->allocation;
    const std::uint64_t take = std::min(spare, remaining);
    s->allocation += take;
    remaining -= take;
  }
}

std::vector<Point> draw(const DeploymentSpace& space, const Region& region, std::uint64_t k,
                        const SampledSet& sampled, Rng& rng) {
  if (k == 0) return {};
  std::vector<std::uint64_t> available;
  space.for_each_point([&](const Point& p, std::uint64_t rank) {
    if (!sampled.contains(rank) && region.contains(p)) available.push_back(rank);
  });
  if (k > available.size())
    throw std::invalid_argument("draw: k exceeds unsampled points in region");

  std::vector<Point> out;
  out.reserve(k);
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + rng.below(available.size() - i);
    std::swap(available[i], available[j]);
    out.push_back(space.point_at(available[i]));
  }
  return out;
}

}  // namespace dta
