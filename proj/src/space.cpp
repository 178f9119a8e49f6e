#include "dta/space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dta {

double Hyperplane::eval(const Point& p) const {
  if (p.size() != coeffs.size())
    throw std::invalid_argument("Hyperplane::eval: dimension mismatch");
  double acc = offset;
  for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * p[i];
  return acc;
}

void Hyperplane::normalize() {
  double norm2 = 0.0;
  for (double c : coeffs) norm2 += c * c;
  const double norm = std::sqrt(norm2);
  if (norm <= 0.0) throw std::invalid_argument("Hyperplane::normalize: zero coefficient vector");
  double sign = 1.0;
  for (double c : coeffs) {
    if (c != 0.0) {
      sign = c > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  const double scale = sign / norm;
  for (double& c : coeffs) c *= scale;
  offset *= scale;
}

bool Region::contains(const Point& p) const {
  for (const RegionConstraint& c : constraints) {
    if (c.plane.below_or_on(p) != c.below) return false;
  }
  return true;
}

Region Region::refined(const Hyperplane& plane, bool below) const {
  Region r = *this;
  r.constraints.push_back({plane, below});
  return r;
}

DeploymentSpace::DeploymentSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("DeploymentSpace: needs at least one dimension");
  std::set<std::string> names;
  for (const Dimension& d : dims_) {
    if (d.name.empty()) throw std::invalid_argument("DeploymentSpace: empty dimension name");
    if (!names.insert(d.name).second)
      throw std::invalid_argument("DeploymentSpace: duplicate dimension name '" + d.name + "'");
    if (d.levels.empty())
      throw std::invalid_argument("DeploymentSpace: dimension '" + d.name + "' has no levels");
    for (std::size_t i = 0; i < d.levels.size(); ++i) {
      if (!std::isfinite(d.levels[i]))
        throw std::invalid_argument("DeploymentSpace: non-finite level in '" + d.name + "'");
      if (i > 0 && !(d.levels[i - 1] < d.levels[i]))
        throw std::invalid_argument("DeploymentSpace: levels of '" + d.name +
                                    "' must be strictly increasing");
    }
  }
  strides_.assign(dims_.size(), 1);
  std::uint64_t card = 1;
  for (std::size_t i = dims_.size(); i > 0; --i) {
    strides_[i - 1] = card;
    if (__builtin_mul_overflow(card, static_cast<std::uint64_t>(dims_[i - 1].levels.size()), &card))
      throw std::overflow_error("DeploymentSpace: cardinality overflows 64 bits");
  }
  cardinality_ = card;
}

Point DeploymentSpace::point_at(std::uint64_t rank) const {
  if (rank >= cardinality_) throw std::out_of_range("DeploymentSpace::point_at: rank out of range");
  Point p(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const std::uint64_t idx = rank / strides_[i];
    rank %= strides_[i];
    p[i] = dims_[i].levels[idx];
  }
  return p;
}

std::optional<std::uint64_t> DeploymentSpace::try_rank(const Point& p) const {
  if (p.size() != dims_.size()) return std::nullopt;
  std::uint64_t rank = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& lv = dims_[i].levels;
    const auto it = std::lower_bound(lv.begin(), lv.end(), p[i]);
    if (it == lv.end() || *it != p[i]) return std::nullopt;
    rank += static_cast<std::uint64_t>(it - lv.begin()) * strides_[i];
  }
  return rank;
}

std::uint64_t DeploymentSpace::rank_of(const Point& p) const {
  const auto r = try_rank(p);
  if (!r) throw std::invalid_argument("DeploymentSpace::rank_of: point not on grid");
  return *r;
}

std::optional<std::size_t> DeploymentSpace::dim_index(const std::string& name) const {
  for (std::size_t i = 0; i < dims_.size(); ++i)
    if (dims_[i].name == name) return i;
  return std::nullopt;
}

nlohmann::json DeploymentSpace::to_json() const {
  nlohmann::json dims = nlohmann::json::array();
  for (const Dimension& d : dims_) dims.push_back({{"name", d.name}, {"levels", d.levels}});
  nlohmann::json j{{"dimensions", std::move(dims)}};
  if (!categorical.empty()) j["categorical"] = categorical;
  return j;
}

DeploymentSpace DeploymentSpace::from_json(const nlohmann::json& j) {
  if (!j.contains("dimensions"))
    throw std::invalid_argument("space definition: missing 'dimensions'");
  std::vector<Dimension> dims;
  for (const auto& dj : j.at("dimensions")) {
    Dimension d;
    d.name = dj.at("name").get<std::string>();
    d.levels = dj.at("levels").get<std::vector<double>>();
    dims.push_back(std::move(d));
  }
  DeploymentSpace space(std::move(dims));
  if (j.contains("categorical")) {
    space.categorical =
        j.at("categorical").get<std::map<std::string, std::vector<std::string>>>();
    for (const auto& [name, labels] : space.categorical) {
      const auto idx = space.dim_index(name);
      if (!idx)
        throw std::invalid_argument("space definition: categorical entry for unknown dimension '" +
                                    name + "'");
      const auto& lv = space.dim(*idx).levels;
      if (labels.size() != lv.size())
        throw std::invalid_argument("space definition: categorical label count mismatch for '" +
                                    name + "'");
      for (std::size_t i = 0; i < lv.size(); ++i)
        if (lv[i] != static_cast<double>(i))
          throw std::invalid_argument("space definition: categorical dimension '" + name +
                                      "' must use ordinal levels 0..k-1");
    }
  }
  return space;
}

DeploymentSpace DeploymentSpace::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open space file: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

void DeploymentSpace::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write space file: " + path);
  out << to_json().dump(2) << '\n';
}

std::uint64_t region_grid_count(const DeploymentSpace& space, const Region& r) {
  std::uint64_t count = 0;
  space.for_each_point([&](const Point& p, std::uint64_t) {
    if (r.contains(p)) ++count;
  });
  return count;
}

}  // namespace dta
