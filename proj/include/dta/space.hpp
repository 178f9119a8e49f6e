#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace dta {

/// A grid point of the deployment space, one coordinate per dimension.
using Point = std::vector<double>;

/// A deployed configuration paired with its measured performance value.
struct LabeledSample {
  Point input;
  double output = 0.0;
};

/// One configuration axis: a finite, strictly increasing set of values.
struct Dimension {
  std::string name;
  std::vector<double> levels;
};

/// Oblique boundary a1*x1 + ... + an*xn + offset = 0. Points with
/// eval(p) <= 0 are on the "below-or-on" side.
struct Hyperplane {
  std::vector<double> coeffs;
  double offset = 0.0;

  double eval(const Point& p) const;
  bool below_or_on(const Point& p) const { return eval(p) <= 0.0; }

  /// Scales the coefficient vector to unit norm and fixes the sign so the
  /// first nonzero coefficient is positive. Flipping the sign swaps sides,
  /// so callers must re-partition afterwards if they already did.
  void normalize();
};

/// Half-space constraint accumulated along a root-to-leaf path.
struct RegionConstraint {
  Hyperplane plane;
  bool below = true;
};

/// Convex cell of the space: conjunction of half-space constraints.
/// An empty constraint list is the whole space.
struct Region {
  std::vector<RegionConstraint> constraints;

  bool contains(const Point& p) const;
  Region refined(const Hyperplane& plane, bool below) const;
};

/// The finite Cartesian grid of all configuration combinations.
/// Immutable after construction; safe to share across threads.
class DeploymentSpace {
 public:
  explicit DeploymentSpace(std::vector<Dimension> dims);

  std::size_t num_dims() const { return dims_.size(); }
  const Dimension& dim(std::size_t i) const { return dims_[i]; }
  const std::vector<Dimension>& dims() const { return dims_; }

  /// |D| = prod |d_i|, computed with overflow-checked 64-bit arithmetic.
  std::uint64_t cardinality() const { return cardinality_; }

  /// Grid point at the given lexicographic rank (first dimension most
  /// significant, level indices ascending).
  Point point_at(std::uint64_t rank) const;

  /// Inverse of point_at. Throws std::invalid_argument for off-grid points.
  std::uint64_t rank_of(const Point& p) const;
  std::optional<std::uint64_t> try_rank(const Point& p) const;
  bool on_grid(const Point& p) const { return try_rank(p).has_value(); }

  std::optional<std::size_t> dim_index(const std::string& name) const;

  /// Streams every grid point exactly once in rank order. The Point buffer
  /// is reused between calls; copy it if you keep it.
  template <typename F>
  void for_each_point(F&& fn) const {
    std::vector<std::size_t> idx(dims_.size(), 0);
    Point p(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) p[i] = dims_[i].levels[0];
    std::uint64_t rank = 0;
    while (true) {
      fn(static_cast<const Point&>(p), rank);
      ++rank;
      std::size_t d = dims_.size();
      while (d > 0) {
        --d;
        if (++idx[d] < dims_[d].levels.size()) {
          p[d] = dims_[d].levels[idx[d]];
          break;
        }
        idx[d] = 0;
        p[d] = dims_[d].levels[0];
        if (d == 0) return;
      }
    }
  }

  nlohmann::json to_json() const;
  static DeploymentSpace from_json(const nlohmann::json& j);
  static DeploymentSpace load(const std::string& path);
  void save(const std::string& path) const;

  /// Label lists for dimensions that were ordinal-encoded at ingestion,
  /// keyed by dimension name. Purely a decode aid for outputs.
  std::map<std::string, std::vector<std::string>> categorical;

 private:
  std::vector<Dimension> dims_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t cardinality_ = 0;
};

/// Number of grid points inside a region (streaming, never materialized).
std::uint64_t region_grid_count(const DeploymentSpace& space, const Region& r);

}  // namespace dta
