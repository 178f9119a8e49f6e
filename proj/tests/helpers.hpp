#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dta/deployers.hpp"
#include "dta/rng.hpp"
#include "dta/space.hpp"

namespace dta::testing {

/// Uniform grid of `levels` integer levels 1..levels per dimension.
inline DeploymentSpace make_grid(std::size_t n_dims, std::size_t levels,
                                 const std::string& prefix = "x") {
  std::vector<Dimension> dims;
  for (std::size_t d = 0; d < n_dims; ++d) {
    Dimension dim;
    dim.name = prefix + std::to_string(d + 1);
    for (std::size_t i = 1; i <= levels; ++i) dim.levels.push_back(static_cast<double>(i));
    dims.push_back(std::move(dim));
  }
  return DeploymentSpace(std::move(dims));
}

/// Space where the unit-box scaling is the identity (levels from 0 to 1).
inline DeploymentSpace make_unit_grid(std::size_t n_dims, std::size_t levels) {
  std::vector<Dimension> dims;
  for (std::size_t d = 0; d < n_dims; ++d) {
    Dimension dim;
    dim.name = "x" + std::to_string(d + 1);
    for (std::size_t i = 0; i < levels; ++i)
      dim.levels.push_back(static_cast<double>(i) / static_cast<double>(levels - 1));
    dims.push_back(std::move(dim));
  }
  return DeploymentSpace(std::move(dims));
}

/// k distinct random grid points labeled by the deployer.
inline std::vector<LabeledSample> sample_grid(const DeploymentSpace& space, Deployer& deployer,
                                              std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint64_t> ranks(space.cardinality());
  for (std::uint64_t i = 0; i < ranks.size(); ++i) ranks[i] = i;
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(ranks.size() - i));
    std::swap(ranks[i], ranks[j]);
    const Point p = space.point_at(ranks[i]);
    out.push_back({p, *deployer.evaluate(p).value});
  }
  return out;
}

}  // namespace dta::testing
