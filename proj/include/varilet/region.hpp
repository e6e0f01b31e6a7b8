#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "varilet/mlf.hpp"

namespace varilet {

/// Closed sub-interval [lo, hi] of a middle edge, in light-factor values.
struct Fragment {
  std::size_t edge = 0;
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Fragment&) const = default;
};

/// Closed subset of the middle space made of edge fragments. Lens regions
/// and varilet supports share this representation.
struct Region {
  std::vector<Fragment> fragments;      // sorted by (edge, lo), pairwise disjoint interiors
  std::optional<double> boundary_level;  // constant light factor on the boundary; empty for roots
  std::size_t component = 0;

  bool empty() const { return fragments.empty(); }
};

/// Sorts fragments and merges ones that touch on the same edge.
std::vector<Fragment> normalize_fragments(std::vector<Fragment> fragments);

/// Every fragment lies on an existing edge within its value range, with
/// positive length.
bool fragments_fit(const MiddleSpace& middle, const std::vector<Fragment>& fragments);

Region whole_component(const MiddleSpace& middle, std::size_t component);

}  // namespace varilet
