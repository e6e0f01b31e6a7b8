#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "varilet/middle_function.hpp"
#include "varilet/mlf.hpp"
#include "varilet/region.hpp"
#include "varilet/report.hpp"

namespace varilet {

enum class Direction { up, down };

/// Where a threshold region starts. Domain vertices are mapped through the
/// monotone factor; middle points are used as given.
struct Seed {
  enum class Kind { domain_vertex, middle_vertex, middle_edge };
  Kind kind = Kind::domain_vertex;
  Id id = 0;           // domain vertex id, middle vertex or middle edge
  double value = 0.0;  // light factor, for middle_edge seeds
  bool operator==(const Seed&) const = default;
};

struct ThresholdCut {
  double level = 0.0;
  Direction direction = Direction::up;
  Seed seed;
};

/// How a region was specified in a lens document.
struct RegionSpec {
  enum class Kind { root, threshold, fragments };
  Kind kind = Kind::root;
  std::size_t component = 0;  // root
  ThresholdCut cut;           // threshold
  std::vector<Fragment> fragments;
  std::optional<double> boundary_level;  // fragments; absent means "root-like"
};

/// Nested, covering, indexed collection of constant-boundary regions of one
/// middle space. Index order is the vector order.
struct Lens {
  std::vector<Region> regions;
  std::vector<RegionSpec> specs;  // parallel to regions

  std::size_t size() const { return regions.size(); }
};

/// Connected component of {value >= level} (up) or {value <= level} (down)
/// holding the seed. With `closed == false` the region is instead the
/// closure of the component of the strict super/sublevel set.
Region threshold_region(const Factorization& fact, const ThresholdCut& cut, bool closed = true);

MiddleLocation resolve_seed(const Factorization& fact, const Seed& seed);

/// Roots (one per middle component) followed by the given cuts, sorted into
/// canonical index order. Throws LensError on invalid cuts or non-nesting.
Lens build_threshold_lens(const Factorization& fact, std::span<const ThresholdCut> cuts);

/// Persistence-style lens: super- and sublevel branches born at extrema and
/// bounded at their pairing saddle, accepted greedily by decreasing
/// persistence whenever they nest with the regions already accepted.
/// Branches with persistence below `min_amplitude` are dropped.
Lens build_branch_lens(const Factorization& fact, double min_amplitude = 0.0);

/// Realizes a lens document. Without explicit root entries the roots are
/// prepended and regions sorted canonically; otherwise the given order is
/// kept verbatim (and left to validation).
Lens realize_lens(const Factorization& fact, std::span<const RegionSpec> specs);

/// Canonical order: inclusion depth, then decreasing ttv, then input order.
/// Roots are added when missing. Throws LensError when regions do not nest.
Lens order_lens(const Factorization& fact, std::vector<Region> regions, std::vector<RegionSpec> specs);

/// Regions expressed on a subdivision holding every region cut, plus the
/// inclusion tree recovered from the index order.
class LensLayout {
 public:
  LensLayout(std::shared_ptr<const Factorization> fact, const Lens& lens);

  const std::shared_ptr<const Subdivision>& subdivision_ptr() const { return sub_; }
  const Subdivision& subdivision() const { return *sub_; }
  std::size_t size() const { return region_pieces_.size(); }

  std::span<const std::size_t> region_pieces(std::size_t i) const { return region_pieces_[i]; }
  std::span<const std::size_t> region_boundary(std::size_t i) const { return region_boundary_[i]; }
  std::span<const std::size_t> support_pieces(std::size_t i) const { return support_pieces_[i]; }
  std::span<const std::size_t> support_boundary(std::size_t i) const { return support_boundary_[i]; }
  /// Largest region index containing each piece.
  std::size_t owner(std::size_t piece) const { return owner_[piece]; }

  bool is_root(std::size_t i) const { return region_boundary_[i].empty(); }
  std::size_t root_count() const { return root_count_; }
  std::optional<std::size_t> predecessor(std::size_t i) const { return predecessor_[i]; }
  std::size_t depth(std::size_t i) const { return depth_[i]; }
  std::span<const std::size_t> successors(std::size_t i) const { return successors_[i]; }
  /// Light factor on the region boundary; 0 for roots.
  double boundary_level(std::size_t i) const { return level_[i]; }
  std::size_t component(std::size_t i) const { return component_[i]; }

  /// True when C_j is a subset of C_i (i == j included).
  bool contains(std::size_t i, std::size_t j) const;

  const VerificationReport& report() const { return report_; }
  bool valid() const { return report_.ok(); }

  MiddleLocation node_location(std::size_t node) const;
  Region pieces_to_region(std::span<const std::size_t> pieces) const;

 private:
  std::shared_ptr<const Subdivision> sub_;
  std::vector<std::vector<std::size_t>> region_pieces_;
  std::vector<std::vector<std::size_t>> region_boundary_;
  std::vector<std::vector<std::size_t>> support_pieces_;
  std::vector<std::vector<std::size_t>> support_boundary_;
  std::vector<std::size_t> owner_;
  std::vector<std::optional<std::size_t>> predecessor_;
  std::vector<std::vector<std::size_t>> successors_;
  std::vector<std::size_t> depth_;
  std::vector<double> level_;
  std::vector<std::size_t> component_;
  std::size_t root_count_ = 0;
  VerificationReport report_;
};

VerificationReport validate_lens(const std::shared_ptr<const Factorization>& fact, const Lens& lens);

struct Support {
  std::size_t index = 0;
  Region region;                              // fragments of D_i
  std::vector<MiddleLocation> boundary;       // points shared with other supports
};

/// Closures of each region minus all later regions. Throws LensError when
/// the lens is invalid.
std::vector<Support> supports(const LensLayout& layout);

/// Link between a region's predecessor support and its own support: one
/// point of the region boundary lying on both.
struct LinkPair {
  std::size_t predecessor = 0;
  std::size_t successor = 0;
  MiddleLocation p;  // on the predecessor support
  MiddleLocation q;  // on the successor support
  std::size_t node = 0;
  double value = 0.0;
};

std::vector<LinkPair> link_pairs(const LensLayout& layout);

/// Component of the closure of (middle component minus a support).
struct ComplementComponent {
  std::vector<std::size_t> pieces;
  std::vector<std::size_t> boundary;  // nodes shared with the support
};

/// Complement components of the closed piece set `support` inside its own
/// middle component(s).
std::vector<ComplementComponent> complement_components(const Subdivision& sub, std::span<const std::size_t> support);

nlohmann::json lens_to_json(const Lens& lens);
std::vector<RegionSpec> lens_specs_from_json(const nlohmann::json& doc);
nlohmann::json region_spec_to_json(const RegionSpec& spec);

}  // namespace varilet
