#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "varilet/field.hpp"
#include "varilet/mlf.hpp"

namespace varilet {

/// A point of the refined middle space: a node, or the interior of a piece.
struct SubLocation {
  bool is_node = true;
  std::size_t id = 0;
  double value = 0.0;
};

/// Node of a refined middle space. Nodes [0, vertex_count) are the middle
/// vertices themselves; later nodes are cut points inside middle edges.
struct MiddleNode {
  double value = 0.0;
  std::optional<std::size_t> vertex;  // middle vertex, when not a cut point
  std::size_t edge = 0;               // middle edge holding a cut point
};

/// Closed sub-interval of a middle edge between two consecutive nodes.
struct Piece {
  std::size_t edge = 0;
  std::size_t lo = 0;  // node with the smaller light-factor value
  std::size_t hi = 0;
  std::size_t component = 0;
};

/// Middle space with every middle edge split at a finite set of cut values.
/// Regions, supports and middle functions are all expressed in its pieces.
class Subdivision {
 public:
  Subdivision(std::shared_ptr<const Factorization> fact, std::span<const std::pair<std::size_t, double>> cuts);

  const Factorization& factorization() const { return *fact_; }
  const std::shared_ptr<const Factorization>& factorization_ptr() const { return fact_; }
  const MiddleSpace& middle() const { return fact_->middle; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t piece_count() const { return pieces_.size(); }
  const MiddleNode& node(std::size_t n) const { return nodes_[n]; }
  const Piece& piece(std::size_t p) const { return pieces_[p]; }
  double node_value(std::size_t n) const { return nodes_[n].value; }
  double piece_length(std::size_t p) const { return nodes_[pieces_[p].hi].value - nodes_[pieces_[p].lo].value; }
  std::span<const std::size_t> node_pieces(std::size_t n) const { return node_pieces_[n]; }
  std::size_t node_component(std::size_t n) const;

  /// Pieces of one middle edge, in increasing value.
  std::pair<std::size_t, std::size_t> pieces_of_edge(std::size_t e) const {
    return {edge_first_piece_[e], edge_first_piece_[e + 1]};
  }
  /// Sorted interior cut values of one middle edge.
  std::span<const double> cuts_of_edge(std::size_t e) const;

  /// Node sitting exactly at `value` on middle edge `e`, endpoints included.
  std::optional<std::size_t> node_at(std::size_t e, double value) const;
  SubLocation locate(const MiddleLocation& loc) const;
  /// Pieces of edge `e` covering the closed interval [lo, hi].
  std::pair<std::size_t, std::size_t> pieces_between(std::size_t e, double lo, double hi) const;

 private:
  std::shared_ptr<const Factorization> fact_;
  std::vector<MiddleNode> nodes_;
  std::vector<Piece> pieces_;
  std::vector<std::vector<std::size_t>> node_pieces_;
  std::vector<std::size_t> edge_first_piece_;
  std::vector<std::size_t> edge_first_cut_;
  std::vector<double> cut_values_;
};

struct Affine {
  double slope = 0.0;
  double intercept = 0.0;
  double operator()(double x) const { return slope * x + intercept; }
};

/// Piecewise-linear function on a refined middle space: exact values at
/// nodes, an affine map in the light factor on each piece. Node values are
/// authoritative at breakpoints; piece maps serve interior points.
class MiddleFunction {
 public:
  MiddleFunction(std::shared_ptr<const Subdivision> sub, std::vector<double> node_values,
                 std::vector<Affine> piece_maps);

  /// The light factor itself.
  static MiddleFunction light_factor(std::shared_ptr<const Subdivision> sub);
  static MiddleFunction zero(std::shared_ptr<const Subdivision> sub);

  const Subdivision& subdivision() const { return *sub_; }
  const std::shared_ptr<const Subdivision>& subdivision_ptr() const { return sub_; }
  double at_node(std::size_t n) const { return node_values_[n]; }
  const Affine& on_piece(std::size_t p) const { return piece_maps_[p]; }
  std::span<const double> node_values() const { return node_values_; }
  std::span<const Affine> piece_maps() const { return piece_maps_; }
  double evaluate(const SubLocation& loc) const {
    return loc.is_node ? node_values_[loc.id] : piece_maps_[loc.id](loc.value);
  }

  /// Largest gap between a piece map and the node values at its ends.
  double continuity_defect() const;

  std::vector<double>& mutable_node_values() { return node_values_; }
  std::vector<Affine>& mutable_piece_maps() { return piece_maps_; }

 private:
  std::shared_ptr<const Subdivision> sub_;
  std::vector<double> node_values_;
  std::vector<Affine> piece_maps_;
};

/// The domain refined at every preimage of a cut point, so that each refined
/// edge maps into a single piece. Original vertices keep their ids and
/// order; inserted vertices carry their split origin.
class PullbackDomain {
 public:
  explicit PullbackDomain(std::shared_ptr<const Subdivision> sub);

  const Subdivision& subdivision() const { return *sub_; }
  const std::shared_ptr<const Subdivision>& subdivision_ptr() const { return sub_; }
  /// The original field on the refined domain (inserted vertices carry the
  /// exact cut values).
  const ScalarField& field() const { return field_; }
  const std::shared_ptr<const DomainGraph>& domain_ptr() const { return field_.domain_ptr(); }
  const std::vector<std::optional<SubLocation>>& locations() const { return locations_; }
  std::size_t original_vertex_count() const { return original_vertices_; }

 private:
  std::shared_ptr<const Subdivision> sub_;
  std::vector<std::optional<SubLocation>> locations_;  // filled while field_ is built
  ScalarField field_;
  std::size_t original_vertices_ = 0;
};

/// g = gamma o mu on the refined domain. Vertices of constant domain
/// components receive 0.
ScalarField pull_back(const PullbackDomain& domain, const MiddleFunction& gamma);

}  // namespace varilet
