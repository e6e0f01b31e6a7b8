#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "varilet/field.hpp"
#include "varilet/report.hpp"

namespace varilet {

enum class Criticality { minimum, maximum, saddle };

const char* to_string(Criticality c);

struct MiddleVertex {
  double value = 0.0;  // light factor at the vertex
  Criticality kind = Criticality::minimum;
  std::size_t component = 0;
};

/// Edge of the middle space, stored from its lower to its upper endpoint.
struct MiddleEdge {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t component = 0;
};

/// The middle space (Reeb graph) of a PL field on a graph. Vertices are the
/// critical points only; the light factor is strictly increasing from `lo`
/// to `hi` along every edge. Vertices are ordered by (value, smallest
/// preimage vertex index), which makes every export byte-stable.
class MiddleSpace {
 public:
  MiddleSpace() = default;
  MiddleSpace(std::vector<MiddleVertex> vertices, std::vector<MiddleEdge> edges, std::size_t component_count,
              std::vector<std::size_t> degenerate_domain_components);

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const MiddleVertex& vertex(std::size_t v) const { return vertices_[v]; }
  const MiddleEdge& edge(std::size_t e) const { return edges_[e]; }
  const std::vector<MiddleVertex>& vertices() const { return vertices_; }
  const std::vector<MiddleEdge>& edges() const { return edges_; }
  double value(std::size_t v) const { return vertices_[v].value; }
  double lo_value(std::size_t e) const { return vertices_[edges_[e].lo].value; }
  double hi_value(std::size_t e) const { return vertices_[edges_[e].hi].value; }
  double length(std::size_t e) const { return hi_value(e) - lo_value(e); }

  std::span<const std::size_t> incident(std::size_t v) const { return incidence_[v]; }
  std::size_t other_end(std::size_t e, std::size_t v) const {
    return edges_[e].lo == v ? edges_[e].hi : edges_[e].lo;
  }

  std::size_t component_count() const { return component_count_; }
  /// Domain components on which the field is constant. They have no middle
  /// space edges and are left out of the middle space.
  const std::vector<std::size_t>& degenerate_domain_components() const { return degenerate_; }

 private:
  std::vector<MiddleVertex> vertices_;
  std::vector<MiddleEdge> edges_;
  std::vector<std::vector<std::size_t>> incidence_;
  std::size_t component_count_ = 0;
  std::vector<std::size_t> degenerate_;
};

/// Where a domain point lands in the middle space.
struct MiddleLocation {
  enum class Kind { vertex, edge, none };
  Kind kind = Kind::none;
  std::size_t id = 0;  // middle vertex or middle edge
  double value = 0.0;  // light factor at the location

  static MiddleLocation at_vertex(std::size_t v, double value) { return {Kind::vertex, v, value}; }
  static MiddleLocation on_edge(std::size_t e, double value) { return {Kind::edge, e, value}; }
  bool operator==(const MiddleLocation&) const = default;
};

/// The quotient map from the domain onto the middle space.
struct MonotoneFactor {
  std::vector<MiddleLocation> vertex_location;            // per domain vertex
  std::vector<std::optional<std::size_t>> edge_image;     // per domain edge; empty for constant edges
};

struct Factorization {
  ScalarField field;
  MiddleSpace middle;
  MonotoneFactor factor;
};

Factorization factorize(const ScalarField& field);

/// Connected components of the level set {x : f(x) = level}, counted by a
/// direct traversal of the domain.
std::size_t count_contours(const ScalarField& field, double level);

/// Number of middle space points with light factor equal to `level`.
std::size_t points_at_level(const MiddleSpace& middle, double level);

VerificationReport verify_factorization(const Factorization& fact);

/// Ordering-free description of a middle space: sorted vertex values and
/// sorted (lower, upper) edge value pairs.
struct MiddleSignature {
  std::vector<double> vertex_values;
  std::vector<std::pair<double, double>> edges;
};

MiddleSignature signature(const MiddleSpace& middle);

/// True when both signatures agree entry by entry within `rel_tol`
/// (relative to the larger magnitude). `rel_tol == 0` demands equality.
bool signatures_match(const MiddleSignature& a, const MiddleSignature& b, double rel_tol, std::string* why = nullptr);

nlohmann::json middle_space_to_json(const Factorization& fact);

}  // namespace varilet
