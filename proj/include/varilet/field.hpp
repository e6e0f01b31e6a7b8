#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace varilet {

using Id = std::int64_t;

/// Marks a vertex that was inserted on an edge of a coarser domain.
struct SplitOrigin {
  Id edge_id = 0;  // id of the coarse edge that was split
  double t = 0.0;  // parameter along that edge, measured from its first endpoint
  bool operator==(const SplitOrigin&) const = default;
};

struct EdgeSpec {
  Id id = 0;
  Id a = 0;
  Id b = 0;
};

struct DomainEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  Id id = 0;
};

/// Finite undirected multigraph without self-loops or isolated vertices.
/// Vertices and edges carry stable external ids; algorithms work on dense
/// indices.
class DomainGraph {
 public:
  DomainGraph(std::vector<Id> vertex_ids, const std::vector<EdgeSpec>& edges,
              std::vector<std::optional<SplitOrigin>> origins = {});

  std::size_t vertex_count() const { return vertex_ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  Id vertex_id(std::size_t v) const { return vertex_ids_[v]; }
  std::optional<std::size_t> index_of(Id id) const;
  std::optional<std::size_t> edge_index_of(Id id) const;

  const std::vector<DomainEdge>& edges() const { return edges_; }
  const DomainEdge& edge(std::size_t e) const { return edges_[e]; }
  std::span<const std::size_t> incident(std::size_t v) const;
  std::size_t other_end(std::size_t e, std::size_t v) const {
    return edges_[e].u == v ? edges_[e].v : edges_[e].u;
  }

  std::size_t component_count() const { return component_count_; }
  std::size_t component_of(std::size_t v) const { return component_[v]; }

  const std::optional<SplitOrigin>& origin(std::size_t v) const { return origins_[v]; }
  bool has_split_vertices() const;

  /// Vertex order along the path when the graph is a single simple path.
  std::optional<std::vector<std::size_t>> chain_order() const;

  Id max_vertex_id() const;
  Id max_edge_id() const;

 private:
  std::vector<Id> vertex_ids_;
  std::vector<DomainEdge> edges_;
  std::vector<std::optional<SplitOrigin>> origins_;
  std::unordered_map<Id, std::size_t> vertex_index_;
  std::unordered_map<Id, std::size_t> edge_index_;
  std::vector<std::size_t> incidence_offsets_;
  std::vector<std::size_t> incidence_;
  std::vector<std::size_t> component_;
  std::size_t component_count_ = 0;
};

/// A point on a domain edge, t in [0, 1] measured from the edge's first
/// endpoint.
struct EdgePoint {
  std::size_t edge = 0;
  double t = 0.0;
};

/// Piecewise-linear field: one finite value per vertex, affine along edges.
class ScalarField {
 public:
  ScalarField(std::shared_ptr<const DomainGraph> domain, std::vector<double> values);

  const DomainGraph& domain() const { return *domain_; }
  const std::shared_ptr<const DomainGraph>& domain_ptr() const { return domain_; }
  std::span<const double> values() const { return values_; }
  double value(std::size_t v) const { return values_[v]; }
  double evaluate(const EdgePoint& p) const;

  double max_abs() const;

 private:
  std::shared_ptr<const DomainGraph> domain_;
  std::vector<double> values_;
};

/// Chain field over the samples in order. Requires at least two finite samples.
ScalarField load_series(std::span<const double> samples);

/// One value per line; a non-numeric first line is treated as a header.
std::vector<double> parse_series_csv(std::istream& in);

ScalarField load_graph_field(const nlohmann::json& document);
nlohmann::json field_to_json(const ScalarField& field);

/// Reads a `.csv` series or a JSON field document.
ScalarField read_field_file(const std::string& path);

ScalarField linear_combination(std::span<const ScalarField> fields, std::span<const double> coeffs);

/// Sum of absolute successive differences along a chain domain.
double classic_tv_1d(const ScalarField& field);

/// Inserts a vertex on edge `e` at parameter t with the interpolated value.
/// The new vertex records its origin so `coarsen` can undo the split.
ScalarField subdivide_edge(const ScalarField& field, std::size_t e, double t);

/// Removes every split vertex, restoring the coarse edges and their ids.
ScalarField coarsen(const ScalarField& field);

}  // namespace varilet
