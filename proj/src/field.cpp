#include "varilet/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "varilet/error.hpp"
#include "varilet/numeric.hpp"

namespace varilet {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + text.size()) return std::nullopt;
  return v;
}

}  // namespace

DomainGraph::DomainGraph(std::vector<Id> vertex_ids, const std::vector<EdgeSpec>& edges,
                         std::vector<std::optional<SplitOrigin>> origins)
    : vertex_ids_(std::move(vertex_ids)), origins_(std::move(origins)) {
  const std::size_t n = vertex_ids_.size();
  if (origins_.empty()) origins_.resize(n);
  if (origins_.size() != n) throw ValidationError("origin table size does not match vertex count");

  vertex_index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!vertex_index_.emplace(vertex_ids_[i], i).second) {
      throw ValidationError("duplicate vertex id " + std::to_string(vertex_ids_[i]));
    }
  }
  edges_.reserve(edges.size());
  edge_index_.reserve(edges.size());
  for (const EdgeSpec& spec : edges) {
    const auto a = vertex_index_.find(spec.a);
    const auto b = vertex_index_.find(spec.b);
    if (a == vertex_index_.end() || b == vertex_index_.end()) {
      throw ValidationError("edge " + std::to_string(spec.id) + " references a missing vertex");
    }
    if (a->second == b->second) {
      throw ValidationError("edge " + std::to_string(spec.id) + " is a self-loop");
    }
    if (!edge_index_.emplace(spec.id, edges_.size()).second) {
      throw ValidationError("duplicate edge id " + std::to_string(spec.id));
    }
    edges_.push_back({a->second, b->second, spec.id});
  }

  std::vector<std::size_t> degree(n, 0);
  for (const DomainEdge& e : edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  incidence_offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (degree[v] == 0) {
      throw ValidationError("vertex " + std::to_string(vertex_ids_[v]) + " is isolated");
    }
    incidence_offsets_[v + 1] = incidence_offsets_[v] + degree[v];
  }
  incidence_.resize(incidence_offsets_[n]);
  std::vector<std::size_t> fill(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    incidence_[fill[edges_[e].u]++] = e;
    incidence_[fill[edges_[e].v]++] = e;
  }

  DisjointSets sets(n);
  for (const DomainEdge& e : edges_) sets.unite(e.u, e.v);
  component_.assign(n, 0);
  std::vector<std::size_t> label(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t r = sets.find(v);
    if (label[r] == n) label[r] = component_count_++;
    component_[v] = label[r];
  }
}

std::optional<std::size_t> DomainGraph::index_of(Id id) const {
  const auto it = vertex_index_.find(id);
  if (it == vertex_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> DomainGraph::edge_index_of(Id id) const {
  const auto it = edge_index_.find(id);
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> DomainGraph::incident(std::size_t v) const {
  return {incidence_.data() + incidence_offsets_[v], incidence_offsets_[v + 1] - incidence_offsets_[v]};
}

bool DomainGraph::has_split_vertices() const {
  return std::any_of(origins_.begin(), origins_.end(), [](const auto& o) { return o.has_value(); });
}

std::optional<std::vector<std::size_t>> DomainGraph::chain_order() const {
  const std::size_t n = vertex_count();
  if (n < 2 || component_count_ != 1 || edges_.size() != n - 1) return std::nullopt;
  std::size_t start = n;
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t d = incident(v).size();
    if (d > 2) return std::nullopt;
    if (d == 1 && start == n) start = v;
  }
  if (start == n) return std::nullopt;
  std::vector<std::size_t> order;
  order.reserve(n);
  std::size_t prev_edge = edges_.size();
  std::size_t v = start;
  while (true) {
    order.push_back(v);
    std::size_t next_edge = edges_.size();
    for (std::size_t e : incident(v)) {
      if (e != prev_edge) next_edge = e;
    }
    if (next_edge == edges_.size()) break;
    v = other_end(next_edge, v);
    prev_edge = next_edge;
  }
  return order;
}

Id DomainGraph::max_vertex_id() const {
  return vertex_ids_.empty() ? -1 : *std::max_element(vertex_ids_.begin(), vertex_ids_.end());
}

Id DomainGraph::max_edge_id() const {
  Id best = -1;
  for (const DomainEdge& e : edges_) best = std::max(best, e.id);
  return best;
}

ScalarField::ScalarField(std::shared_ptr<const DomainGraph> domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (!domain_) throw ValidationError("field has no domain");
  if (values_.size() != domain_->vertex_count()) {
    throw ValidationError("field has " + std::to_string(values_.size()) + " values for " +
                          std::to_string(domain_->vertex_count()) + " vertices");
  }
  for (std::size_t v = 0; v < values_.size(); ++v) {
    if (!std::isfinite(values_[v])) {
      throw ValidationError("non-finite value at vertex " + std::to_string(domain_->vertex_id(v)));
    }
  }
}

double ScalarField::evaluate(const EdgePoint& p) const {
  const DomainEdge& e = domain_->edge(p.edge);
  if (p.t == 0.0) return values_[e.u];
  if (p.t == 1.0) return values_[e.v];
  // a + t (b - a) is exact on constant edges and never leaves [a, b].
  const double a = values_[e.u];
  const double b = values_[e.v];
  return a + p.t * (b - a);
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField load_series(std::span<const double> samples) {
  if (samples.size() < 2) throw ParseError("a series needs at least 2 samples");
  std::vector<Id> ids(samples.size());
  std::vector<EdgeSpec> edges;
  edges.reserve(samples.size() - 1);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) throw ParseError("non-finite sample at position " + std::to_string(i));
    ids[i] = static_cast<Id>(i);
    if (i > 0) edges.push_back({static_cast<Id>(i - 1), static_cast<Id>(i - 1), static_cast<Id>(i)});
  }
  auto domain = std::make_shared<const DomainGraph>(std::move(ids), edges);
  return ScalarField(std::move(domain), std::vector<double>(samples.begin(), samples.end()));
}

std::vector<double> parse_series_csv(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto v = parse_double(text);
    if (!v) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + text + "'");
    }
    if (!std::isfinite(*v)) throw ParseError("line " + std::to_string(line_no) + ": non-finite sample");
    first = false;
    out.push_back(*v);
  }
  return out;
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(where + ": missing '" + key + "'");
  }
  return obj.at(key);
}

Id require_id(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number_integer()) throw ParseError(where + ": '" + key + "' must be an integer");
  return v.get<Id>();
}

double require_number(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number()) throw ParseError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

ScalarField load_graph_field(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("field document must be an object");
  if (doc.contains("format") && doc.at("format") != "varilet.field") {
    throw ParseError("unexpected document format " + doc.at("format").dump());
  }
  const auto& vertices = require(doc, "vertices", "field");
  const auto& edges = require(doc, "edges", "field");
  if (!vertices.is_array() || !edges.is_array()) throw ParseError("field: 'vertices' and 'edges' must be arrays");

  std::vector<Id> ids;
  std::vector<double> values;
  std::vector<std::optional<SplitOrigin>> origins;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const std::string where = "vertices[" + std::to_string(i) + "]";
    ids.push_back(require_id(vertices[i], "id", where));
    values.push_back(require_number(vertices[i], "value", where));
    if (vertices[i].contains("split")) {
      const auto& s = vertices[i].at("split");
      origins.push_back(SplitOrigin{require_id(s, "edge", where + ".split"), require_number(s, "t", where + ".split")});
    } else {
      origins.emplace_back();
    }
  }
  std::vector<EdgeSpec> specs;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    const auto& ends = require(edges[i], "endpoints", where);
    if (!ends.is_array() || ends.size() != 2 || !ends[0].is_number_integer() || !ends[1].is_number_integer()) {
      throw ParseError(where + ": 'endpoints' must be a pair of vertex ids");
    }
    specs.push_back({require_id(edges[i], "id", where), ends[0].get<Id>(), ends[1].get<Id>()});
  }
  auto domain = std::make_shared<const DomainGraph>(std::move(ids), specs, std::move(origins));
  return ScalarField(std::move(domain), std::move(values));
}

nlohmann::json field_to_json(const ScalarField& field) {
  const DomainGraph& g = field.domain();
  nlohmann::json vertices = nlohmann::json::array();
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    nlohmann::json item = {{"id", g.vertex_id(v)}, {"value", field.value(v)}};
    if (const auto& o = g.origin(v)) item["split"] = {{"edge", o->edge_id}, {"t", o->t}};
    vertices.push_back(std::move(item));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const DomainEdge& e : g.edges()) {
    edges.push_back({{"id", e.id}, {"endpoints", {g.vertex_id(e.u), g.vertex_id(e.v)}}});
  }
  return {{"format", "varilet.field"}, {"version", 1}, {"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

ScalarField read_field_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  if (csv) {
    const auto samples = parse_series_csv(in);
    return load_series(samples);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return load_graph_field(doc);
}

ScalarField linear_combination(std::span<const ScalarField> fields, std::span<const double> coeffs) {
  if (fields.size() != coeffs.size()) {
    throw CoefficientError("linear_combination: " + std::to_string(fields.size()) + " fields but " +
                           std::to_string(coeffs.size()) + " coefficients");
  }
  if (fields.empty()) throw CoefficientError("linear_combination: no fields");
  const auto& domain = fields.front().domain_ptr();
  for (const ScalarField& f : fields) {
    if (f.domain_ptr() != domain) throw ValidationError("linear_combination: fields live on different domains");
  }
  std::vector<CompensatedSum> sums(domain->vertex_count());
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const double a = coeffs[k];
    if (a == 0.0) continue;
    const auto values = fields[k].values();
    for (std::size_t v = 0; v < sums.size(); ++v) {
      if (values[v] != 0.0) sums[v].add(a * values[v]);
    }
  }
  std::vector<double> out(sums.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = sums[v].value();
  return ScalarField(domain, std::move(out));
}

double classic_tv_1d(const ScalarField& field) {
  const auto order = field.domain().chain_order();
  if (!order) throw ValidationError("classic_tv_1d: domain is not a chain");
  CompensatedSum sum;
  for (std::size_t k = 1; k < order->size(); ++k) {
    sum.add(std::abs(field.value((*order)[k]) - field.value((*order)[k - 1])));
  }
  return sum.value();
}

ScalarField subdivide_edge(const ScalarField& field, std::size_t e, double t) {
  const DomainGraph& g = field.domain();
  if (e >= g.edge_count()) throw ValidationError("subdivide_edge: edge index out of range");
  if (!(t > 0.0 && t < 1.0)) throw ValidationError("subdivide_edge: t must lie strictly inside (0, 1)");
  const DomainEdge& split = g.edge(e);

  // Coarse parameters of the two endpoints; pieces are oriented by increasing t.
  SplitOrigin origin{split.id, t};
  const auto& oa = g.origin(split.u);
  const auto& ob = g.origin(split.v);
  if (oa || ob) {
    const Id coarse = oa ? oa->edge_id : ob->edge_id;
    const double ta = oa ? oa->t : 0.0;
    const double tb = ob ? ob->t : 1.0;
    origin = {coarse, ta + t * (tb - ta)};
  }

  std::vector<Id> ids;
  std::vector<double> values(field.values().begin(), field.values().end());
  std::vector<std::optional<SplitOrigin>> origins;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    ids.push_back(g.vertex_id(v));
    origins.push_back(g.origin(v));
  }
  const Id new_vertex = g.max_vertex_id() + 1;
  ids.push_back(new_vertex);
  values.push_back(field.evaluate({e, t}));
  origins.push_back(origin);

  std::vector<EdgeSpec> specs;
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const DomainEdge& d = g.edge(k);
    if (k == e) {
      specs.push_back({d.id, g.vertex_id(d.u), new_vertex});
    } else {
      specs.push_back({d.id, g.vertex_id(d.u), g.vertex_id(d.v)});
    }
  }
  specs.push_back({g.max_edge_id() + 1, new_vertex, g.vertex_id(split.v)});
  auto domain = std::make_shared<const DomainGraph>(std::move(ids), specs, std::move(origins));
  return ScalarField(std::move(domain), std::move(values));
}

ScalarField coarsen(const ScalarField& field) {
  const DomainGraph& g = field.domain();
  if (!g.has_split_vertices()) return field;

  // Each coarse edge keeps its id on the piece touching its first endpoint;
  // walking from there through split vertices finds the second endpoint.
  std::vector<EdgeSpec> specs;
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const DomainEdge& d = g.edge(k);
    const bool u_split = g.origin(d.u).has_value();
    const bool v_split = g.origin(d.v).has_value();
    if (u_split && v_split) continue;
    if (!u_split && !v_split) {
      specs.push_back({d.id, g.vertex_id(d.u), g.vertex_id(d.v)});
      continue;
    }
    const std::size_t start = u_split ? d.v : d.u;
    std::size_t inner = u_split ? d.u : d.v;
    if (g.origin(inner)->edge_id != d.id) continue;  // tail piece, emitted from the head
    std::size_t prev_edge = k;
    while (g.origin(inner)) {
      std::size_t next = g.edge_count();
      for (std::size_t f : g.incident(inner)) {
        if (f != prev_edge) next = f;
      }
      if (next == g.edge_count()) throw ValidationError("coarsen: split vertex is not on a path");
      prev_edge = next;
      inner = g.other_end(next, inner);
    }
    specs.push_back({d.id, g.vertex_id(start), g.vertex_id(inner)});
  }

  std::vector<Id> ids;
  std::vector<double> values;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (g.origin(v)) continue;
    ids.push_back(g.vertex_id(v));
    values.push_back(field.value(v));
  }
  auto domain = std::make_shared<const DomainGraph>(std::move(ids), specs);
  return ScalarField(std::move(domain), std::move(values));
}

}  // namespace varilet
