#include "varilet/middle_function.hpp"

#include <algorithm>
#include <cmath>

#include "varilet/error.hpp"

namespace varilet {

Subdivision::Subdivision(std::shared_ptr<const Factorization> fact,
                         std::span<const std::pair<std::size_t, double>> cuts)
    : fact_(std::move(fact)) {
  const MiddleSpace& m = fact_->middle;
  std::vector<std::vector<double>> per_edge(m.edge_count());
  for (const auto& [e, value] : cuts) {
    if (e >= m.edge_count()) throw LensError("cut references missing middle edge " + std::to_string(e));
    if (m.lo_value(e) < value && value < m.hi_value(e)) per_edge[e].push_back(value);
  }

  nodes_.reserve(m.vertex_count() + cuts.size());
  for (std::size_t v = 0; v < m.vertex_count(); ++v) nodes_.push_back({m.value(v), v, 0});
  edge_first_piece_.assign(m.edge_count() + 1, 0);
  edge_first_cut_.assign(m.edge_count() + 1, 0);
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    auto& values = per_edge[e];
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    edge_first_cut_[e] = cut_values_.size();
    edge_first_piece_[e] = pieces_.size();
    std::size_t prev = m.edge(e).lo;
    for (double v : values) {
      const std::size_t node = nodes_.size();
      nodes_.push_back({v, std::nullopt, e});
      cut_values_.push_back(v);
      pieces_.push_back({e, prev, node, m.edge(e).component});
      prev = node;
    }
    pieces_.push_back({e, prev, m.edge(e).hi, m.edge(e).component});
  }
  edge_first_cut_[m.edge_count()] = cut_values_.size();
  edge_first_piece_[m.edge_count()] = pieces_.size();

  node_pieces_.resize(nodes_.size());
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    node_pieces_[pieces_[p].lo].push_back(p);
    node_pieces_[pieces_[p].hi].push_back(p);
  }
}

std::size_t Subdivision::node_component(std::size_t n) const {
  const MiddleNode& node = nodes_[n];
  return node.vertex ? middle().vertex(*node.vertex).component : middle().edge(node.edge).component;
}

std::span<const double> Subdivision::cuts_of_edge(std::size_t e) const {
  return {cut_values_.data() + edge_first_cut_[e], edge_first_cut_[e + 1] - edge_first_cut_[e]};
}

std::optional<std::size_t> Subdivision::node_at(std::size_t e, double value) const {
  const MiddleSpace& m = middle();
  if (value == m.lo_value(e)) return m.edge(e).lo;
  if (value == m.hi_value(e)) return m.edge(e).hi;
  const auto cuts = cuts_of_edge(e);
  const auto it = std::lower_bound(cuts.begin(), cuts.end(), value);
  if (it == cuts.end() || *it != value) return std::nullopt;
  // Cut nodes of one edge are consecutive and follow the edge's lower vertex.
  const std::size_t k = static_cast<std::size_t>(it - cuts.begin());
  return pieces_[edge_first_piece_[e] + k].hi;
}

SubLocation Subdivision::locate(const MiddleLocation& loc) const {
  switch (loc.kind) {
    case MiddleLocation::Kind::vertex:
      return {true, loc.id, loc.value};
    case MiddleLocation::Kind::edge: {
      if (const auto node = node_at(loc.id, loc.value)) return {true, *node, loc.value};
      const auto cuts = cuts_of_edge(loc.id);
      const auto k = static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), loc.value) - cuts.begin());
      return {false, edge_first_piece_[loc.id] + k, loc.value};
    }
    case MiddleLocation::Kind::none:
      break;
  }
  throw ValidationError("cannot locate a point outside the middle space");
}

std::pair<std::size_t, std::size_t> Subdivision::pieces_between(std::size_t e, double lo, double hi) const {
  const auto cuts = cuts_of_edge(e);
  const auto begin = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), lo) - cuts.begin());
  const auto end = static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), hi) - cuts.begin()) + 1;
  return {edge_first_piece_[e] + begin, edge_first_piece_[e] + end};
}

MiddleFunction::MiddleFunction(std::shared_ptr<const Subdivision> sub, std::vector<double> node_values,
                               std::vector<Affine> piece_maps)
    : sub_(std::move(sub)), node_values_(std::move(node_values)), piece_maps_(std::move(piece_maps)) {
  if (node_values_.size() != sub_->node_count() || piece_maps_.size() != sub_->piece_count()) {
    throw ValidationError("middle function does not match its subdivision");
  }
}

MiddleFunction MiddleFunction::light_factor(std::shared_ptr<const Subdivision> sub) {
  std::vector<double> nodes(sub->node_count());
  for (std::size_t n = 0; n < nodes.size(); ++n) nodes[n] = sub->node_value(n);
  std::vector<Affine> maps(sub->piece_count(), Affine{1.0, 0.0});
  return MiddleFunction(std::move(sub), std::move(nodes), std::move(maps));
}

MiddleFunction MiddleFunction::zero(std::shared_ptr<const Subdivision> sub) {
  std::vector<double> nodes(sub->node_count(), 0.0);
  std::vector<Affine> maps(sub->piece_count(), Affine{0.0, 0.0});
  return MiddleFunction(std::move(sub), std::move(nodes), std::move(maps));
}

double MiddleFunction::continuity_defect() const {
  double worst = 0.0;
  for (std::size_t p = 0; p < sub_->piece_count(); ++p) {
    const Piece& piece = sub_->piece(p);
    for (std::size_t n : {piece.lo, piece.hi}) {
      worst = std::max(worst, std::abs(piece_maps_[p](sub_->node_value(n)) - node_values_[n]));
    }
  }
  return worst;
}

namespace {

struct Refined {
  ScalarField field;
  std::vector<std::optional<SubLocation>> locations;
};

Refined refine(const Subdivision& sub) {
  const Factorization& fact = sub.factorization();
  const ScalarField& field = fact.field;
  const DomainGraph& g = field.domain();
  const auto f = field.values();

  std::vector<Id> ids;
  std::vector<double> values(f.begin(), f.end());
  std::vector<std::optional<SplitOrigin>> origins;
  std::vector<std::optional<SubLocation>> locations;
  ids.reserve(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    ids.push_back(g.vertex_id(v));
    origins.push_back(g.origin(v));
    const MiddleLocation& loc = fact.factor.vertex_location[v];
    if (loc.kind == MiddleLocation::Kind::none) {
      locations.emplace_back();
    } else {
      locations.push_back(sub.locate(loc));
    }
  }

  Id next_vertex = g.max_vertex_id() + 1;
  Id next_edge = g.max_edge_id() + 1;
  std::vector<EdgeSpec> specs;
  std::vector<EdgeSpec> tails;
  specs.reserve(g.edge_count());
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const DomainEdge& e = g.edge(k);
    const Id a = g.vertex_id(e.u);
    const Id b = g.vertex_id(e.v);
    if (!fact.factor.edge_image[k]) {
      specs.push_back({e.id, a, b});
      continue;
    }
    const std::size_t me = *fact.factor.edge_image[k];
    const double fu = f[e.u];
    const double fv = f[e.v];
    const auto cuts = sub.cuts_of_edge(me);
    auto first = std::upper_bound(cuts.begin(), cuts.end(), std::min(fu, fv));
    auto last = std::lower_bound(cuts.begin(), cuts.end(), std::max(fu, fv));
    std::vector<double> inner(first, last);
    if (fu > fv) std::reverse(inner.begin(), inner.end());
    if (inner.empty()) {
      specs.push_back({e.id, a, b});
      continue;
    }
    // Split origins are expressed on the original edge, as subdivide_edge does.
    const auto& oa = g.origin(e.u);
    const auto& ob = g.origin(e.v);
    const Id coarse = oa ? oa->edge_id : (ob ? ob->edge_id : e.id);
    const double ta = oa ? oa->t : 0.0;
    const double tb = ob ? ob->t : 1.0;
    Id prev = a;
    bool head = true;
    for (double y : inner) {
      const double t = (y - fu) / (fv - fu);
      const Id w = next_vertex++;
      ids.push_back(w);
      values.push_back(y);
      origins.push_back(SplitOrigin{coarse, ta + t * (tb - ta)});
      locations.push_back(SubLocation{true, *sub.node_at(me, y), y});
      if (head) {
        specs.push_back({e.id, prev, w});
        head = false;
      } else {
        tails.push_back({next_edge++, prev, w});
      }
      prev = w;
    }
    tails.push_back({next_edge++, prev, b});
  }
  specs.insert(specs.end(), tails.begin(), tails.end());
  auto domain = std::make_shared<const DomainGraph>(std::move(ids), specs, std::move(origins));
  return {ScalarField(std::move(domain), std::move(values)), std::move(locations)};
}

}  // namespace

PullbackDomain::PullbackDomain(std::shared_ptr<const Subdivision> sub)
    : sub_(std::move(sub)),
      locations_(),
      field_([this] {
        Refined r = refine(*sub_);
        locations_ = std::move(r.locations);
        return std::move(r.field);
      }()),
      original_vertices_(sub_->factorization().field.domain().vertex_count()) {}

ScalarField pull_back(const PullbackDomain& domain, const MiddleFunction& gamma) {
  if (gamma.subdivision_ptr() != domain.subdivision_ptr()) {
    throw ValidationError("pull_back: middle function lives on a different subdivision");
  }
  const auto& locs = domain.locations();
  std::vector<double> values(locs.size(), 0.0);
  for (std::size_t v = 0; v < locs.size(); ++v) {
    if (locs[v]) values[v] = gamma.evaluate(*locs[v]);
  }
  return ScalarField(domain.domain_ptr(), std::move(values));
}

}  // namespace varilet
