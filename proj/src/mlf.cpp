#include "varilet/mlf.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

#include "varilet/error.hpp"
#include "varilet/numeric.hpp"

namespace varilet {

const char* to_string(Criticality c) {
  switch (c) {
    case Criticality::minimum:
      return "minimum";
    case Criticality::maximum:
      return "maximum";
    case Criticality::saddle:
      return "saddle";
  }
  return "?";
}

MiddleSpace::MiddleSpace(std::vector<MiddleVertex> vertices, std::vector<MiddleEdge> edges,
                         std::size_t component_count, std::vector<std::size_t> degenerate_domain_components)
    : vertices_(std::move(vertices)),
      edges_(std::move(edges)),
      incidence_(vertices_.size()),
      component_count_(component_count),
      degenerate_(std::move(degenerate_domain_components)) {
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    incidence_[edges_[e].lo].push_back(e);
    incidence_[edges_[e].hi].push_back(e);
  }
}

namespace {

struct ContourClass {
  std::vector<std::size_t> up_edges;  // domain edges leaving upward
  std::size_t down = 0;
  std::size_t min_vertex = std::numeric_limits<std::size_t>::max();
  double value = 0.0;
  bool critical() const { return !(up_edges.size() == 1 && down == 1); }
  bool degenerate() const { return up_edges.empty() && down == 0; }
};

struct PendingEdge {
  std::size_t lo_class = 0;
  std::size_t hi_class = 0;
  std::size_t first_domain_edge = 0;
};

}  // namespace

Factorization factorize(const ScalarField& field) {
  const DomainGraph& g = field.domain();
  const std::size_t n = g.vertex_count();
  const auto f = field.values();

  // Contours through vertices: vertices joined by constant edges share one.
  DisjointSets contour(n);
  for (const DomainEdge& e : g.edges()) {
    if (f[e.u] == f[e.v]) contour.unite(e.u, e.v);
  }
  std::vector<std::size_t> class_of(n);
  std::vector<std::size_t> class_index(n, n);
  std::vector<ContourClass> classes;
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t r = contour.find(v);
    if (class_index[r] == n) {
      class_index[r] = classes.size();
      classes.emplace_back();
      classes.back().value = f[v];
    }
    class_of[v] = class_index[r];
    classes[class_of[v]].min_vertex = std::min(classes[class_of[v]].min_vertex, v);
  }
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const DomainEdge& e = g.edge(k);
    if (f[e.u] == f[e.v]) continue;
    const std::size_t lo = f[e.u] < f[e.v] ? e.u : e.v;
    const std::size_t hi = g.other_end(k, lo);
    classes[class_of[lo]].up_edges.push_back(k);
    ++classes[class_of[hi]].down;
  }

  // Middle vertices are the critical contour classes.
  std::vector<std::size_t> critical;
  std::vector<std::size_t> degenerate_components;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (classes[c].degenerate()) {
      degenerate_components.push_back(g.component_of(classes[c].min_vertex));
    } else if (classes[c].critical()) {
      critical.push_back(c);
    }
  }
  std::sort(critical.begin(), critical.end(), [&](std::size_t a, std::size_t b) {
    if (classes[a].value != classes[b].value) return classes[a].value < classes[b].value;
    return classes[a].min_vertex < classes[b].min_vertex;
  });
  std::sort(degenerate_components.begin(), degenerate_components.end());
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> middle_vertex_of(classes.size(), none);
  for (std::size_t i = 0; i < critical.size(); ++i) middle_vertex_of[critical[i]] = i;

  // Walk upward from every critical class through runs of regular classes.
  std::vector<PendingEdge> pending;
  std::vector<std::size_t> pending_of_domain_edge(g.edge_count(), none);
  std::vector<std::size_t> pending_of_class(classes.size(), none);
  for (std::size_t c : critical) {
    for (std::size_t start : classes[c].up_edges) {
      const std::size_t id = pending.size();
      std::size_t k = start;
      std::size_t cls;
      while (true) {
        pending_of_domain_edge[k] = id;
        const DomainEdge& e = g.edge(k);
        const std::size_t upper = f[e.u] > f[e.v] ? e.u : e.v;
        cls = class_of[upper];
        if (classes[cls].critical()) break;
        pending_of_class[cls] = id;
        k = classes[cls].up_edges.front();
      }
      pending.push_back({c, cls, start});
    }
  }

  std::vector<std::size_t> order(pending.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto key = [&](std::size_t p) {
      return std::make_tuple(middle_vertex_of[pending[p].lo_class], middle_vertex_of[pending[p].hi_class],
                             pending[p].first_domain_edge);
    };
    return key(a) < key(b);
  });
  std::vector<std::size_t> final_id(pending.size());
  for (std::size_t i = 0; i < order.size(); ++i) final_id[order[i]] = i;

  // Components are numbered in domain-component order, skipping constant ones.
  std::vector<std::size_t> component_map(g.component_count(), none);
  std::size_t component_count = 0;
  {
    std::vector<bool> live(g.component_count(), false);
    for (std::size_t c : critical) live[g.component_of(classes[c].min_vertex)] = true;
    for (std::size_t c = 0; c < live.size(); ++c) {
      if (live[c]) component_map[c] = component_count++;
    }
  }

  std::vector<MiddleVertex> vertices(critical.size());
  std::vector<std::size_t> up_count(critical.size(), 0), down_count(critical.size(), 0);
  std::vector<MiddleEdge> edges(pending.size());
  for (std::size_t p = 0; p < pending.size(); ++p) {
    const std::size_t lo = middle_vertex_of[pending[p].lo_class];
    const std::size_t hi = middle_vertex_of[pending[p].hi_class];
    edges[final_id[p]] = {lo, hi, component_map[g.component_of(classes[pending[p].lo_class].min_vertex)]};
    ++up_count[lo];
    ++down_count[hi];
  }
  for (std::size_t i = 0; i < critical.size(); ++i) {
    const ContourClass& cls = classes[critical[i]];
    vertices[i].value = cls.value;
    vertices[i].component = component_map[g.component_of(cls.min_vertex)];
    if (up_count[i] > 0 && down_count[i] > 0) {
      vertices[i].kind = Criticality::saddle;
    } else if (up_count[i] > 0) {
      vertices[i].kind = Criticality::minimum;
    } else {
      vertices[i].kind = Criticality::maximum;
    }
  }

  MonotoneFactor factor;
  factor.vertex_location.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t c = class_of[v];
    if (middle_vertex_of[c] != none) {
      factor.vertex_location[v] = MiddleLocation::at_vertex(middle_vertex_of[c], f[v]);
    } else if (pending_of_class[c] != none) {
      factor.vertex_location[v] = MiddleLocation::on_edge(final_id[pending_of_class[c]], f[v]);
    }
  }
  factor.edge_image.resize(g.edge_count());
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    if (pending_of_domain_edge[k] != none) factor.edge_image[k] = final_id[pending_of_domain_edge[k]];
  }

  MiddleSpace middle(std::move(vertices), std::move(edges), component_count, std::move(degenerate_components));
  return Factorization{field, std::move(middle), std::move(factor)};
}

std::size_t count_contours(const ScalarField& field, double level) {
  const DomainGraph& g = field.domain();
  const auto f = field.values();
  std::size_t count = 0;
  for (const DomainEdge& e : g.edges()) {
    const double lo = std::min(f[e.u], f[e.v]);
    const double hi = std::max(f[e.u], f[e.v]);
    if (lo < level && level < hi) ++count;  // an isolated crossing point
  }
  std::vector<bool> seen(g.vertex_count(), false);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < g.vertex_count(); ++s) {
    if (seen[s] || f[s] != level) continue;
    ++count;
    seen[s] = true;
    queue.push_back(s);
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t k : g.incident(v)) {
        const std::size_t w = g.other_end(k, v);
        if (!seen[w] && f[w] == level) {
          seen[w] = true;
          queue.push_back(w);
        }
      }
    }
  }
  return count;
}

std::size_t points_at_level(const MiddleSpace& middle, double level) {
  std::size_t count = 0;
  for (const MiddleVertex& v : middle.vertices()) count += v.value == level ? 1 : 0;
  for (std::size_t e = 0; e < middle.edge_count(); ++e) {
    if (middle.lo_value(e) < level && level < middle.hi_value(e)) ++count;
  }
  return count;
}

namespace {

std::vector<double> sample_levels(std::span<const double> values, std::size_t max_levels) {
  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> levels;
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    levels.push_back(distinct[i]);
    if (i + 1 < distinct.size()) levels.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  }
  if (levels.size() > max_levels) {
    std::vector<double> thinned;
    const double step = static_cast<double>(levels.size() - 1) / static_cast<double>(max_levels - 1);
    for (std::size_t k = 0; k < max_levels; ++k) {
      thinned.push_back(levels[static_cast<std::size_t>(std::llround(step * static_cast<double>(k)))]);
    }
    levels = std::move(thinned);
  }
  return levels;
}

}  // namespace

VerificationReport verify_factorization(const Factorization& fact) {
  VerificationReport report;
  const ScalarField& field = fact.field;
  const DomainGraph& g = field.domain();
  const MiddleSpace& m = fact.middle;
  const MonotoneFactor& mu = fact.factor;

  // Factorization identity, compared exactly.
  {
    std::size_t bad = 0;
    double worst = 0.0;
    std::string first;
    std::vector<bool> degenerate(g.component_count(), false);
    for (std::size_t c : m.degenerate_domain_components()) degenerate[c] = true;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      const MiddleLocation& loc = mu.vertex_location[v];
      double lambda = std::numeric_limits<double>::quiet_NaN();
      bool placed = true;
      switch (loc.kind) {
        case MiddleLocation::Kind::vertex:
          placed = loc.id < m.vertex_count();
          if (placed) lambda = m.value(loc.id);
          break;
        case MiddleLocation::Kind::edge:
          placed = loc.id < m.edge_count() && m.lo_value(loc.id) < loc.value && loc.value < m.hi_value(loc.id);
          lambda = loc.value;
          break;
        case MiddleLocation::Kind::none:
          placed = degenerate[g.component_of(v)];
          lambda = field.value(v);
          break;
      }
      if (!placed || lambda != field.value(v)) {
        ++bad;
        worst = std::max(worst, std::isnan(lambda) ? std::numeric_limits<double>::infinity()
                                                   : std::abs(lambda - field.value(v)));
        if (first.empty()) first = "domain vertex " + std::to_string(g.vertex_id(v));
      }
    }
    report.add("factorization_identity", "light factor of the monotone image equals f at every vertex", bad == 0,
               worst, 0.0, bad == 0 ? "" : std::to_string(bad) + " mismatches, first at " + first);
  }

  // Every non-constant domain edge runs inside its image edge.
  {
    std::size_t bad = 0;
    for (std::size_t k = 0; k < g.edge_count(); ++k) {
      const DomainEdge& e = g.edge(k);
      const bool constant = field.value(e.u) == field.value(e.v);
      if (constant != !mu.edge_image[k].has_value()) {
        ++bad;
        continue;
      }
      if (constant) {
        if (!(mu.vertex_location[e.u] == mu.vertex_location[e.v])) ++bad;
        continue;
      }
      const std::size_t me = *mu.edge_image[k];
      for (std::size_t end : {e.u, e.v}) {
        const MiddleLocation& loc = mu.vertex_location[end];
        const bool ok = (loc.kind == MiddleLocation::Kind::edge && loc.id == me) ||
                        (loc.kind == MiddleLocation::Kind::vertex && me < m.edge_count() &&
                         (m.edge(me).lo == loc.id || m.edge(me).hi == loc.id));
        if (!ok) ++bad;
      }
    }
    report.add("edge_images", "each domain edge maps monotonically into one middle edge", bad == 0,
               static_cast<double>(bad));
  }

  // Contours through middle vertices are connected in the domain.
  {
    std::vector<std::vector<std::size_t>> preimage(m.vertex_count());
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      const MiddleLocation& loc = mu.vertex_location[v];
      if (loc.kind == MiddleLocation::Kind::vertex && loc.id < m.vertex_count()) preimage[loc.id].push_back(v);
    }
    std::size_t bad = 0;
    std::vector<int> mark(g.vertex_count(), -1);
    for (std::size_t p = 0; p < preimage.size(); ++p) {
      if (preimage[p].empty()) {
        ++bad;
        continue;
      }
      for (std::size_t v : preimage[p]) mark[v] = static_cast<int>(p);
      std::vector<std::size_t> stack{preimage[p].front()};
      std::size_t reached = 0;
      mark[preimage[p].front()] = -2 - static_cast<int>(p);
      while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        ++reached;
        for (std::size_t k : g.incident(v)) {
          const std::size_t w = g.other_end(k, v);
          if (mark[w] == static_cast<int>(p) && field.value(w) == field.value(v)) {
            mark[w] = -2 - static_cast<int>(p);
            stack.push_back(w);
          }
        }
      }
      if (reached != preimage[p].size()) ++bad;
    }
    report.add("connected_preimages", "preimage of every middle vertex is one connected contour", bad == 0,
               static_cast<double>(bad));
  }

  // Level-set agreement with direct contour counting.
  {
    const auto levels = sample_levels(field.values(), 96);
    std::size_t bad = 0;
    std::string first;
    for (double y : levels) {
      const std::size_t direct = count_contours(field, y);
      const std::size_t middle = points_at_level(m, y);
      if (direct != middle) {
        ++bad;
        if (first.empty()) {
          first = "level " + std::to_string(y) + ": " + std::to_string(direct) + " contours vs " +
                  std::to_string(middle) + " middle points";
        }
      }
    }
    report.add("level_set_agreement", "contour count equals middle-space points at sampled levels", bad == 0,
               static_cast<double>(bad), 0.0, first);
  }

  // Structure of the middle space itself.
  {
    std::size_t loops = 0, flat = 0, regular = 0;
    for (std::size_t e = 0; e < m.edge_count(); ++e) {
      if (m.edge(e).lo == m.edge(e).hi) ++loops;
      if (!(m.lo_value(e) < m.hi_value(e))) ++flat;
    }
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
      std::size_t up = 0, down = 0;
      for (std::size_t e : m.incident(v)) (m.edge(e).lo == v ? up : down) += 1;
      if (up == 1 && down == 1) ++regular;
    }
    report.add("strictly_monotone_edges", "no self-loops and the light factor strictly increases along edges",
               loops == 0 && flat == 0, static_cast<double>(loops + flat));
    report.add("minimal_vertices", "no regular vertex with one rising and one falling edge remains", regular == 0,
               static_cast<double>(regular));
  }

  report.add("component_count", "middle components plus constant components equal domain components",
             m.component_count() + m.degenerate_domain_components().size() == g.component_count(), 0.0, 0.0);
  report.add("nondegenerate_components", "no domain component carries a constant field",
             m.degenerate_domain_components().empty(), static_cast<double>(m.degenerate_domain_components().size()),
             0.0,
             m.degenerate_domain_components().empty()
                 ? ""
                 : std::to_string(m.degenerate_domain_components().size()) + " constant component(s) excluded");
  return report;
}

MiddleSignature signature(const MiddleSpace& middle) {
  MiddleSignature s;
  for (const MiddleVertex& v : middle.vertices()) s.vertex_values.push_back(v.value);
  for (std::size_t e = 0; e < middle.edge_count(); ++e) s.edges.emplace_back(middle.lo_value(e), middle.hi_value(e));
  std::sort(s.vertex_values.begin(), s.vertex_values.end());
  std::sort(s.edges.begin(), s.edges.end());
  return s;
}

namespace {

bool close(double a, double b, double rel_tol, double scale) {
  if (rel_tol == 0.0) return a == b;
  return std::abs(a - b) <= rel_tol * scale;
}

}  // namespace

bool signatures_match(const MiddleSignature& a, const MiddleSignature& b, double rel_tol, std::string* why) {
  const auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (a.vertex_values.size() != b.vertex_values.size()) {
    return fail("vertex counts differ: " + std::to_string(a.vertex_values.size()) + " vs " +
                std::to_string(b.vertex_values.size()));
  }
  if (a.edges.size() != b.edges.size()) {
    return fail("edge counts differ: " + std::to_string(a.edges.size()) + " vs " + std::to_string(b.edges.size()));
  }
  double scale = 1.0;
  for (double v : a.vertex_values) scale = std::max(scale, std::abs(v));
  for (double v : b.vertex_values) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < a.vertex_values.size(); ++i) {
    if (!close(a.vertex_values[i], b.vertex_values[i], rel_tol, scale)) {
      return fail("vertex values differ at rank " + std::to_string(i));
    }
  }
  // Sorted edges usually align; near-ties under tolerance need a matching.
  bool aligned = true;
  for (std::size_t i = 0; i < a.edges.size() && aligned; ++i) {
    aligned = close(a.edges[i].first, b.edges[i].first, rel_tol, scale) &&
              close(a.edges[i].second, b.edges[i].second, rel_tol, scale);
  }
  if (aligned) return true;
  if (rel_tol == 0.0) return fail("edge multisets differ");
  std::vector<bool> used(b.edges.size(), false);
  const double window = rel_tol * scale;
  for (const auto& ea : a.edges) {
    auto it = std::lower_bound(b.edges.begin(), b.edges.end(), std::make_pair(ea.first - window, -HUGE_VAL));
    bool found = false;
    for (; it != b.edges.end() && it->first <= ea.first + window; ++it) {
      const std::size_t j = static_cast<std::size_t>(it - b.edges.begin());
      if (!used[j] && close(ea.second, it->second, rel_tol, scale)) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return fail("no partner for edge (" + std::to_string(ea.first) + ", " + std::to_string(ea.second) + ")");
  }
  return true;
}

nlohmann::json middle_space_to_json(const Factorization& fact) {
  const MiddleSpace& m = fact.middle;
  const DomainGraph& g = fact.field.domain();
  nlohmann::json vertices = nlohmann::json::array();
  for (std::size_t v = 0; v < m.vertex_count(); ++v) {
    vertices.push_back({{"id", v},
                        {"value", m.value(v)},
                        {"kind", to_string(m.vertex(v).kind)},
                        {"component", m.vertex(v).component}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    edges.push_back({{"id", e}, {"lo", m.edge(e).lo}, {"hi", m.edge(e).hi}, {"length", m.length(e)}});
  }
  nlohmann::json mu = nlohmann::json::array();
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const MiddleLocation& loc = fact.factor.vertex_location[v];
    nlohmann::json item = {{"domain_vertex", g.vertex_id(v)}};
    switch (loc.kind) {
      case MiddleLocation::Kind::vertex:
        item["vertex"] = loc.id;
        break;
      case MiddleLocation::Kind::edge:
        item["edge"] = loc.id;
        item["value"] = loc.value;
        break;
      case MiddleLocation::Kind::none:
        item["degenerate"] = true;
        break;
    }
    mu.push_back(std::move(item));
  }
  return {{"format", "varilet.middle"},
          {"version", 1},
          {"components", m.component_count()},
          {"degenerate_domain_components", m.degenerate_domain_components()},
          {"vertices", std::move(vertices)},
          {"edges", std::move(edges)},
          {"mu", std::move(mu)}};
}

}  // namespace varilet
