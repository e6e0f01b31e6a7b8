#include "varilet/lens.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "varilet/error.hpp"
#include "varilet/numeric.hpp"
#include "varilet/ttv.hpp"

namespace varilet {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::vector<std::pair<std::size_t, double>> collect_cuts(std::span<const Region> regions) {
  std::vector<std::pair<std::size_t, double>> cuts;
  for (const Region& r : regions) {
    for (const Fragment& f : r.fragments) {
      cuts.emplace_back(f.edge, f.lo);
      cuts.emplace_back(f.edge, f.hi);
    }
  }
  return cuts;
}

std::vector<std::size_t> region_to_pieces(const Subdivision& sub, const Region& region) {
  std::vector<std::size_t> out;
  for (const Fragment& f : region.fragments) {
    const auto [b, e] = sub.pieces_between(f.edge, f.lo, f.hi);
    for (std::size_t p = b; p < e; ++p) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> pieces_nodes(const Subdivision& sub, std::span<const std::size_t> pieces) {
  std::vector<std::size_t> nodes;
  nodes.reserve(2 * pieces.size());
  for (std::size_t p : pieces) {
    nodes.push_back(sub.piece(p).lo);
    nodes.push_back(sub.piece(p).hi);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

// Nodes of the piece set touching a piece outside it. `mask` marks the set.
std::vector<std::size_t> boundary_nodes(const Subdivision& sub, std::span<const std::size_t> pieces,
                                        const std::vector<char>& mask) {
  std::vector<std::size_t> out;
  for (std::size_t n : pieces_nodes(sub, pieces)) {
    const auto inc = sub.node_pieces(n);
    if (std::any_of(inc.begin(), inc.end(), [&](std::size_t p) { return !mask[p]; })) out.push_back(n);
  }
  return out;
}

bool pieces_connected(const Subdivision& sub, std::span<const std::size_t> pieces, const std::vector<char>& mask) {
  if (pieces.empty()) return true;
  std::vector<char> seen(sub.piece_count(), 0);
  std::vector<std::size_t> stack{pieces.front()};
  seen[pieces.front()] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const std::size_t p = stack.back();
    stack.pop_back();
    ++reached;
    for (std::size_t n : {sub.piece(p).lo, sub.piece(p).hi}) {
      for (std::size_t q : sub.node_pieces(n)) {
        if (mask[q] && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
  }
  return reached == pieces.size();
}

bool is_whole_component(const MiddleSpace& m, const Region& r) {
  if (r.fragments.empty()) return false;
  return normalize_fragments(r.fragments) == whole_component(m, r.component).fragments;
}

}  // namespace

MiddleLocation resolve_seed(const Factorization& fact, const Seed& seed) {
  const MiddleSpace& m = fact.middle;
  switch (seed.kind) {
    case Seed::Kind::domain_vertex: {
      const auto v = fact.field.domain().index_of(seed.id);
      if (!v) throw LensError("seed references unknown domain vertex " + std::to_string(seed.id));
      const MiddleLocation& loc = fact.factor.vertex_location[*v];
      if (loc.kind == MiddleLocation::Kind::none) {
        throw LensError("seed vertex " + std::to_string(seed.id) + " lies on a constant component");
      }
      return loc;
    }
    case Seed::Kind::middle_vertex:
      if (seed.id < 0 || static_cast<std::size_t>(seed.id) >= m.vertex_count()) {
        throw LensError("seed references unknown middle vertex " + std::to_string(seed.id));
      }
      return MiddleLocation::at_vertex(static_cast<std::size_t>(seed.id), m.value(static_cast<std::size_t>(seed.id)));
    case Seed::Kind::middle_edge: {
      if (seed.id < 0 || static_cast<std::size_t>(seed.id) >= m.edge_count()) {
        throw LensError("seed references unknown middle edge " + std::to_string(seed.id));
      }
      const auto e = static_cast<std::size_t>(seed.id);
      if (!(m.lo_value(e) <= seed.value && seed.value <= m.hi_value(e))) {
        throw LensError("seed value " + fmt(seed.value) + " is outside middle edge " + std::to_string(e));
      }
      if (seed.value == m.lo_value(e)) return MiddleLocation::at_vertex(m.edge(e).lo, seed.value);
      if (seed.value == m.hi_value(e)) return MiddleLocation::at_vertex(m.edge(e).hi, seed.value);
      return MiddleLocation::on_edge(e, seed.value);
    }
  }
  throw LensError("unknown seed kind");
}

Region threshold_region(const Factorization& fact, const ThresholdCut& cut, bool closed) {
  const MiddleSpace& m = fact.middle;
  const double level = cut.level;
  const bool up = cut.direction == Direction::up;
  if (!std::isfinite(level)) throw LensError("threshold level must be finite");
  auto above = [&](double x) { return up ? x > level : x < level; };
  auto inside = [&](double x) { return closed ? (up ? x >= level : x <= level) : above(x); };

  const MiddleLocation seed = resolve_seed(fact, cut.seed);
  std::size_t start = 0;
  if (seed.kind == MiddleLocation::Kind::vertex) {
    start = seed.id;
  } else {
    start = up ? m.edge(seed.id).hi : m.edge(seed.id).lo;
  }
  const std::size_t component = m.vertex(start).component;
  if (!above(seed.value)) {
    bool any = false;
    for (const MiddleVertex& v : m.vertices()) any = any || (v.component == component && above(v.value));
    if (!any) {
      throw LensError("empty region: no point of component " + std::to_string(component) + " lies " +
                      (up ? "above " : "below ") + fmt(level));
    }
    throw LensError("seed at " + fmt(seed.value) + " lies outside the " + (up ? "superlevel" : "sublevel") +
                    " set at " + fmt(level));
  }

  Region region;
  region.component = component;
  region.boundary_level = level;
  std::vector<char> seen(m.vertex_count(), 0);
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  bool partial = false;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    const double lv = m.value(v);
    for (std::size_t e : m.incident(v)) {
      const std::size_t w = m.other_end(e, v);
      if (inside(m.value(w))) {
        region.fragments.push_back({e, m.lo_value(e), m.hi_value(e)});
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
        continue;
      }
      partial = true;
      if (lv == level) continue;
      region.fragments.push_back(up ? Fragment{e, level, lv} : Fragment{e, lv, level});
    }
  }
  if (!partial) {
    throw LensError("threshold region at " + fmt(level) + " covers its whole component " + std::to_string(component));
  }
  region.fragments = normalize_fragments(std::move(region.fragments));
  return region;
}

LensLayout::LensLayout(std::shared_ptr<const Factorization> fact, const Lens& lens) {
  const MiddleSpace& m = fact->middle;
  const std::size_t n = lens.size();
  bool fit = true;
  for (const Region& r : lens.regions) fit = fit && fragments_fit(m, r.fragments);
  report_.add("fragments_fit", "every region fragment lies within a middle edge", fit);
  const auto cuts = fit ? collect_cuts(lens.regions) : std::vector<std::pair<std::size_t, double>>{};
  sub_ = std::make_shared<const Subdivision>(std::move(fact), cuts);
  const Subdivision& sub = *sub_;
  const std::size_t np = sub.piece_count();

  region_pieces_.assign(n, {});
  region_boundary_.assign(n, {});
  support_pieces_.assign(n, {});
  support_boundary_.assign(n, {});
  owner_.assign(np, npos);
  predecessor_.assign(n, std::nullopt);
  successors_.assign(n, {});
  depth_.assign(n, 0);
  level_.assign(n, 0.0);
  component_.assign(n, 0);

  std::string empty_detail, conn_detail, bound_detail;
  std::size_t empty_count = 0, disconnected = 0, nonconstant = 0;
  std::vector<char> mask(np, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (fit) region_pieces_[i] = region_to_pieces(sub, lens.regions[i]);
    const auto& pieces = region_pieces_[i];
    if (pieces.empty()) {
      if (!empty_count++) empty_detail = "region " + std::to_string(i) + " is empty";
      continue;
    }
    for (std::size_t p : pieces) mask[p] = 1;
    component_[i] = sub.piece(pieces.front()).component;
    if (!pieces_connected(sub, pieces, mask)) {
      if (!disconnected++) conn_detail = "region " + std::to_string(i) + " is disconnected";
    }
    region_boundary_[i] = boundary_nodes(sub, pieces, mask);
    for (std::size_t p : pieces) mask[p] = 0;

    const auto& bd = region_boundary_[i];
    if (!bd.empty()) {
      const double v0 = sub.node_value(bd.front());
      level_[i] = v0;
      bool constant = std::all_of(bd.begin(), bd.end(), [&](std::size_t b) { return sub.node_value(b) == v0; });
      const auto& declared = lens.regions[i].boundary_level;
      if (declared && *declared != v0) constant = false;
      if (!constant && !nonconstant++) {
        bound_detail = "region " + std::to_string(i) + " has boundary values";
        for (std::size_t b : bd) bound_detail += " " + fmt(sub.node_value(b));
      }
    }
  }
  report_.add("nonempty", "every region has positive length", empty_count == 0, static_cast<double>(empty_count),
              0.0, empty_detail);
  report_.add("connected", "every region is connected", disconnected == 0, static_cast<double>(disconnected), 0.0,
              conn_detail);
  report_.add("constant_boundary", "the light factor is constant on each region boundary", nonconstant == 0,
              static_cast<double>(nonconstant), 0.0, bound_detail);

  // Roots: whole components, listed first, one per component.
  std::vector<std::size_t> root_of(m.component_count(), npos);
  bool roots_ok = true;
  std::string roots_detail;
  while (root_count_ < n && !region_pieces_[root_count_].empty() && region_boundary_[root_count_].empty()) {
    const std::size_t c = component_[root_count_];
    if (root_of[c] != npos) {
      roots_ok = false;
      roots_detail = "component " + std::to_string(c) + " has two roots";
    }
    root_of[c] = root_count_++;
  }
  for (std::size_t i = root_count_; i < n; ++i) {
    if (!region_pieces_[i].empty() && region_boundary_[i].empty()) {
      roots_ok = false;
      roots_detail = "root region " + std::to_string(i) + " is not among the leading indices";
    }
  }
  for (std::size_t c = 0; c < root_of.size(); ++c) {
    if (root_of[c] == npos) {
      roots_ok = false;
      if (roots_detail.empty()) roots_detail = "component " + std::to_string(c) + " has no root";
    }
  }
  report_.add("roots", "each middle component is a region, and these come first", roots_ok, 0.0, 0.0, roots_detail);

  // Sweep in index order: every region must sit inside a single earlier one
  // and touch no other earlier region except its ancestors.
  std::vector<std::vector<std::size_t>> node_regions(sub.node_count());
  std::size_t violations = 0, duplicates = 0;
  std::string nest_detail, dup_detail;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pieces = region_pieces_[i];
    if (pieces.empty()) continue;
    if (i >= root_count_) {
      std::size_t k = owner_[pieces.front()];
      const bool single = k != npos && std::all_of(pieces.begin(), pieces.end(), [&](std::size_t p) {
                            return owner_[p] == k;
                          });
      if (!single) {
        if (!violations++) nest_detail = "region " + std::to_string(i) + " is not inside one earlier region";
      } else {
        predecessor_[i] = k;
        depth_[i] = depth_[k] + 1;
        successors_[k].push_back(i);
        if (region_pieces_[k].size() == pieces.size()) {
          if (!duplicates++) dup_detail = "regions " + std::to_string(k) + " and " + std::to_string(i) + " coincide";
        }
        bool touching = false;
        for (std::size_t node : pieces_nodes(sub, pieces)) {
          for (std::size_t r : node_regions[node]) touching = touching || !contains(r, i);
        }
        if (touching && !violations++) {
          nest_detail = "region " + std::to_string(i) + " meets an earlier region it is not nested in";
        }
      }
    } else {
      const bool fresh = std::all_of(pieces.begin(), pieces.end(), [&](std::size_t p) { return owner_[p] == npos; });
      if (!fresh && !violations++) nest_detail = "root " + std::to_string(i) + " overlaps another root";
    }
    for (std::size_t p : pieces) owner_[p] = i;
    for (std::size_t node : pieces_nodes(sub, pieces)) node_regions[node].push_back(i);
  }
  report_.add("nested", "any two regions are nested or disjoint", violations == 0, static_cast<double>(violations), 0.0,
              nest_detail);
  report_.add("distinct", "no two regions coincide", duplicates == 0, static_cast<double>(duplicates), 0.0,
              dup_detail);

  std::size_t uncovered = 0;
  for (std::size_t p = 0; p < np; ++p) {
    if (owner_[p] == npos) {
      ++uncovered;
    } else {
      support_pieces_[owner_[p]].push_back(p);
    }
  }
  report_.add("cover", "the regions cover the middle space", uncovered == 0, static_cast<double>(uncovered));

  std::size_t empty_supports = 0;
  std::string support_detail;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sp = support_pieces_[i];
    if (sp.empty()) {
      if (!empty_supports++) support_detail = "region " + std::to_string(i) + " is covered by later regions";
      continue;
    }
    for (std::size_t p : sp) mask[p] = 1;
    support_boundary_[i] = boundary_nodes(sub, sp, mask);
    for (std::size_t p : sp) mask[p] = 0;
  }
  report_.add("supports_nonempty", "every support has positive length", empty_supports == 0,
              static_cast<double>(empty_supports), 0.0, support_detail);
}

bool LensLayout::contains(std::size_t i, std::size_t j) const {
  std::optional<std::size_t> cur = j;
  while (cur) {
    if (*cur == i) return true;
    cur = predecessor_[*cur];
  }
  return false;
}

MiddleLocation LensLayout::node_location(std::size_t node) const {
  const MiddleNode& nd = sub_->node(node);
  if (nd.vertex) return MiddleLocation::at_vertex(*nd.vertex, nd.value);
  return MiddleLocation::on_edge(nd.edge, nd.value);
}

Region LensLayout::pieces_to_region(std::span<const std::size_t> pieces) const {
  Region r;
  for (std::size_t p : pieces) {
    const Piece& pc = sub_->piece(p);
    r.fragments.push_back({pc.edge, sub_->node_value(pc.lo), sub_->node_value(pc.hi)});
  }
  if (!pieces.empty()) r.component = sub_->piece(pieces.front()).component;
  r.fragments = normalize_fragments(std::move(r.fragments));
  return r;
}

VerificationReport validate_lens(const std::shared_ptr<const Factorization>& fact, const Lens& lens) {
  return LensLayout(fact, lens).report();
}

namespace {

void require_valid(const LensLayout& layout) {
  if (layout.valid()) return;
  std::string msg = "invalid lens:";
  for (const CheckResult& c : layout.report().checks()) {
    if (!c.passed) msg += " " + c.name + (c.detail.empty() ? "" : " (" + c.detail + ")");
  }
  throw LensError(msg);
}

}  // namespace

std::vector<Support> supports(const LensLayout& layout) {
  require_valid(layout);
  std::vector<Support> out(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    out[i].index = i;
    out[i].region = layout.pieces_to_region(layout.support_pieces(i));
    if (!layout.is_root(i)) out[i].region.boundary_level = layout.boundary_level(i);
    for (std::size_t node : layout.support_boundary(i)) out[i].boundary.push_back(layout.node_location(node));
  }
  return out;
}

std::vector<LinkPair> link_pairs(const LensLayout& layout) {
  require_valid(layout);
  const Subdivision& sub = layout.subdivision();
  std::vector<LinkPair> out;
  for (std::size_t i = layout.root_count(); i < layout.size(); ++i) {
    const std::size_t k = *layout.predecessor(i);
    std::optional<std::size_t> found;
    for (std::size_t node : layout.region_boundary(i)) {
      const auto inc = sub.node_pieces(node);
      if (std::any_of(inc.begin(), inc.end(), [&](std::size_t p) { return layout.owner(p) == k; })) {
        found = node;
        break;
      }
    }
    if (!found) throw LensError("region " + std::to_string(i) + " does not touch the support of its predecessor");
    const MiddleLocation loc = layout.node_location(*found);
    out.push_back({k, i, loc, loc, *found, loc.value});
  }
  return out;
}

std::vector<ComplementComponent> complement_components(const Subdivision& sub, std::span<const std::size_t> support) {
  std::vector<char> in_support(sub.piece_count(), 0);
  std::vector<char> component_used(sub.middle().component_count(), 0);
  for (std::size_t p : support) {
    in_support[p] = 1;
    component_used[sub.piece(p).component] = 1;
  }
  auto touches_support = [&](std::size_t node) {
    const auto inc = sub.node_pieces(node);
    return std::any_of(inc.begin(), inc.end(), [&](std::size_t p) { return in_support[p] != 0; });
  };
  std::vector<char> seen(sub.piece_count(), 0);
  std::vector<ComplementComponent> out;
  for (std::size_t start = 0; start < sub.piece_count(); ++start) {
    if (in_support[start] || seen[start] || !component_used[sub.piece(start).component]) continue;
    ComplementComponent cc;
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      cc.pieces.push_back(p);
      for (std::size_t node : {sub.piece(p).lo, sub.piece(p).hi}) {
        if (touches_support(node)) {
          cc.boundary.push_back(node);
          continue;
        }
        for (std::size_t q : sub.node_pieces(node)) {
          if (!in_support[q] && !seen[q]) {
            seen[q] = 1;
            stack.push_back(q);
          }
        }
      }
    }
    std::sort(cc.pieces.begin(), cc.pieces.end());
    std::sort(cc.boundary.begin(), cc.boundary.end());
    cc.boundary.erase(std::unique(cc.boundary.begin(), cc.boundary.end()), cc.boundary.end());
    out.push_back(std::move(cc));
  }
  return out;
}

Lens order_lens(const Factorization& fact, std::vector<Region> regions, std::vector<RegionSpec> specs) {
  const MiddleSpace& m = fact.middle;
  if (specs.size() != regions.size()) specs.resize(regions.size());
  for (Region& r : regions) {
    if (!fragments_fit(m, r.fragments)) throw LensError("region does not lie on the middle space");
    r.fragments = normalize_fragments(std::move(r.fragments));
    if (r.fragments.empty()) throw LensError("empty region");
    r.component = m.edge(r.fragments.front().edge).component;
  }

  // Roots first (one per component), then remaining regions by size so that
  // containers precede their contents.
  std::vector<Region> all;
  std::vector<RegionSpec> all_specs;
  std::vector<char> has_root(m.component_count(), 0);
  std::vector<std::size_t> given_root(regions.size(), 0);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (is_whole_component(m, regions[i])) {
      if (has_root[regions[i].component]) {
        throw LensError("two regions cover component " + std::to_string(regions[i].component));
      }
      has_root[regions[i].component] = 1;
      given_root[i] = 1;
    }
  }
  std::vector<std::size_t> order;  // positions in `all` for input regions
  for (std::size_t c = 0; c < m.component_count(); ++c) {
    auto it = std::find_if(regions.begin(), regions.end(), [&](const Region& r) {
      return given_root[static_cast<std::size_t>(&r - regions.data())] && r.component == c;
    });
    if (it != regions.end()) {
      const auto i = static_cast<std::size_t>(it - regions.begin());
      all.push_back(regions[i]);
      all.back().boundary_level.reset();
      all_specs.push_back(specs[i]);
    } else {
      all.push_back(whole_component(m, c));
      RegionSpec root;
      root.kind = RegionSpec::Kind::root;
      root.component = c;
      all_specs.push_back(root);
    }
  }
  const std::size_t roots = all.size();
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (!given_root[i]) rest.push_back(i);
  }
  std::vector<double> length(regions.size(), 0.0);
  for (std::size_t i : rest) length[i] = ttv_restricted(m, regions[i]);
  std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) { return length[a] > length[b]; });
  for (std::size_t i : rest) {
    all.push_back(regions[i]);
    all_specs.push_back(specs[i]);
  }

  Lens staged{all, all_specs};
  auto fact_ptr = std::make_shared<const Factorization>(fact);
  LensLayout layout(fact_ptr, staged);
  require_valid(layout);

  std::vector<std::size_t> idx(all.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::size_t> input_pos(all.size(), 0);
  for (std::size_t k = 0; k < rest.size(); ++k) input_pos[roots + k] = rest[k];
  std::stable_sort(idx.begin() + static_cast<std::ptrdiff_t>(roots), idx.end(), [&](std::size_t a, std::size_t b) {
    if (layout.depth(a) != layout.depth(b)) return layout.depth(a) < layout.depth(b);
    const double la = length[input_pos[a]];
    const double lb = length[input_pos[b]];
    if (la != lb) return la > lb;
    return input_pos[a] < input_pos[b];
  });
  Lens out;
  for (std::size_t i : idx) {
    out.regions.push_back(std::move(all[i]));
    out.specs.push_back(std::move(all_specs[i]));
  }
  return out;
}

Lens build_threshold_lens(const Factorization& fact, std::span<const ThresholdCut> cuts) {
  std::vector<Region> regions;
  std::vector<RegionSpec> specs;
  for (const ThresholdCut& cut : cuts) {
    regions.push_back(threshold_region(fact, cut, true));
    RegionSpec spec;
    spec.kind = RegionSpec::Kind::threshold;
    spec.cut = cut;
    specs.push_back(spec);
  }
  return order_lens(fact, std::move(regions), std::move(specs));
}

namespace {

struct Branch {
  std::size_t extremum = 0;
  std::size_t saddle = 0;
  double persistence = 0.0;
  Direction direction = Direction::up;
};

// Pairs each non-essential extremum with the saddle where its branch merges
// into an older one (elder rule), sweeping down (maxima) or up (minima).
std::vector<Branch> pair_extrema(const MiddleSpace& m, Direction dir) {
  const bool up = dir == Direction::up;
  std::vector<std::size_t> order(m.vertex_count());
  std::iota(order.begin(), order.end(), 0);
  // Vertices are sorted by value already; a descending sweep reverses them.
  if (up) std::reverse(order.begin(), order.end());
  auto older = [&](std::size_t a, std::size_t b) {  // a's extremum is more extreme than b's
    if (m.value(a) != m.value(b)) return up ? m.value(a) > m.value(b) : m.value(a) < m.value(b);
    return a < b;
  };
  DisjointSets sets(m.vertex_count());
  std::vector<std::size_t> extremum(m.vertex_count());
  std::iota(extremum.begin(), extremum.end(), 0);
  std::vector<char> done(m.vertex_count(), 0);
  std::vector<Branch> out;
  for (std::size_t v : order) {
    std::vector<std::size_t> roots;
    for (std::size_t e : m.incident(v)) {
      const std::size_t w = m.other_end(e, v);
      if (!done[w]) continue;
      const std::size_t r = sets.find(w);
      if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
    }
    done[v] = 1;
    if (roots.empty()) continue;
    std::size_t eldest = roots.front();
    for (std::size_t r : roots) {
      if (older(extremum[r], extremum[eldest])) eldest = r;
    }
    const std::size_t keep = extremum[eldest];
    for (std::size_t r : roots) {
      if (r == eldest) continue;
      const std::size_t x = extremum[r];
      out.push_back({x, v, std::abs(m.value(x) - m.value(v)), dir});
    }
    for (std::size_t r : roots) sets.unite(r, v);
    extremum[sets.find(v)] = keep;
  }
  return out;
}

}  // namespace

Lens build_branch_lens(const Factorization& fact, double min_amplitude) {
  const MiddleSpace& m = fact.middle;
  std::vector<Branch> branches = pair_extrema(m, Direction::up);
  for (const Branch& b : pair_extrema(m, Direction::down)) branches.push_back(b);
  std::vector<Region> candidates;
  std::vector<double> persistence;
  for (const Branch& b : branches) {
    if (!(b.persistence > 0.0) || b.persistence < min_amplitude) continue;
    ThresholdCut cut{m.value(b.saddle), b.direction, Seed{Seed::Kind::middle_vertex, static_cast<Id>(b.extremum), 0.0}};
    Region r = threshold_region(fact, cut, false);
    if (is_whole_component(m, r)) continue;
    candidates.push_back(std::move(r));
    persistence.push_back(b.persistence);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return persistence[a] > persistence[b]; });

  auto fact_ptr = std::make_shared<const Factorization>(fact);
  const Subdivision sub(fact_ptr, collect_cuts(candidates));
  std::vector<std::vector<std::size_t>> piece_regions(sub.piece_count());
  std::vector<std::vector<std::size_t>> node_regions(sub.node_count());
  std::vector<std::size_t> accepted_size;
  std::vector<Region> accepted;
  std::vector<RegionSpec> specs;
  for (std::size_t c : order) {
    const auto pieces = region_to_pieces(sub, candidates[c]);
    const auto nodes = pieces_nodes(sub, pieces);
    std::map<std::size_t, std::size_t> overlap;
    for (std::size_t p : pieces) {
      for (std::size_t a : piece_regions[p]) ++overlap[a];
    }
    bool ok = true;
    for (const auto& [a, count] : overlap) {
      const bool inside = count == pieces.size();
      const bool around = count == accepted_size[a];
      if (inside == around) ok = false;  // equal, or partial overlap
    }
    for (std::size_t node : nodes) {
      for (std::size_t a : node_regions[node]) {
        if (!overlap.count(a)) ok = false;  // touching without nesting
      }
    }
    if (!ok) continue;
    const std::size_t id = accepted.size();
    for (std::size_t p : pieces) piece_regions[p].push_back(id);
    for (std::size_t node : nodes) node_regions[node].push_back(id);
    accepted_size.push_back(pieces.size());
    RegionSpec spec;
    spec.kind = RegionSpec::Kind::fragments;
    spec.fragments = candidates[c].fragments;
    spec.boundary_level = candidates[c].boundary_level;
    accepted.push_back(std::move(candidates[c]));
    specs.push_back(std::move(spec));
  }
  return order_lens(fact, std::move(accepted), std::move(specs));
}

Lens realize_lens(const Factorization& fact, std::span<const RegionSpec> specs) {
  const MiddleSpace& m = fact.middle;
  std::vector<Region> regions;
  bool explicit_roots = false;
  for (const RegionSpec& spec : specs) {
    switch (spec.kind) {
      case RegionSpec::Kind::root:
        if (spec.component >= m.component_count()) {
          throw LensError("root references missing component " + std::to_string(spec.component));
        }
        regions.push_back(whole_component(m, spec.component));
        explicit_roots = true;
        break;
      case RegionSpec::Kind::threshold:
        regions.push_back(threshold_region(fact, spec.cut, true));
        break;
      case RegionSpec::Kind::fragments: {
        Region r;
        r.fragments = normalize_fragments(spec.fragments);
        if (r.fragments.empty()) throw LensError("explicit region has no fragments");
        if (!fragments_fit(m, r.fragments)) throw LensError("explicit region does not lie on the middle space");
        r.boundary_level = spec.boundary_level;
        r.component = m.edge(r.fragments.front().edge).component;
        regions.push_back(std::move(r));
        break;
      }
    }
  }
  if (!explicit_roots) return order_lens(fact, std::move(regions), {specs.begin(), specs.end()});
  return Lens{std::move(regions), {specs.begin(), specs.end()}};
}

nlohmann::json region_spec_to_json(const RegionSpec& spec) {
  using nlohmann::json;
  switch (spec.kind) {
    case RegionSpec::Kind::root:
      return {{"kind", "root"}, {"component", spec.component}};
    case RegionSpec::Kind::threshold: {
      json seed;
      switch (spec.cut.seed.kind) {
        case Seed::Kind::domain_vertex:
          seed = {{"domain_vertex", spec.cut.seed.id}};
          break;
        case Seed::Kind::middle_vertex:
          seed = {{"middle_vertex", spec.cut.seed.id}};
          break;
        case Seed::Kind::middle_edge:
          seed = {{"middle_edge", spec.cut.seed.id}, {"value", spec.cut.seed.value}};
          break;
      }
      return {{"kind", "threshold"},
              {"level", spec.cut.level},
              {"direction", spec.cut.direction == Direction::up ? "up" : "down"},
              {"seed", seed}};
    }
    case RegionSpec::Kind::fragments: {
      json frags = json::array();
      for (const Fragment& f : spec.fragments) frags.push_back({{"edge", f.edge}, {"lo", f.lo}, {"hi", f.hi}});
      json out = {{"kind", "explicit"}, {"fragments", frags}};
      out["boundary"] = spec.boundary_level ? json(*spec.boundary_level) : json(nullptr);
      return out;
    }
  }
  return {};
}

nlohmann::json lens_to_json(const Lens& lens) {
  nlohmann::json regions = nlohmann::json::array();
  for (const RegionSpec& spec : lens.specs) regions.push_back(region_spec_to_json(spec));
  return {{"format", "varilet.lens"}, {"version", 1}, {"regions", regions}};
}

std::vector<RegionSpec> lens_specs_from_json(const nlohmann::json& doc) {
  try {
    const nlohmann::json* regions = &doc;
    if (doc.is_object()) {
      if (doc.contains("format") && doc.at("format") != "varilet.lens") {
        throw ParseError("not a lens document: format " + doc.at("format").dump());
      }
      regions = &doc.at("regions");
    }
    if (!regions->is_array()) throw ParseError("lens regions must be an array");
    std::vector<RegionSpec> out;
    for (const auto& r : *regions) {
      RegionSpec spec;
      const std::string kind = r.at("kind").get<std::string>();
      if (kind == "root") {
        spec.kind = RegionSpec::Kind::root;
        spec.component = r.at("component").get<std::size_t>();
      } else if (kind == "threshold") {
        spec.kind = RegionSpec::Kind::threshold;
        spec.cut.level = r.at("level").get<double>();
        const std::string dir = r.value("direction", std::string("up"));
        if (dir != "up" && dir != "down") throw ParseError("threshold direction must be up or down");
        spec.cut.direction = dir == "up" ? Direction::up : Direction::down;
        const auto& seed = r.at("seed");
        if (seed.contains("domain_vertex")) {
          spec.cut.seed = {Seed::Kind::domain_vertex, seed.at("domain_vertex").get<Id>(), 0.0};
        } else if (seed.contains("middle_vertex")) {
          spec.cut.seed = {Seed::Kind::middle_vertex, seed.at("middle_vertex").get<Id>(), 0.0};
        } else if (seed.contains("middle_edge")) {
          spec.cut.seed = {Seed::Kind::middle_edge, seed.at("middle_edge").get<Id>(), seed.at("value").get<double>()};
        } else {
          throw ParseError("threshold seed needs domain_vertex, middle_vertex or middle_edge");
        }
      } else if (kind == "explicit") {
        spec.kind = RegionSpec::Kind::fragments;
        for (const auto& f : r.at("fragments")) {
          spec.fragments.push_back({f.at("edge").get<std::size_t>(), f.at("lo").get<double>(), f.at("hi").get<double>()});
        }
        if (r.contains("boundary") && !r.at("boundary").is_null()) spec.boundary_level = r.at("boundary").get<double>();
      } else {
        throw ParseError("unknown region kind '" + kind + "'");
      }
      out.push_back(std::move(spec));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed lens document: ") + e.what());
  }
}

}  // namespace varilet
