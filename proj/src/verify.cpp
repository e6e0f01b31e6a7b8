#include "varilet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <atomic>
#include <limits>
#include <thread>

#include "varilet/error.hpp"
#include "varilet/numeric.hpp"
#include "varilet/ttv.hpp"

namespace varilet {

namespace {

// Worst error across many sub-checks, remembering the first failure.
struct Tally {
  double worst = 0.0;
  bool ok = true;
  std::string detail;

  void check(bool pass, double err, const std::string& what) {
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    worst = std::max(worst, err);
    if (!pass && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double worst = 0.0;
  for (std::size_t v = 0; v < a.values().size(); ++v) worst = std::max(worst, std::abs(a.value(v) - b.value(v)));
  return worst;
}

bool is_root_index(const LensLayout& layout, std::size_t i) { return i < layout.root_count(); }

}  // namespace

Prepared prepare(std::shared_ptr<const Factorization> fact, const Lens& lens) {
  Prepared prep{fact, lens, varilet_transform(fact, lens)};
  return prep;
}

Prepared prepare(const ScalarField& field, std::span<const RegionSpec> lens) {
  auto fact = std::make_shared<const Factorization>(factorize(field));
  Lens realized = realize_lens(*fact, lens);
  return prepare(std::move(fact), realized);
}

VerificationReport check_lemmas(const Prepared& prep, std::uint64_t seed) {
  VerificationReport report;
  const VariletBasis& basis = prep.basis;
  const LensLayout& layout = *basis.layout;
  const Subdivision& sub = layout.subdivision();
  const MiddleSpace& middle = prep.factorization->middle;
  const std::size_t n = basis.size();
  auto rng = make_rng(seed, 0x1e44a);

  {  // Restriction and extension: supports keep their length, varilets have ttv 1.
    Tally t;
    for (std::size_t i = 0; i < n; ++i) {
      const double direct = ttv_restricted(middle, basis.supports[i].region);
      const double err = std::abs(direct - basis.amplitudes[i]);
      t.check(err <= 1e-12 * std::max(1.0, direct), err, "support " + std::to_string(i) + " length " + num(direct) +
                                                                 " vs amplitude " + num(basis.amplitudes[i]));
      const double b = is_root_index(layout, i) ? 0.0 : layout.boundary_level(i);
      for (std::size_t p : layout.support_pieces(i)) {
        for (std::size_t node : {sub.piece(p).lo, sub.piece(p).hi}) {
          const double lambda = sub.node_value(node);
          const double back = basis.amplitudes[i] * basis.gammas[i].at_node(node) + b;
          const double e = std::abs(back - lambda);
          t.check(e <= 1e-12 * (1.0 + std::abs(lambda)), e,
                  "varilet " + std::to_string(i) + " does not restrict to the light factor at node " +
                      std::to_string(node));
        }
      }
      const double g_ttv = ttv(factorize(basis.varilets[i]).middle);
      const double e = std::abs(g_ttv - 1.0);
      t.check(e <= 1e-9, e, "varilet " + std::to_string(i) + " has ttv " + num(g_ttv));
    }
    report.add("restriction_extension", "each support keeps its length and each varilet has ttv 1", t.ok, t.worst,
               1e-9, t.detail);
  }

  {  // ttv decomposition over the supports.
    std::vector<Region> regions;
    for (const Support& s : basis.supports) regions.push_back(s.region);
    const VerificationReport dec = check_decomposition(middle, regions);
    Tally t;
    for (const CheckResult& c : dec.checks()) t.check(c.passed, c.error, c.name + ": " + c.detail);
    CompensatedSum sum;
    for (double a : basis.amplitudes) sum.add(a);
    const double total = ttv(middle);
    const double err = std::abs(total - sum.value());
    t.check(err <= 1e-12 * std::max(1.0, total), err / std::max(1.0, total),
            "amplitudes sum to " + num(sum.value()) + ", ttv is " + num(total));
    report.add("ttv_decomposition", "supports tile the middle space and amplitudes sum to ttv", t.ok, t.worst, 1e-12,
               t.detail);
  }

  {  // Flat extension: nonzero slope on the support, constant on each
     // complement component, whose boundary values are region levels.
    Tally t;
    for (std::size_t i = 0; i < n; ++i) {
      const MiddleFunction& g = basis.gammas[i];
      for (std::size_t p : layout.support_pieces(i)) {
        t.check(g.on_piece(p).slope != 0.0, 0.0,
                "varilet " + std::to_string(i) + " is flat on support piece " + std::to_string(p));
      }
      std::vector<double> allowed;
      if (!is_root_index(layout, i)) allowed.push_back(layout.boundary_level(i));
      for (std::size_t j : layout.successors(i)) allowed.push_back(layout.boundary_level(j));
      std::sort(allowed.begin(), allowed.end());
      allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
      std::vector<char> seen(allowed.size(), 0);
      for (const ComplementComponent& cc : complement_components(sub, layout.support_pieces(i))) {
        const double v0 = g.at_node(sub.piece(cc.pieces.front()).lo);
        for (std::size_t p : cc.pieces) {
          const Affine& a = g.on_piece(p);
          const double e = std::max({std::abs(a.slope), std::abs(a.intercept - v0),
                                     std::abs(g.at_node(sub.piece(p).lo) - v0), std::abs(g.at_node(sub.piece(p).hi) - v0)});
          t.check(e == 0.0, e, "varilet " + std::to_string(i) + " varies off its support at piece " + std::to_string(p));
        }
        for (std::size_t b : cc.boundary) {
          const double lambda = sub.node_value(b);
          const auto it = std::find(allowed.begin(), allowed.end(), lambda);
          t.check(it != allowed.end(), 0.0,
                  "support " + std::to_string(i) + " complement has boundary at unexpected level " + num(lambda));
          if (it != allowed.end()) seen[static_cast<std::size_t>(it - allowed.begin())] = 1;
        }
      }
      const bool all_seen = std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
      t.check(all_seen, 0.0, "support " + std::to_string(i) + " complement misses a region level");
    }
    report.add("flat_extension", "varilets are flat exactly off their supports", t.ok, t.worst, 0.0, t.detail);
  }

  std::vector<double> probe = random_coefficients(rng, n);
  {  // Constant boundary: every gamma and psi is constant on each region boundary.
    Tally t;
    auto check_fn = [&](const MiddleFunction& fn, const std::string& name) {
      for (std::size_t j = layout.root_count(); j < n; ++j) {
        const auto bd = layout.region_boundary(j);
        if (bd.empty()) continue;
        const double v0 = fn.at_node(bd.front());
        for (std::size_t b : bd) {
          const double e = std::abs(fn.at_node(b) - v0);
          t.check(e == 0.0, e, name + " is not constant on the boundary of region " + std::to_string(j));
        }
      }
    };
    for (std::size_t i = 0; i < n; ++i) check_fn(basis.gammas[i], "varilet " + std::to_string(i));
    check_fn(filter_factor(basis, basis.amplitudes), "reconstruction factor");
    check_fn(filter_factor(basis, probe), "filter factor");
    report.add("constant_boundary", "varilets and filter factors are constant on region boundaries", t.ok, t.worst, 0.0,
               t.detail);
  }

  {  // Link pairs.
    Tally t;
    const std::size_t expected = n - layout.root_count();
    t.check(basis.links.size() == expected, 0.0,
            std::to_string(basis.links.size()) + " link pairs for " + std::to_string(expected) + " non-root regions");
    for (const LinkPair& lp : basis.links) {
      const std::size_t i = lp.successor;
      const std::string who = "link of region " + std::to_string(i);
      if (i >= n || lp.predecessor >= n || lp.node >= sub.node_count()) {
        t.check(false, 0.0, who + " references missing data");
        continue;
      }
      t.check(layout.predecessor(i) == lp.predecessor, 0.0, who + " names the wrong predecessor");
      const double b = layout.boundary_level(i);
      t.check(lp.p.value == b && lp.q.value == b && sub.node_value(lp.node) == b, std::abs(sub.node_value(lp.node) - b),
              who + " is not at the boundary level");
      const auto bd = layout.region_boundary(i);
      t.check(std::binary_search(bd.begin(), bd.end(), lp.node), 0.0, who + " is off the region boundary");
      const auto inc = sub.node_pieces(lp.node);
      const bool on_pred = std::any_of(inc.begin(), inc.end(), [&](std::size_t p) { return layout.owner(p) == lp.predecessor; });
      const bool on_succ = std::any_of(inc.begin(), inc.end(), [&](std::size_t p) { return layout.owner(p) == i; });
      t.check(on_pred && on_succ, 0.0, who + " does not join both supports");
    }
    report.add("link", "one link pair per non-root region, joining both supports at the boundary level", t.ok, t.worst,
               0.0, t.detail);
  }

  {  // Additive decomposition.
    const ScalarField& f = basis.refined_field();
    const ScalarField sum = linear_combination(basis.varilets, basis.amplitudes);
    const double err = max_abs_diff(f, sum);
    const double tol = 1e-9 * (1.0 + f.max_abs());
    report.add("additive_decomposition", "the field is the amplitude-weighted sum of its varilets", err <= tol, err, tol);
  }

  {  // Zero varilet: gamma_i vanishes on every support outside C_i.
    Tally t;
    for (std::size_t i = 0; i < n; ++i) {
      const MiddleFunction& g = basis.gammas[i];
      for (std::size_t j = 0; j < n; ++j) {
        if (layout.contains(i, j)) continue;
        for (std::size_t p : layout.support_pieces(j)) {
          const Affine& a = g.on_piece(p);
          const double e = std::max({std::abs(a.slope), std::abs(a.intercept), std::abs(g.at_node(sub.piece(p).lo)),
                                     std::abs(g.at_node(sub.piece(p).hi))});
          t.check(e == 0.0, e,
                  "varilet " + std::to_string(i) + " is nonzero on support " + std::to_string(j));
        }
      }
    }
    report.add("zero_varilet", "each varilet vanishes on supports outside its region", t.ok, t.worst, 0.0, t.detail);
  }

  {  // Filter factor: the link recursion pulled back equals the varilet sum.
    Tally t;
    std::vector<std::vector<double>> vectors{basis.amplitudes, probe, random_coefficients(rng, n)};
    for (std::size_t k = 0; k < vectors.size(); ++k) {
      const MiddleFunction psi = filter_factor(basis, vectors[k]);
      const ScalarField a = pull_back(*basis.pullback, psi);
      const ScalarField b = linear_combination(basis.varilets, vectors[k]);
      const double err = max_abs_diff(a, b);
      const double tol = 1e-9 * (1.0 + a.max_abs());
      t.check(err <= tol, err, "coefficient vector " + std::to_string(k) + " differs by " + num(err));
      const double cont = psi.continuity_defect();
      t.check(cont <= tol, cont, "filter factor " + std::to_string(k) + " is discontinuous by " + num(cont));
    }
    report.add("filter_factor", "the filter factor pulled back equals the weighted varilet sum", t.ok, t.worst, 1e-9,
               t.detail);
  }

  {  // Filter quotient with some coefficients zeroed.
    Tally t;
    for (int k = 0; k < 3; ++k) {
      std::vector<double> coeffs = random_coefficients(rng, n);
      if (k == 0 && n > 1) coeffs[n - 1] = 0.0;
      if (k == 1) coeffs[0] = 0.0;
      const VerificationReport q = filter_quotient_check(basis, coeffs);
      for (const CheckResult& c : q.checks()) {
        t.check(c.passed, c.error, "vector " + std::to_string(k) + " " + c.name + (c.detail.empty() ? "" : ": " + c.detail));
      }
    }
    report.add("filter_quotient", "the filtered middle space is the predicted quotient with ttv sum |a|", t.ok, t.worst,
               1e-9, t.detail);
  }
  return report;
}

VerificationReport check_lemmas(const ScalarField& field, std::span<const RegionSpec> lens) {
  auto fact = std::make_shared<const Factorization>(factorize(field));
  Lens realized;
  try {
    realized = realize_lens(*fact, lens);
  } catch (const LensError& e) {
    VerificationReport report;
    report.add("lens_valid", "the lens is nested, covering and constant-boundary", false, 0.0, 0.0, e.what());
    return report;
  }
  const LensLayout layout(fact, realized);
  if (!layout.valid()) {
    VerificationReport report;
    report.merge(layout.report(), "lens");
    return report;
  }
  return check_lemmas(prepare(fact, realized));
}

VerificationReport check_basis(const Prepared& prep, int trials, std::uint64_t seed) {
  VerificationReport report;
  const VariletBasis& basis = prep.basis;
  const std::size_t n = basis.size();

  const ScalarField& f = basis.refined_field();
  const double err = max_abs_diff(f, reconstruct(basis));
  const double tol = 1e-9 * (1.0 + f.max_abs());
  report.add("reconstruction", "f equals the amplitude-weighted varilet sum", err <= tol, err, tol);

  Tally norm;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = ttv(factorize(basis.varilets[i]).middle);
    norm.check(std::abs(t - 1.0) <= 1e-9, std::abs(t - 1.0), "varilet " + std::to_string(i) + " has ttv " + num(t));
  }
  report.add("normalization", "every varilet has ttv 1", norm.ok, norm.worst, 1e-9, norm.detail);

  Tally basis_prop;
  auto rng = make_rng(seed, 0x7e01);
  for (int k = 0; k < trials; ++k) {
    std::vector<double> coeffs = random_coefficients(rng, n);
    if (k == 0) {
      std::fill(coeffs.begin(), coeffs.end(), 0.0);
      coeffs[0] = -2.5;
    }
    const ScalarField filtered = linear_combination(basis.varilets, coeffs);
    const double got = ttv(factorize(filtered).middle);
    CompensatedSum expected;
    for (double a : coeffs) expected.add(std::abs(a));
    const double e = std::abs(got - expected.value());
    const double rel = e / std::max(expected.value(), 1e-300);
    basis_prop.check(e <= 1e-9 * expected.value() + 1e-12, expected.value() > 0 ? rel : e,
                     "trial " + std::to_string(k) + ": ttv " + num(got) + " vs sum |a| " + num(expected.value()));
  }
  report.add("basis_property", "ttv of every filtered field is the sum of |coefficients|", basis_prop.ok,
             basis_prop.worst, 1e-9, basis_prop.detail);
  return report;
}

VerificationReport check_basis(const ScalarField& field, std::span<const RegionSpec> lens, int trials,
                                  std::uint64_t seed) {
  return check_basis(prepare(field, lens), trials, seed);
}

const char* to_string(Fault fault) {
  switch (fault) {
    case Fault::gamma_breakpoint: return "gamma_breakpoint";
    case Fault::amplitude: return "amplitude";
    case Fault::boundary_value: return "boundary_value";
    case Fault::link_node: return "link_node";
    case Fault::flat_value: return "flat_value";
    case Fault::varilet_value: return "varilet_value";
  }
  return "?";
}

Fault fault_from_string(const std::string& name) {
  for (Fault f : {Fault::gamma_breakpoint, Fault::amplitude, Fault::boundary_value, Fault::link_node,
                  Fault::flat_value, Fault::varilet_value}) {
    if (name == to_string(f)) return f;
  }
  throw ValidationError("unknown fault '" + name + "'");
}

bool inject_fault(Prepared& prep, Fault fault) {
  VariletBasis& basis = prep.basis;
  const LensLayout& layout = *basis.layout;
  const Subdivision& sub = layout.subdivision();
  const std::size_t n = basis.size();
  auto repull = [&](std::size_t i) { basis.varilets[i] = pull_back(*basis.pullback, basis.gammas[i]); };

  switch (fault) {
    case Fault::gamma_breakpoint: {
      const std::size_t i = n - 1;
      const std::size_t node = sub.piece(layout.support_pieces(i).front()).hi;
      basis.gammas[i].mutable_node_values()[node] += 0.25;
      repull(i);
      return true;
    }
    case Fault::amplitude:
      basis.amplitudes[n - 1] *= 1.5;
      return true;
    case Fault::boundary_value:
      for (std::size_t j = layout.root_count(); j < n; ++j) {
        const auto bd = layout.region_boundary(j);
        if (bd.size() < 2) continue;
        const std::size_t i = *layout.predecessor(j);
        basis.gammas[i].mutable_node_values()[bd.front()] += 0.125;
        repull(i);
        return true;
      }
      return false;
    case Fault::link_node:
      for (LinkPair& lp : basis.links) {
        const auto bd = layout.region_boundary(lp.successor);
        for (std::size_t node = 0; node < sub.node_count(); ++node) {
          if (!std::binary_search(bd.begin(), bd.end(), node)) {
            lp.node = node;
            return true;
          }
        }
      }
      return false;
    case Fault::flat_value:
      // Latest varilets first, on a piece that lies outside the region.
      for (std::size_t i = n; i-- > 0;) {
        for (const ComplementComponent& cc : complement_components(sub, layout.support_pieces(i))) {
          for (std::size_t p : cc.pieces) {
            if (layout.contains(i, layout.owner(p))) continue;
            for (std::size_t node : {sub.piece(p).lo, sub.piece(p).hi}) {
              if (std::binary_search(cc.boundary.begin(), cc.boundary.end(), node)) continue;
              basis.gammas[i].mutable_node_values()[node] += 0.5;
              basis.gammas[i].mutable_piece_maps()[p].intercept += 0.5;
              repull(i);
              return true;
            }
          }
        }
      }
      return false;
    case Fault::varilet_value: {
      std::vector<double> values(basis.varilets[0].values().begin(), basis.varilets[0].values().end());
      values[values.size() / 2] += 0.5;
      basis.varilets[0] = ScalarField(basis.varilets[0].domain_ptr(), std::move(values));
      return true;
    }
  }
  return false;
}

std::vector<double> random_coefficients(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> real(-5.0, 5.0);
  std::uniform_int_distribution<int> small(-3, 3);
  std::vector<double> out(n);
  for (double& a : out) {
    const double u = unit(rng);
    a = u < 0.2 ? 0.0 : (u < 0.3 ? static_cast<double>(small(rng)) : real(rng));
  }
  return out;
}

namespace {

void add_chain(std::vector<EdgeSpec>& edges, Id first, Id count) {
  for (Id k = 1; k < count; ++k) edges.push_back({static_cast<Id>(edges.size()), first + k - 1, first + k});
}

void add_graph(std::mt19937_64& rng, std::vector<EdgeSpec>& edges, Id first, Id count, GraphKind kind) {
  auto next_id = [&] { return static_cast<Id>(edges.size()); };
  switch (kind) {
    case GraphKind::chain:
    case GraphKind::disconnected:
      add_chain(edges, first, count);
      break;
    case GraphKind::tree:
      for (Id k = 1; k < count; ++k) {
        std::uniform_int_distribution<Id> parent(0, k - 1);
        edges.push_back({next_id(), first + parent(rng), first + k});
      }
      break;
    case GraphKind::cycle:
      add_chain(edges, first, count);
      edges.push_back({next_id(), first + count - 1, first});
      break;
    case GraphKind::multigraph: {
      add_graph(rng, edges, first, count, GraphKind::tree);
      std::uniform_int_distribution<Id> pick(0, count - 1);
      const Id extra = std::max<Id>(1, count / 4);
      for (Id k = 0; k < extra; ++k) {
        const Id a = pick(rng);
        Id b = pick(rng);
        if (a == b) b = (a + 1) % count;
        edges.push_back({next_id(), first + a, first + b});
      }
      break;
    }
  }
}

}  // namespace

ScalarField random_field(std::mt19937_64& rng, int max_vertices, GraphKind kind, bool integer_values) {
  std::uniform_int_distribution<int> size(2, std::max(2, max_vertices));
  const Id n = size(rng);
  std::vector<EdgeSpec> edges;
  if (kind == GraphKind::disconnected && n >= 4) {
    std::uniform_int_distribution<int> parts_dist(2, static_cast<int>(std::min<Id>(3, n / 2)));
    const Id parts = parts_dist(rng);
    std::uniform_int_distribution<int> kinds(0, 3);
    Id first = 0;
    for (Id k = 0; k < parts; ++k) {
      const Id remaining = n - first;
      const Id count = k + 1 == parts ? remaining : std::max<Id>(2, remaining / (parts - k));
      add_graph(rng, edges, first, count, static_cast<GraphKind>(kinds(rng)));
      first += count;
    }
  } else {
    add_graph(rng, edges, 0, n, kind);
  }
  std::vector<Id> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), Id{0});
  auto domain = std::make_shared<const DomainGraph>(ids, edges);

  std::vector<double> values(static_cast<std::size_t>(n));
  std::uniform_int_distribution<int> ints(0, 4);
  std::uniform_real_distribution<double> reals(-10.0, 10.0);
  for (double& v : values) v = integer_values ? ints(rng) : reals(rng);
  std::vector<std::size_t> first_of(domain->component_count(), static_cast<std::size_t>(-1));
  std::vector<char> varies(domain->component_count(), 0);
  for (std::size_t v = 0; v < values.size(); ++v) {
    const std::size_t c = domain->component_of(v);
    if (first_of[c] == static_cast<std::size_t>(-1)) {
      first_of[c] = v;
    } else if (values[v] != values[first_of[c]]) {
      varies[c] = 1;
    }
  }
  for (std::size_t c = 0; c < varies.size(); ++c) {
    if (!varies[c]) values[first_of[c]] += 1.0;
  }
  return ScalarField(std::move(domain), std::move(values));
}

ScalarField random_field(std::mt19937_64& rng, int max_vertices) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::bernoulli_distribution ints(0.3);
  return random_field(rng, max_vertices, static_cast<GraphKind>(kind(rng)), ints(rng));
}

Lens random_threshold_lens(std::mt19937_64& rng, const Factorization& fact, int max_cuts) {
  const MiddleSpace& m = fact.middle;
  std::vector<ThresholdCut> kept;
  if (m.edge_count() == 0) return build_threshold_lens(fact, kept);
  std::uniform_int_distribution<std::size_t> edge(0, m.edge_count() - 1);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  std::bernoulli_distribution upward(0.5);
  for (int attempt = 0; attempt < 4 * max_cuts && static_cast<int>(kept.size()) < max_cuts; ++attempt) {
    const std::size_t e = edge(rng);
    const double lo = m.lo_value(e);
    const double hi = m.hi_value(e);
    const double level = lo + frac(rng) * (hi - lo);
    const bool up = upward(rng);
    const double seed = up ? 0.5 * (level + hi) : 0.5 * (lo + level);
    if (!(lo < level && level < hi) || !(lo < seed && seed < hi) || (up ? seed <= level : seed >= level)) continue;
    ThresholdCut cut{level, up ? Direction::up : Direction::down,
                     Seed{Seed::Kind::middle_edge, static_cast<Id>(e), seed}};
    kept.push_back(cut);
    try {
      build_threshold_lens(fact, kept);
    } catch (const LensError&) {
      kept.pop_back();
    }
  }
  return build_threshold_lens(fact, kept);
}

VerificationReport fuzz(const FuzzOptions& options) {
  const auto cases = static_cast<std::size_t>(std::max(0, options.fields));
  std::vector<std::vector<std::pair<std::string, VerificationReport>>> results(cases);

  auto run_case = [&](std::size_t k) {
    auto rng = make_rng(options.seed, k);
    const auto kind = static_cast<GraphKind>(k % 5);
    const bool integer_values = (k / 5) % 2 == 1;
    const ScalarField field = random_field(rng, options.max_vertices, kind, integer_values);
    auto fact = std::make_shared<const Factorization>(factorize(field));
    for (int j = 0; j < options.lenses_per_field; ++j) {
      const std::string id = "field " + std::to_string(k) + " lens " + std::to_string(j);
      VerificationReport r;
      try {
        Lens lens;
        if (j == 0) {
          std::uniform_real_distribution<double> amp(0.0, 2.0);
          lens = build_branch_lens(*fact, amp(rng));
        } else {
          lens = random_threshold_lens(rng, *fact, 1 + j * 2);
        }
        const LensLayout layout(fact, lens);
        r.merge(layout.report(), "lens");
        if (layout.valid()) {
          const Prepared prep = prepare(fact, lens);
          r.merge(check_basis(prep, options.trials, options.seed * 7919 + k * 31 + static_cast<std::uint64_t>(j)));
          r.merge(check_lemmas(prep, options.seed + k));
        }
        r.add("pipeline", "the case ran without raising", true);
      } catch (const std::exception& e) {
        r.add("pipeline", "the case ran without raising", false, 0.0, 0.0, e.what());
      }
      results[k].emplace_back(id, std::move(r));
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, cases));
  if (threads == 1) {
    for (std::size_t k = 0; k < cases; ++k) run_case(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < cases; k = next++) run_case(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::map<std::string, CheckResult> merged;
  std::map<std::string, std::size_t> runs;
  for (const auto& per_field : results) {
    for (const auto& [id, r] : per_field) {
      for (const CheckResult& c : r.checks()) {
        auto [it, fresh] = merged.try_emplace(c.name, c);
        CheckResult& m = it->second;
        ++runs[c.name];
        if (fresh) {
          if (!c.passed) m.detail = id + ": " + c.detail;
          continue;
        }
        m.error = std::max(m.error, c.error);
        m.tolerance = std::max(m.tolerance, c.tolerance);
        if (!c.passed && m.passed) {
          m.passed = false;
          m.detail = id + ": " + c.detail;
        }
      }
    }
  }
  VerificationReport report;
  for (auto& [name, c] : merged) {
    if (c.passed) c.detail = std::to_string(runs[name]) + " runs";
    report.add(c);
  }
  report.sort();
  return report;
}

}  // namespace varilet
