#include "varilet/transform.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <thread>

#include "varilet/error.hpp"
#include "varilet/numeric.hpp"
#include "varilet/ttv.hpp"

namespace varilet {

MiddleFunction flat_extension(const MiddleFunction& on_support, std::span<const std::size_t> support) {
  const auto& sub_ptr = on_support.subdivision_ptr();
  const Subdivision& sub = *sub_ptr;
  std::vector<double> nodes(sub.node_count(), 0.0);
  std::vector<Affine> maps(sub.piece_count(), Affine{0.0, 0.0});
  for (std::size_t p : support) {
    maps[p] = on_support.on_piece(p);
    nodes[sub.piece(p).lo] = on_support.at_node(sub.piece(p).lo);
    nodes[sub.piece(p).hi] = on_support.at_node(sub.piece(p).hi);
  }
  for (const ComplementComponent& cc : complement_components(sub, support)) {
    double value = 0.0;
    if (!cc.boundary.empty()) {
      value = nodes[cc.boundary.front()];
      for (std::size_t b : cc.boundary) {
        if (std::abs(nodes[b] - value) > 1e-12 * (1.0 + std::abs(value))) {
          throw ConsistencyError("flat extension: boundary values " + std::to_string(value) + " and " +
                                 std::to_string(nodes[b]) + " disagree on one complement component");
        }
      }
    }
    for (std::size_t p : cc.pieces) {
      maps[p] = Affine{0.0, value};
      for (std::size_t n : {sub.piece(p).lo, sub.piece(p).hi}) {
        if (!std::binary_search(cc.boundary.begin(), cc.boundary.end(), n)) nodes[n] = value;
      }
    }
  }
  return MiddleFunction(sub_ptr, std::move(nodes), std::move(maps));
}

namespace {

template <class Fn>
void for_each_index(std::size_t n, const TransformOptions& options, Fn&& fn) {
  std::vector<std::size_t> order = options.order;
  if (order.empty()) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
  }
  std::vector<std::size_t> check = order;
  std::sort(check.begin(), check.end());
  for (std::size_t k = 0; k < check.size(); ++k) {
    if (check[k] != k || check.size() != n) throw ValidationError("transform order is not a permutation");
  }
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, n));
  if (threads == 1) {
    for (std::size_t i : order) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t k = next++; k < order.size(); k = next++) fn(order[k]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_coefficients(const VariletBasis& basis, std::span<const double> coeffs) {
  if (coeffs.size() != basis.size()) {
    throw CoefficientError("expected " + std::to_string(basis.size()) + " coefficients, got " +
                           std::to_string(coeffs.size()));
  }
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (!std::isfinite(coeffs[i])) throw CoefficientError("coefficient " + std::to_string(i) + " is not finite");
  }
}

}  // namespace

VariletBasis varilet_transform(std::shared_ptr<const Factorization> fact, const Lens& lens,
                               const TransformOptions& options) {
  const auto& degenerate = fact->middle.degenerate_domain_components();
  if (!degenerate.empty()) {
    throw DegenerateFieldError("field is constant on domain component " + std::to_string(degenerate.front()));
  }
  VariletBasis basis;
  basis.factorization = fact;
  basis.lens = lens;
  basis.layout = std::make_shared<const LensLayout>(fact, lens);
  const LensLayout& layout = *basis.layout;
  basis.supports = supports(layout);
  basis.links = link_pairs(layout);
  const auto& sub_ptr = layout.subdivision_ptr();
  const Subdivision& sub = *sub_ptr;
  basis.pullback = std::make_shared<const PullbackDomain>(sub_ptr);

  const std::size_t n = layout.size();
  basis.amplitudes.resize(n);
  std::vector<std::optional<MiddleFunction>> gammas(n);
  std::vector<std::optional<ScalarField>> varilets(n);
  for_each_index(n, options, [&](std::size_t i) {
    CompensatedSum length;
    for (std::size_t p : layout.support_pieces(i)) length.add(sub.piece_length(p));
    const double alpha = length.value();
    const double b = layout.is_root(i) ? 0.0 : layout.boundary_level(i);
    MiddleFunction local = MiddleFunction::zero(sub_ptr);
    auto& nodes = local.mutable_node_values();
    auto& maps = local.mutable_piece_maps();
    for (std::size_t p : layout.support_pieces(i)) {
      maps[p] = Affine{1.0 / alpha, -b / alpha};
      for (std::size_t node : {sub.piece(p).lo, sub.piece(p).hi}) nodes[node] = (sub.node_value(node) - b) / alpha;
    }
    basis.amplitudes[i] = alpha;
    gammas[i] = flat_extension(local, layout.support_pieces(i));
    varilets[i] = pull_back(*basis.pullback, *gammas[i]);
  });
  for (std::size_t i = 0; i < n; ++i) {
    basis.gammas.push_back(std::move(*gammas[i]));
    basis.varilets.push_back(std::move(*varilets[i]));
  }
  return basis;
}

VariletBasis varilet_transform(const ScalarField& field, std::span<const RegionSpec> lens,
                               const TransformOptions& options) {
  auto fact = std::make_shared<const Factorization>(factorize(field));
  if (!fact->middle.degenerate_domain_components().empty()) {
    throw DegenerateFieldError("field is constant on domain component " +
                               std::to_string(fact->middle.degenerate_domain_components().front()));
  }
  Lens realized = realize_lens(*fact, lens);
  return varilet_transform(fact, realized, options);
}

ScalarField reconstruct(const VariletBasis& basis) { return linear_combination(basis.varilets, basis.amplitudes); }

MiddleFunction filter_factor(const VariletBasis& basis, std::span<const double> coeffs) {
  check_coefficients(basis, coeffs);
  const LensLayout& layout = *basis.layout;
  const auto& sub_ptr = layout.subdivision_ptr();
  const Subdivision& sub = *sub_ptr;
  std::vector<double> nodes(sub.node_count(), 0.0);
  std::vector<Affine> maps(sub.piece_count(), Affine{0.0, 0.0});
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const double s = coeffs[i] / basis.amplitudes[i];
    const bool root = layout.is_root(i);
    const double b = root ? 0.0 : layout.boundary_level(i);
    const double anchor = root ? 0.0 : nodes[basis.links[i - layout.root_count()].node];
    const double c = root ? 0.0 : anchor - s * b;
    for (std::size_t p : layout.support_pieces(i)) {
      maps[p] = Affine{s, c};
      for (std::size_t node : {sub.piece(p).lo, sub.piece(p).hi}) {
        const double x = sub.node_value(node);
        nodes[node] = (!root && x == b) ? anchor : s * x + c;
      }
    }
  }
  return MiddleFunction(sub_ptr, std::move(nodes), std::move(maps));
}

ScalarField filter(const VariletBasis& basis, std::span<const double> coeffs, const FilterOptions& options) {
  ScalarField out = pull_back(*basis.pullback, filter_factor(basis, coeffs));
  if (!options.self_check) return out;
  const ScalarField sum = linear_combination(basis.varilets, coeffs);
  const double tol = 1e-9 * (1.0 + out.max_abs());
  double worst = 0.0;
  for (std::size_t v = 0; v < out.values().size(); ++v) {
    worst = std::max(worst, std::abs(out.value(v) - sum.value(v)));
  }
  if (!(worst <= tol)) {
    throw ConsistencyError("filter self-check: link recursion and varilet sum differ by " + std::to_string(worst));
  }
  return out;
}

namespace {

// Middle space of psi on the refined middle space: zero-slope pieces are
// contracted, regular vertices suppressed.
MiddleSignature predicted_signature(const VariletBasis& basis, const MiddleFunction& psi,
                                    std::span<const double> coeffs) {
  const LensLayout& layout = *basis.layout;
  const Subdivision& sub = layout.subdivision();
  DisjointSets classes(sub.node_count());
  std::vector<char> flat(sub.piece_count(), 0);
  for (std::size_t p = 0; p < sub.piece_count(); ++p) {
    if (coeffs[layout.owner(p)] == 0.0) {
      flat[p] = 1;
      classes.unite(sub.piece(p).lo, sub.piece(p).hi);
    }
  }
  std::vector<std::size_t> cls(sub.node_count());
  for (std::size_t n = 0; n < cls.size(); ++n) cls[n] = classes.find(n);
  std::vector<double> value(sub.node_count(), 0.0);
  for (std::size_t n = 0; n < cls.size(); ++n) value[cls[n]] = psi.at_node(n);

  // Directed edges from lower to higher psi.
  std::vector<std::vector<std::size_t>> up(sub.node_count());
  std::vector<std::size_t> down_degree(sub.node_count(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t p = 0; p < sub.piece_count(); ++p) {
    if (flat[p]) continue;
    std::size_t a = cls[sub.piece(p).lo];
    std::size_t b = cls[sub.piece(p).hi];
    if (value[a] > value[b]) std::swap(a, b);
    up[a].push_back(b);
    ++down_degree[b];
  }
  auto regular = [&](std::size_t c) { return up[c].size() == 1 && down_degree[c] == 1; };

  MiddleSignature sig;
  for (std::size_t c = 0; c < sub.node_count(); ++c) {
    if (cls[c] != c || up[c].size() + down_degree[c] == 0 || regular(c)) continue;
    sig.vertex_values.push_back(value[c]);
    for (std::size_t next : up[c]) {
      while (regular(next)) next = up[next].front();
      sig.edges.emplace_back(value[c], value[next]);
    }
  }
  std::sort(sig.vertex_values.begin(), sig.vertex_values.end());
  std::sort(sig.edges.begin(), sig.edges.end());
  return sig;
}

}  // namespace

VerificationReport filter_quotient_check(const VariletBasis& basis, std::span<const double> coeffs, double rel_tol) {
  VerificationReport report;
  const MiddleFunction psi = filter_factor(basis, coeffs);
  const ScalarField filtered = pull_back(*basis.pullback, psi);
  const Factorization refact = factorize(filtered);
  const MiddleSignature predicted = predicted_signature(basis, psi, coeffs);
  std::string why;
  const bool same = signatures_match(predicted, signature(refact.middle), rel_tol, &why);
  report.add("quotient_middle_space", "the filtered middle space is the collapsed original", same, 0.0, rel_tol, why);

  CompensatedSum expected;
  for (double a : coeffs) expected.add(std::abs(a));
  const double got = ttv(refact.middle);
  const double err = std::abs(got - expected.value());
  const double tol = rel_tol * std::max(1.0, expected.value());
  report.add("quotient_ttv", "ttv of the filtered field is the sum of |coefficients|", err <= tol, err, tol);
  return report;
}

nlohmann::json basis_to_json(const VariletBasis& basis) {
  using nlohmann::json;
  const LensLayout& layout = *basis.layout;
  const Subdivision& sub = layout.subdivision();
  json varilets = json::array();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    json support = json::array();
    for (const Fragment& f : basis.supports[i].region.fragments) {
      support.push_back({{"edge", f.edge}, {"lo", f.lo}, {"hi", f.hi}});
    }
    json gamma = json::array();
    for (std::size_t p = 0; p < sub.piece_count(); ++p) {
      const Piece& pc = sub.piece(p);
      gamma.push_back({{"edge", pc.edge},
                       {"lo", {sub.node_value(pc.lo), basis.gammas[i].at_node(pc.lo)}},
                       {"hi", {sub.node_value(pc.hi), basis.gammas[i].at_node(pc.hi)}}});
    }
    const auto values = basis.varilets[i].values();
    json entry = {{"index", i},
                  {"amplitude", basis.amplitudes[i]},
                  {"support", support},
                  {"gamma", gamma},
                  {"values", std::vector<double>(values.begin(), values.end())}};
    entry["predecessor"] = layout.predecessor(i) ? json(*layout.predecessor(i)) : json(nullptr);
    entry["boundary_level"] = layout.is_root(i) ? json(nullptr) : json(layout.boundary_level(i));
    varilets.push_back(std::move(entry));
  }
  return {{"format", "varilet.basis"},
          {"version", 1},
          {"field", field_to_json(basis.factorization->field)},
          {"lens", lens_to_json(basis.lens)},
          {"amplitudes", basis.amplitudes},
          {"refined_field", field_to_json(basis.refined_field())},
          {"varilets", varilets}};
}

VariletBasis basis_from_json(const nlohmann::json& doc, const TransformOptions& options) {
  try {
    if (!doc.is_object() || doc.value("format", std::string()) != "varilet.basis") {
      throw ParseError("not a basis document");
    }
    const ScalarField field = load_graph_field(doc.at("field"));
    const auto specs = lens_specs_from_json(doc.at("lens"));
    return varilet_transform(field, specs, options);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed basis document: ") + e.what());
  }
}

}  // namespace varilet
