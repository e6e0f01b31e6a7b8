#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "varilet/field.hpp"
#include "varilet/lens.hpp"
#include "varilet/report.hpp"
#include "varilet/transform.hpp"

namespace varilet {

/// Everything the checks look at. Built once, then open to mutation so that
/// tests can plant faults.
struct Prepared {
  std::shared_ptr<const Factorization> factorization;
  Lens lens;
  VariletBasis basis;
};

/// Factorizes, realizes the lens and runs the transform. Throws on invalid
/// input (see varilet_transform).
Prepared prepare(const ScalarField& field, std::span<const RegionSpec> lens);
Prepared prepare(std::shared_ptr<const Factorization> fact, const Lens& lens);

/// One named check per lemma: restriction_extension, ttv_decomposition,
/// flat_extension, constant_boundary, link, additive_decomposition,
/// zero_varilet, filter_factor, filter_quotient. With an invalid lens the
/// report holds the lens validation failures only.
VerificationReport check_lemmas(const ScalarField& field, std::span<const RegionSpec> lens);
VerificationReport check_lemmas(const Prepared& prep, std::uint64_t seed = 0);

/// Reconstruction, unit ttv of every varilet, and `trials` random
/// coefficient vectors whose filtered field is re-factorized and measured.
VerificationReport check_basis(const ScalarField& field, std::span<const RegionSpec> lens, int trials,
                                  std::uint64_t seed);
VerificationReport check_basis(const Prepared& prep, int trials, std::uint64_t seed);

enum class Fault {
  gamma_breakpoint,  // move one support node value of one gamma, and its varilet
  amplitude,         // scale one amplitude
  boundary_value,    // move a gamma at one node of a region boundary
  link_node,         // point a link pair at a node off the region boundary
  flat_value,        // break a gamma off its support, where it should vanish
  varilet_value,     // move one vertex value of one varilet only
};

const char* to_string(Fault fault);
Fault fault_from_string(const std::string& name);

/// Plants a fault; returns false when the structure offers no spot for it.
bool inject_fault(Prepared& prep, Fault fault);

struct FuzzOptions {
  std::uint64_t seed = 1;
  int fields = 50;
  int lenses_per_field = 3;
  int max_vertices = 200;
  int trials = 100;
  std::size_t threads = 1;
};

/// Runs check_basis and check_lemmas on random fields and lenses. Checks
/// are aggregated by name; a failing check names its first failing case.
VerificationReport fuzz(const FuzzOptions& options);

enum class GraphKind { chain, tree, cycle, multigraph, disconnected };

/// Random PL field with no constant components and no isolated vertices.
ScalarField random_field(std::mt19937_64& rng, int max_vertices, GraphKind kind, bool integer_values);
ScalarField random_field(std::mt19937_64& rng, int max_vertices);

/// Random valid lens: threshold cuts at random regular levels, kept only
/// while the collection stays nested.
Lens random_threshold_lens(std::mt19937_64& rng, const Factorization& fact, int max_cuts);

std::vector<double> random_coefficients(std::mt19937_64& rng, std::size_t n);

}  // namespace varilet
