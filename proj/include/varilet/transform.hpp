#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "varilet/field.hpp"
#include "varilet/lens.hpp"
#include "varilet/middle_function.hpp"
#include "varilet/mlf.hpp"
#include "varilet/report.hpp"

namespace varilet {

/// Extends a function given on the closed piece set `support` to the whole
/// middle space: constant on every complement component (the common value
/// of its boundary nodes), zero on components the support does not meet.
/// Throws ConsistencyError when a complement component sees two boundary
/// values.
MiddleFunction flat_extension(const MiddleFunction& on_support, std::span<const std::size_t> support);

struct TransformOptions {
  std::size_t threads = 1;
  /// Order in which varilets are computed; empty means index order. Results
  /// never depend on it.
  std::vector<std::size_t> order;
};

/// The varilet basis of a field with respect to a lens. The varilets live on
/// the domain refined at the preimages of every support boundary, so that
/// each one is exactly piecewise linear there.
struct VariletBasis {
  std::shared_ptr<const Factorization> factorization;
  Lens lens;
  std::shared_ptr<const LensLayout> layout;
  std::shared_ptr<const PullbackDomain> pullback;
  std::vector<double> amplitudes;      // ttv of each support
  std::vector<MiddleFunction> gammas;  // functions on the middle space
  std::vector<ScalarField> varilets;   // gammas pulled back to the domain
  std::vector<Support> supports;
  std::vector<LinkPair> links;

  std::size_t size() const { return amplitudes.size(); }
  const ScalarField& refined_field() const { return pullback->field(); }
};

/// Throws DegenerateFieldError when the field is constant on a component,
/// LensError when the lens is invalid for this field.
VariletBasis varilet_transform(std::shared_ptr<const Factorization> fact, const Lens& lens,
                               const TransformOptions& options = {});
VariletBasis varilet_transform(const ScalarField& field, std::span<const RegionSpec> lens,
                               const TransformOptions& options = {});

/// Sum of the amplitude-weighted varilets, on the refined domain.
ScalarField reconstruct(const VariletBasis& basis);

/// Filtered field in the middle space, built by following link pairs from
/// the roots outward. Throws CoefficientError on a bad coefficient vector.
MiddleFunction filter_factor(const VariletBasis& basis, std::span<const double> coeffs);

struct FilterOptions {
  bool self_check = true;
};

/// sum_i coeffs[i] * g_i, evaluated through the middle space. Unless the
/// self check is disabled the varilet sum is also formed and compared;
/// disagreement raises ConsistencyError.
ScalarField filter(const VariletBasis& basis, std::span<const double> coeffs, const FilterOptions& options = {});

/// Checks that the filtered field's middle space is the middle space with
/// zero-coefficient supports collapsed, and that its ttv is sum |coeffs|.
VerificationReport filter_quotient_check(const VariletBasis& basis, std::span<const double> coeffs,
                                         double rel_tol = 1e-9);

nlohmann::json basis_to_json(const VariletBasis& basis);

/// Rebuilds a basis from its JSON document (field and lens are re-derived).
VariletBasis basis_from_json(const nlohmann::json& doc, const TransformOptions& options = {});

}  // namespace varilet
