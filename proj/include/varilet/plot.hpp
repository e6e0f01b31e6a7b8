#pragma once

#include <string>

#include "varilet/field.hpp"
#include "varilet/mlf.hpp"
#include "varilet/transform.hpp"

namespace varilet {

/// SVG renderers. Output depends only on the input (fixed number format,
/// stable ordering), so files can be compared byte for byte.

/// Polyline through (position, value). Vertices inserted by subdivision are
/// placed at their parameter along the original edge. Throws
/// ValidationError unless the coarsened domain is a chain.
std::string series_svg(const ScalarField& field);

/// Layered drawing of the middle space: height is the light factor, each
/// component gets its own column band.
std::string middle_space_svg(const Factorization& fact);

/// Series (when the domain is a chain) above the middle space drawing.
std::string field_svg(const ScalarField& field);

/// One panel per varilet, titled with its index and amplitude.
std::string basis_svg(const VariletBasis& basis);

}  // namespace varilet
