#pragma once

#include <span>

#include "varilet/field.hpp"
#include "varilet/mlf.hpp"
#include "varilet/region.hpp"
#include "varilet/report.hpp"

namespace varilet {

/// Topological total variation: the summed light-factor length of all
/// middle edges.
double ttv(const MiddleSpace& middle);

/// Convenience: factorizes and measures.
double ttv(const ScalarField& field);

/// Light-factor length of the part of the middle space covered by `region`.
double ttv_restricted(const MiddleSpace& middle, const Region& region);

/// Checks that `regions` cover the middle space, overlap only at boundary
/// points, and that their restricted ttv values add up to the total.
VerificationReport check_decomposition(const MiddleSpace& middle, std::span<const Region> regions);

}  // namespace varilet
