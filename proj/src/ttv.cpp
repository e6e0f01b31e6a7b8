#include "varilet/ttv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varilet/error.hpp"
#include "varilet/numeric.hpp"

namespace varilet {

std::vector<Fragment> normalize_fragments(std::vector<Fragment> fragments) {
  std::sort(fragments.begin(), fragments.end(), [](const Fragment& a, const Fragment& b) {
    return a.edge != b.edge ? a.edge < b.edge : a.lo < b.lo;
  });
  std::vector<Fragment> out;
  for (const Fragment& f : fragments) {
    if (!out.empty() && out.back().edge == f.edge && f.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, f.hi);
    } else {
      out.push_back(f);
    }
  }
  return out;
}

bool fragments_fit(const MiddleSpace& middle, const std::vector<Fragment>& fragments) {
  return std::all_of(fragments.begin(), fragments.end(), [&](const Fragment& f) {
    return f.edge < middle.edge_count() && middle.lo_value(f.edge) <= f.lo && f.lo < f.hi &&
           f.hi <= middle.hi_value(f.edge);
  });
}

Region whole_component(const MiddleSpace& middle, std::size_t component) {
  Region r;
  r.component = component;
  for (std::size_t e = 0; e < middle.edge_count(); ++e) {
    if (middle.edge(e).component == component) r.fragments.push_back({e, middle.lo_value(e), middle.hi_value(e)});
  }
  return r;
}

double ttv(const MiddleSpace& middle) {
  CompensatedSum sum;
  for (std::size_t e = 0; e < middle.edge_count(); ++e) sum.add(middle.length(e));
  return sum.value();
}

double ttv(const ScalarField& field) { return ttv(factorize(field).middle); }

double ttv_restricted(const MiddleSpace& middle, const Region& region) {
  if (!fragments_fit(middle, region.fragments)) {
    throw ValidationError("region does not belong to this middle space");
  }
  CompensatedSum sum;
  for (const Fragment& f : region.fragments) sum.add(f.hi - f.lo);
  return sum.value();
}

VerificationReport check_decomposition(const MiddleSpace& middle, std::span<const Region> regions) {
  VerificationReport report;
  std::vector<std::vector<std::pair<double, double>>> per_edge(middle.edge_count());
  bool foreign = false;
  for (const Region& r : regions) {
    if (!fragments_fit(middle, r.fragments)) {
      foreign = true;
      continue;
    }
    for (const Fragment& f : r.fragments) per_edge[f.edge].emplace_back(f.lo, f.hi);
  }
  report.add("regions_fit", "every fragment lies on an edge of this middle space", !foreign);

  std::size_t gaps = 0, overlaps = 0;
  std::string first;
  for (std::size_t e = 0; e < middle.edge_count(); ++e) {
    auto& iv = per_edge[e];
    std::sort(iv.begin(), iv.end());
    double reach = middle.lo_value(e);
    for (const auto& [lo, hi] : iv) {
      if (lo > reach) {
        ++gaps;
        if (first.empty()) first = "gap on edge " + std::to_string(e) + " at " + std::to_string(reach);
      } else if (lo < reach) {
        ++overlaps;
        if (first.empty()) first = "overlap on edge " + std::to_string(e) + " at " + std::to_string(lo);
      }
      reach = std::max(reach, hi);
    }
    if (reach < middle.hi_value(e)) {
      ++gaps;
      if (first.empty()) first = "edge " + std::to_string(e) + " uncovered above " + std::to_string(reach);
    }
  }
  report.add("cover", "regions cover every edge of the middle space", gaps == 0, static_cast<double>(gaps), 0.0,
             gaps ? first : "");
  report.add("boundary_overlap_only", "regions meet only at boundary points", overlaps == 0,
             static_cast<double>(overlaps), 0.0, overlaps ? first : "");

  const double total = ttv(middle);
  CompensatedSum parts;
  for (const Region& r : regions) {
    if (fragments_fit(middle, r.fragments)) parts.add(ttv_restricted(middle, r));
  }
  const double err = std::abs(total - parts.value());
  const double tol = 1e-9 * std::max(1.0, total);
  report.add("ttv_additivity", "ttv equals the sum of restricted ttv over the regions", err <= tol, err, tol);
  return report;
}

}  // namespace varilet
