#pragma once

// Independent reference computations. None of these go through the
// factorization code: on a graph every contour away from constant edges is a
// single point, so ttv reduces to summed edge variation and contour counts to
// crossing counts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "varilet/field.hpp"

namespace oracle {

inline double edge_variation(const varilet::ScalarField& f) {
  long double sum = 0.0L;
  for (const auto& e : f.domain().edges()) sum += std::fabs(static_cast<long double>(f.value(e.u)) - f.value(e.v));
  return static_cast<double>(sum);
}

inline double chain_variation(const std::vector<double>& x) {
  long double sum = 0.0L;
  for (std::size_t k = 1; k < x.size(); ++k) sum += std::fabs(static_cast<long double>(x[k]) - x[k - 1]);
  return static_cast<double>(sum);
}

/// Contours at a level that is not a vertex value, on a field without
/// constant edges: one per edge crossing the level.
inline std::size_t crossings(const varilet::ScalarField& f, double y) {
  std::size_t n = 0;
  for (const auto& e : f.domain().edges()) {
    const double a = std::min(f.value(e.u), f.value(e.v));
    const double b = std::max(f.value(e.u), f.value(e.v));
    if (a < y && y < b) ++n;
  }
  return n;
}

/// Expected varilets on a chain for the lens {root, component of
/// {x >= level} holding sample `seed`}, evaluated at the original samples.
struct SingleCut {
  double alpha_root = 0.0;
  double alpha_cut = 0.0;
  std::vector<double> g_root;
  std::vector<double> g_cut;
};

inline SingleCut single_cut(const std::vector<double>& x, double level, std::size_t seed) {
  const std::size_t n = x.size();
  std::size_t lo = seed, hi = seed;
  while (lo > 0 && x[lo - 1] >= level) --lo;
  while (hi + 1 < n && x[hi + 1] >= level) ++hi;
  long double cut = 0.0L;
  for (std::size_t k = lo; k < hi; ++k) cut += std::fabs(static_cast<long double>(x[k + 1]) - x[k]);
  if (lo > 0) cut += x[lo] - static_cast<long double>(level);
  if (hi + 1 < n) cut += x[hi] - static_cast<long double>(level);
  SingleCut out;
  out.alpha_cut = static_cast<double>(cut);
  out.alpha_root = chain_variation(x) - out.alpha_cut;
  out.g_root.resize(n);
  out.g_cut.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const bool inside = lo <= k && k <= hi;
    out.g_root[k] = (inside ? level : x[k]) / out.alpha_root;
    out.g_cut[k] = inside ? (x[k] - level) / out.alpha_cut : 0.0;
  }
  return out;
}

inline bool close(double a, double b, double rel = 1e-9) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace oracle
