#include "varilet/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include "varilet/error.hpp"

namespace varilet {

namespace {

constexpr double kWidth = 640.0;
constexpr double kPanel = 220.0;
constexpr double kMargin = 30.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Maps v into [a, b]; a flat range maps to the middle.
  double map(double v, double a, double b) const {
    if (!(hi > lo)) return 0.5 * (a + b);
    return a + (v - lo) / (hi - lo) * (b - a);
  }
};

// Panel frame with a title; `top` is the y offset of the panel.
void frame(std::ostringstream& out, double top, const std::string& title) {
  out << "<rect x=\"" << fmt(kMargin) << "\" y=\"" << fmt(top + kMargin) << "\" width=\"" << fmt(kWidth - 2 * kMargin)
      << "\" height=\"" << fmt(kPanel - 2 * kMargin) << "\" fill=\"none\" stroke=\"#bbbbbb\"/>\n";
  out << "<text x=\"" << fmt(kMargin) << "\" y=\"" << fmt(top + kMargin - 8) << "\" font-size=\"12\">" << title
      << "</text>\n";
}

std::string document(const std::string& body, std::size_t panels) {
  std::ostringstream out;
  const double h = kPanel * static_cast<double>(std::max<std::size_t>(panels, 1));
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(h)
      << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(h) << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body << "</svg>\n";
  return out.str();
}

// Position of every vertex along the coarse chain, or nothing when the
// coarsened domain is not a chain.
std::optional<std::vector<double>> chain_positions(const ScalarField& field) {
  const ScalarField coarse = coarsen(field);
  const auto order = coarse.domain().chain_order();
  if (!order) return std::nullopt;
  const DomainGraph& cg = coarse.domain();
  std::vector<double> coarse_pos(cg.vertex_count());
  for (std::size_t k = 0; k < order->size(); ++k) coarse_pos[(*order)[k]] = static_cast<double>(k);

  const DomainGraph& g = field.domain();
  std::vector<double> pos(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (const auto& o = g.origin(v)) {
      const auto e = cg.edge_index_of(o->edge_id);
      if (!e) return std::nullopt;
      const double a = coarse_pos[cg.edge(*e).u];
      const double b = coarse_pos[cg.edge(*e).v];
      pos[v] = a + o->t * (b - a);
    } else {
      const auto c = cg.index_of(g.vertex_id(v));
      if (!c) return std::nullopt;
      pos[v] = coarse_pos[*c];
    }
  }
  return pos;
}

void series_panel(std::ostringstream& out, const ScalarField& field, const std::vector<double>& pos, double top,
                  const std::string& title) {
  frame(out, top, title);
  std::vector<std::size_t> idx(pos.size());
  for (std::size_t v = 0; v < idx.size(); ++v) idx[v] = v;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pos[a] < pos[b]; });
  Range xs, ys;
  for (std::size_t v : idx) {
    xs.add(pos[v]);
    ys.add(field.value(v));
  }
  const double x0 = kMargin + 10, x1 = kWidth - kMargin - 10;
  const double y0 = top + kPanel - kMargin - 10, y1 = top + kMargin + 10;
  out << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t v = idx[k];
    out << (k ? " " : "") << fmt(xs.map(pos[v], x0, x1)) << ',' << fmt(ys.map(field.value(v), y0, y1));
  }
  out << "\"/>\n";
  out << "<text x=\"" << fmt(kWidth - kMargin) << "\" y=\"" << fmt(top + kMargin - 8)
      << "\" font-size=\"10\" text-anchor=\"end\">[" << label(ys.lo) << ", " << label(ys.hi) << "]</text>\n";
}

// Values plotted against vertex index, for fields on general graphs.
void stem_panel(std::ostringstream& out, const ScalarField& field, double top, const std::string& title) {
  frame(out, top, title);
  Range xs, ys;
  ys.add(0.0);
  for (std::size_t v = 0; v < field.values().size(); ++v) {
    xs.add(static_cast<double>(v));
    ys.add(field.value(v));
  }
  const double x0 = kMargin + 10, x1 = kWidth - kMargin - 10;
  const double y0 = top + kPanel - kMargin - 10, y1 = top + kMargin + 10;
  const double base = ys.map(0.0, y0, y1);
  for (std::size_t v = 0; v < field.values().size(); ++v) {
    const double x = xs.map(static_cast<double>(v), x0, x1);
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(base) << "\" x2=\"" << fmt(x) << "\" y2=\""
        << fmt(ys.map(field.value(v), y0, y1)) << "\" stroke=\"#1f5fa8\"/>\n";
  }
}

void middle_panel(std::ostringstream& out, const Factorization& fact, double top) {
  const MiddleSpace& m = fact.middle;
  frame(out, top, "middle space (" + std::to_string(m.vertex_count()) + " vertices, " +
                      std::to_string(m.edge_count()) + " edges)");
  if (m.vertex_count() == 0) return;

  // Depth-first rank inside each component fixes the column of a vertex.
  std::vector<bool> seen(m.vertex_count(), false);
  std::vector<std::size_t> per_component(m.component_count(), 0);
  std::vector<std::size_t> rank(m.vertex_count(), 0);
  for (std::size_t s = 0; s < m.vertex_count(); ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      rank[v] = per_component[m.vertex(v).component]++;
      const auto inc = m.incident(v);
      for (auto it = inc.rbegin(); it != inc.rend(); ++it) {
        const std::size_t w = m.other_end(*it, v);
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  const double band = (kWidth - 2 * kMargin) / static_cast<double>(std::max<std::size_t>(m.component_count(), 1));
  Range ys;
  for (const MiddleVertex& v : m.vertices()) ys.add(v.value);
  const double y0 = top + kPanel - kMargin - 10, y1 = top + kMargin + 10;
  std::vector<double> x(m.vertex_count()), y(m.vertex_count());
  for (std::size_t v = 0; v < m.vertex_count(); ++v) {
    const std::size_t c = m.vertex(v).component;
    const double slots = static_cast<double>(per_component[c]);
    x[v] = kMargin + band * (static_cast<double>(c) + (static_cast<double>(rank[v]) + 0.5) / slots);
    y[v] = ys.map(m.value(v), y0, y1);
  }
  for (const MiddleEdge& e : m.edges()) {
    out << "<line x1=\"" << fmt(x[e.lo]) << "\" y1=\"" << fmt(y[e.lo]) << "\" x2=\"" << fmt(x[e.hi]) << "\" y2=\""
        << fmt(y[e.hi]) << "\" stroke=\"#333333\"/>\n";
  }
  for (std::size_t v = 0; v < m.vertex_count(); ++v) {
    out << "<circle cx=\"" << fmt(x[v]) << "\" cy=\"" << fmt(y[v]) << "\" r=\"3\" fill=\"#a83a1f\"/>\n";
    out << "<text x=\"" << fmt(x[v] + 5) << "\" y=\"" << fmt(y[v] - 4) << "\" font-size=\"9\">" << label(m.value(v))
        << "</text>\n";
  }
}

}  // namespace

std::string series_svg(const ScalarField& field) {
  const auto pos = chain_positions(field);
  if (!pos) throw ValidationError("series plot needs a chain domain");
  std::ostringstream out;
  series_panel(out, field, *pos, 0.0, "series");
  return document(out.str(), 1);
}

std::string middle_space_svg(const Factorization& fact) {
  std::ostringstream out;
  middle_panel(out, fact, 0.0);
  return document(out.str(), 1);
}

std::string field_svg(const ScalarField& field) {
  std::ostringstream out;
  const Factorization fact = factorize(field);
  const auto pos = chain_positions(field);
  std::size_t panels = 0;
  if (pos) series_panel(out, field, *pos, kPanel * static_cast<double>(panels++), "series");
  middle_panel(out, fact, kPanel * static_cast<double>(panels++));
  return document(out.str(), panels);
}

std::string basis_svg(const VariletBasis& basis) {
  std::ostringstream out;
  const auto pos = chain_positions(basis.refined_field());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const std::string title = "g" + std::to_string(i) + "  amplitude " + label(basis.amplitudes[i]);
    const double top = kPanel * static_cast<double>(i);
    if (pos) {
      series_panel(out, basis.varilets[i], *pos, top, title);
    } else {
      stem_panel(out, basis.varilets[i], top, title);
    }
  }
  return document(out.str(), basis.size());
}

}  // namespace varilet
