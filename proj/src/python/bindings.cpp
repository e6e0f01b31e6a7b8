#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "varilet/error.hpp"
#include "varilet/field.hpp"
#include "varilet/lens.hpp"
#include "varilet/mlf.hpp"
#include "varilet/plot.hpp"
#include "varilet/transform.hpp"
#include "varilet/ttv.hpp"
#include "varilet/verify.hpp"

namespace py = pybind11;
using namespace varilet;

namespace {

// JSON crosses the boundary as text; the Python side parses it.
std::string text(const nlohmann::json& doc) { return doc.dump(); }

nlohmann::json parse(const std::string& s) {
  try {
    return nlohmann::json::parse(s);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
}

std::vector<ThresholdCut> to_cuts(const std::vector<std::tuple<double, std::string, Id>>& cuts) {
  std::vector<ThresholdCut> out;
  for (const auto& [level, dir, vertex] : cuts) {
    if (dir != "up" && dir != "down") throw ParseError("cut direction must be 'up' or 'down'");
    out.push_back({level, dir == "up" ? Direction::up : Direction::down, Seed{Seed::Kind::domain_vertex, vertex, 0.0}});
  }
  return out;
}

Lens make_lens(const Factorization& fact, const std::optional<std::string>& lens_json,
               const std::vector<std::tuple<double, std::string, Id>>& cuts, bool branch, double min_amplitude) {
  if (lens_json) return realize_lens(fact, lens_specs_from_json(parse(*lens_json)));
  if (branch) return build_branch_lens(fact, min_amplitude);
  const auto c = to_cuts(cuts);
  return build_threshold_lens(fact, c);
}

std::vector<double> values_of(const ScalarField& f) { return {f.values().begin(), f.values().end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Varilet transform core";

  auto base = py::register_exception<Error>(m, "VariletError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<LensError>(m, "LensError", base.ptr());
  py::register_exception<CoefficientError>(m, "CoefficientError", base.ptr());
  py::register_exception<DegenerateFieldError>(m, "DegenerateFieldError", base.ptr());
  py::register_exception<ConsistencyError>(m, "ConsistencyError", base.ptr());

  py::class_<ScalarField>(m, "Field")
      .def_static("from_series", [](const std::vector<double>& x) { return load_series(x); }, py::arg("samples"))
      .def_static("from_json", [](const std::string& s) { return load_graph_field(parse(s)); }, py::arg("document"))
      .def_static("read", &read_field_file, py::arg("path"))
      .def_property_readonly("values", &values_of)
      .def_property_readonly("vertex_count", [](const ScalarField& f) { return f.domain().vertex_count(); })
      .def_property_readonly("edge_count", [](const ScalarField& f) { return f.domain().edge_count(); })
      .def("to_json", [](const ScalarField& f) { return text(field_to_json(f)); })
      .def("coarsen", &coarsen)
      .def("subdivide", &subdivide_edge, py::arg("edge"), py::arg("t"))
      .def("__len__", [](const ScalarField& f) { return f.domain().vertex_count(); });

  py::class_<VariletBasis>(m, "Basis")
      .def_static("from_json", [](const std::string& s) { return basis_from_json(parse(s)); }, py::arg("document"))
      .def_property_readonly("amplitudes", [](const VariletBasis& b) { return b.amplitudes; })
      .def_property_readonly("varilets", [](const VariletBasis& b) {
        std::vector<std::vector<double>> out;
        for (const auto& g : b.varilets) out.push_back(values_of(g));
        return out;
      })
      .def_property_readonly("refined_field", [](const VariletBasis& b) { return b.refined_field(); })
      .def("reconstruct", &reconstruct)
      .def("to_json", [](const VariletBasis& b) { return text(basis_to_json(b)); })
      .def("__len__", &VariletBasis::size);

  m.def("ttv", py::overload_cast<const ScalarField&>(&ttv), py::arg("field"));
  m.def("classic_tv_1d", &classic_tv_1d, py::arg("field"));
  m.def("count_contours", &count_contours, py::arg("field"), py::arg("level"));
  m.def(
      "middle_space_json", [](const ScalarField& f) { return text(middle_space_to_json(factorize(f))); },
      py::arg("field"));
  m.def(
      "lens_json",
      [](const ScalarField& f, const std::vector<std::tuple<double, std::string, Id>>& cuts, bool branch,
         double min_amplitude) {
        const Factorization fact = factorize(f);
        return text(lens_to_json(make_lens(fact, std::nullopt, cuts, branch, min_amplitude)));
      },
      py::arg("field"), py::arg("cuts") = std::vector<std::tuple<double, std::string, Id>>{},
      py::arg("branch") = false, py::arg("min_amplitude") = 0.0);
  m.def(
      "transform",
      [](const ScalarField& f, const std::optional<std::string>& lens,
         const std::vector<std::tuple<double, std::string, Id>>& cuts, bool branch, double min_amplitude,
         std::size_t threads) {
        auto fact = std::make_shared<const Factorization>(factorize(f));
        const Lens l = make_lens(*fact, lens, cuts, branch, min_amplitude);
        TransformOptions opt;
        opt.threads = threads;
        py::gil_scoped_release release;
        return varilet_transform(fact, l, opt);
      },
      py::arg("field"), py::arg("lens") = std::nullopt,
      py::arg("cuts") = std::vector<std::tuple<double, std::string, Id>>{}, py::arg("branch") = false,
      py::arg("min_amplitude") = 0.0, py::arg("threads") = 1);
  m.def(
      "filter",
      [](const VariletBasis& b, const std::vector<double>& coeffs, bool self_check, bool refined) {
        const ScalarField out = filter(b, coeffs, FilterOptions{self_check});
        return refined ? out : coarsen(out);
      },
      py::arg("basis"), py::arg("coeffs"), py::arg("self_check") = true, py::arg("refined") = false);
  m.def(
      "verify",
      [](const ScalarField& f, const std::optional<std::string>& lens, int trials, std::uint64_t seed,
         const std::optional<std::string>& fault) {
        auto fact = std::make_shared<const Factorization>(factorize(f));
        const Lens l = make_lens(*fact, lens, {}, false, 0.0);
        Prepared prep = prepare(fact, l);
        if (fault && !inject_fault(prep, fault_from_string(*fault))) {
          throw ValidationError("fault " + *fault + " has no place in this basis");
        }
        VerificationReport report = check_lemmas(prep, seed);
        report.merge(check_basis(prep, trials, seed));
        return text(report.to_json());
      },
      py::arg("field"), py::arg("lens") = std::nullopt, py::arg("trials") = 20, py::arg("seed") = 1,
      py::arg("fault") = std::nullopt);
  m.def(
      "fuzz",
      [](std::uint64_t seed, int fields, int lenses_per_field, int max_vertices, int trials) {
        FuzzOptions opt;
        opt.seed = seed;
        opt.fields = fields;
        opt.lenses_per_field = lenses_per_field;
        opt.max_vertices = max_vertices;
        opt.trials = trials;
        py::gil_scoped_release release;
        return text(fuzz(opt).to_json());
      },
      py::arg("seed") = 1, py::arg("fields") = 10, py::arg("lenses_per_field") = 3, py::arg("max_vertices") = 100,
      py::arg("trials") = 10);
  m.def("field_svg", &field_svg, py::arg("field"));
  m.def("basis_svg", &basis_svg, py::arg("basis"));
}
