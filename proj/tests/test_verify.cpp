#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "varilet/verify.hpp"

using namespace varilet;

namespace {

const std::vector<std::string> kLemmaChecks{"restriction_extension", "ttv_decomposition", "flat_extension",
                                            "constant_boundary",     "link",              "additive_decomposition",
                                            "zero_varilet",          "filter_factor",     "filter_quotient"};

std::vector<RegionSpec> worked_lens() {
  RegionSpec cut;
  cut.kind = RegionSpec::Kind::threshold;
  cut.cut = {1.0, Direction::up, Seed{Seed::Kind::domain_vertex, 3, 0.0}};
  return {cut};
}

ScalarField worked_field() { return load_series(std::vector<double>{0, 2, 1, 3, 0}); }

}  // namespace

TEST_CASE("all lemma checks pass on the worked example") {
  const auto report = check_lemmas(worked_field(), worked_lens());
  CHECK(report.checks().size() == 9);
  for (const auto& name : kLemmaChecks) {
    const CheckResult* c = report.find(name);
    REQUIRE_MESSAGE(c, name);
    CHECK_MESSAGE(c->passed, name << ": " << c->detail);
  }
}

TEST_CASE("basis checks pass on the worked example and the trivial lens") {
  const auto report = check_basis(worked_field(), worked_lens(), 100, 7);
  CHECK(report.ok());
  CHECK(report.find("basis_property"));
  CHECK(check_basis(worked_field(), {}, 100, 7).ok());
}

TEST_CASE("basis checks are deterministic for a seed") {
  std::mt19937_64 rng(3);
  const ScalarField f = random_field(rng, 60);
  const auto a = check_basis(f, {}, 20, 99).to_json();
  const auto b = check_basis(f, {}, 20, 99).to_json();
  CHECK(a == b);
}

TEST_CASE("invalid lens skips the lemma checks") {
  RegionSpec bad;
  bad.kind = RegionSpec::Kind::fragments;
  bad.fragments = {{0, 0.5, 2}, {2, 1.5, 2}};
  RegionSpec root;
  root.kind = RegionSpec::Kind::root;
  const std::vector<RegionSpec> lens{root, bad};
  const auto report = check_lemmas(worked_field(), lens);
  CHECK_FALSE(report.ok());
  CHECK_FALSE(report.find("restriction_extension"));
  CHECK(report.find("lens/constant_boundary"));
}

TEST_CASE("each check can fail under an injected fault") {
  const std::vector<std::pair<Fault, std::vector<std::string>>> cases{
      {Fault::gamma_breakpoint, {"restriction_extension", "additive_decomposition"}},
      {Fault::amplitude, {"restriction_extension", "ttv_decomposition", "filter_quotient"}},
      {Fault::boundary_value, {"constant_boundary"}},
      {Fault::link_node, {"link"}},
      {Fault::flat_value, {"flat_extension", "zero_varilet"}},
      {Fault::varilet_value, {"filter_factor", "additive_decomposition"}},
  };
  std::set<std::string> tripped;
  for (const auto& [fault, expected] : cases) {
    Prepared prep = prepare(worked_field(), worked_lens());
    REQUIRE(inject_fault(prep, fault));
    const auto report = check_lemmas(prep);
    for (const auto& name : expected) {
      const std::string fault_name = to_string(fault);
      CAPTURE(fault_name);
      CAPTURE(name);
      CHECK_FALSE(report.find(name)->passed);
      tripped.insert(name);
    }
  }
  CHECK(tripped.size() == kLemmaChecks.size());
}

TEST_CASE("a moved breakpoint fails the reconstruction check") {
  Prepared prep = prepare(worked_field(), worked_lens());
  REQUIRE(inject_fault(prep, Fault::gamma_breakpoint));
  const auto report = check_basis(prep, 10, 1);
  CHECK_FALSE(report.find("reconstruction")->passed);
}

TEST_CASE("fault names round trip") {
  for (Fault f : {Fault::gamma_breakpoint, Fault::amplitude, Fault::boundary_value, Fault::link_node,
                  Fault::flat_value, Fault::varilet_value}) {
    CHECK(fault_from_string(to_string(f)) == f);
  }
}

TEST_CASE("small fuzz run is clean and deterministic") {
  FuzzOptions opt;
  opt.seed = 4;
  opt.fields = 10;
  opt.lenses_per_field = 3;
  opt.max_vertices = 40;
  opt.trials = 10;
  const auto a = fuzz(opt);
  for (const auto& failure : a.failures()) MESSAGE(failure);
  CHECK(a.ok());
  opt.threads = 3;
  CHECK(fuzz(opt).to_json() == a.to_json());
}

TEST_CASE("two-vertex fields exercise the trivial paths") {
  FuzzOptions opt;
  opt.seed = 2;
  opt.fields = 10;
  opt.max_vertices = 2;
  opt.trials = 5;
  CHECK(fuzz(opt).ok());
}

TEST_CASE("random fields have no constant components or isolated vertices") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 50; ++k) {
    const ScalarField f = random_field(rng, 30, static_cast<GraphKind>(k % 5), true);
    CHECK(factorize(f).middle.degenerate_domain_components().empty());
  }
}
