#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "varilet/error.hpp"
#include "varilet/mlf.hpp"
#include "varilet/ttv.hpp"
#include "varilet/verify.hpp"

using namespace varilet;

namespace {

ScalarField graph(const char* text) { return load_graph_field(nlohmann::json::parse(text)); }

}  // namespace

TEST_CASE("worked chain factorizes into a four edge chain") {
  const ScalarField f = load_series(std::vector<double>{0, 2, 1, 3, 0});
  const Factorization fact = factorize(f);
  const MiddleSpace& m = fact.middle;
  REQUIRE(m.vertex_count() == 5);
  REQUIRE(m.edge_count() == 4);
  CHECK(m.value(0) == 0);
  CHECK(m.value(1) == 0);
  CHECK(m.value(2) == 1);
  CHECK(m.value(3) == 2);
  CHECK(m.value(4) == 3);
  CHECK(m.vertex(2).kind == Criticality::minimum);
  CHECK(m.vertex(3).kind == Criticality::maximum);
  CHECK(m.component_count() == 1);
  CHECK(ttv(m) == 8.0);
  CHECK(count_contours(f, 0.5) == 2);
  CHECK(count_contours(f, 1.5) == 4);
  CHECK(points_at_level(m, 1.5) == 4);
  CHECK(count_contours(f, 1.0) == 3);
  CHECK(verify_factorization(fact).ok());
}

TEST_CASE("regular vertices are suppressed") {
  const Factorization fact = factorize(load_series(std::vector<double>{0, 1, 2, 3}));
  CHECK(fact.middle.vertex_count() == 2);
  CHECK(fact.middle.edge_count() == 1);
  CHECK(fact.factor.vertex_location[1] == MiddleLocation::on_edge(0, 1.0));
}

TEST_CASE("constant edges collapse into one contour") {
  // Triangle 0-1-2 with values (0, 1, 1): the constant edge 1-2 is one point,
  // reached from vertex 0 along two edges, so the middle space is a loop.
  const ScalarField f = graph(R"({"vertices":[{"id":0,"value":0},{"id":1,"value":1},{"id":2,"value":1}],
    "edges":[{"id":0,"endpoints":[0,1]},{"id":1,"endpoints":[1,2]},{"id":2,"endpoints":[2,0]}]})");
  const Factorization fact = factorize(f);
  CHECK(fact.middle.vertex_count() == 2);
  CHECK(fact.middle.edge_count() == 2);
  CHECK(count_contours(f, 0.5) == 2);
  CHECK(count_contours(f, 1.0) == 1);
  CHECK(ttv(fact.middle) == 2.0);
  CHECK_FALSE(fact.factor.edge_image[1]);
  CHECK(verify_factorization(fact).ok());
}

TEST_CASE("constant components are reported, not drawn") {
  const ScalarField f = graph(R"({"vertices":[{"id":0,"value":0},{"id":1,"value":1},
      {"id":2,"value":4},{"id":3,"value":4}],
    "edges":[{"id":0,"endpoints":[0,1]},{"id":1,"endpoints":[2,3]}]})");
  const Factorization fact = factorize(f);
  CHECK(fact.middle.component_count() == 1);
  CHECK(fact.middle.degenerate_domain_components() == std::vector<std::size_t>{1});
  CHECK(fact.factor.vertex_location[2].kind == MiddleLocation::Kind::none);
  CHECK(ttv(f) == 1.0);
  const auto report = verify_factorization(fact);
  CHECK_FALSE(report.find("nondegenerate_components")->passed);
}

TEST_CASE("ttv equals summed edge variation on random graphs") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 60; ++k) {
    const ScalarField f = random_field(rng, 120, static_cast<GraphKind>(k % 5), k % 3 == 0);
    const Factorization fact = factorize(f);
    CAPTURE(k);
    CHECK(oracle::close(ttv(fact.middle), oracle::edge_variation(f), 1e-12));
    CHECK(verify_factorization(fact).ok());
  }
}

TEST_CASE("contour counts match edge crossings at non-vertex levels") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> level(-10.0, 10.0);
  for (int k = 0; k < 40; ++k) {
    const ScalarField f = random_field(rng, 60, static_cast<GraphKind>(k % 5), false);
    const Factorization fact = factorize(f);
    for (int j = 0; j < 5; ++j) {
      const double y = level(rng);
      CHECK(count_contours(f, y) == oracle::crossings(f, y));
      CHECK(points_at_level(fact.middle, y) == oracle::crossings(f, y));
    }
  }
}

TEST_CASE("collinear subdivision leaves the middle space unchanged") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> t(0.1, 0.9);
  for (int k = 0; k < 30; ++k) {
    ScalarField f = random_field(rng, 40, static_cast<GraphKind>(k % 5), k % 2 == 0);
    const MiddleSignature before = signature(factorize(f).middle);
    std::uniform_int_distribution<std::size_t> pick(0, f.domain().edge_count() - 1);
    for (int j = 0; j < 5; ++j) f = subdivide_edge(f, pick(rng), t(rng));
    const Factorization after = factorize(f);
    std::string why;
    CHECK_MESSAGE(signatures_match(before, signature(after.middle), 1e-12, &why), why);
    CHECK(verify_factorization(after).ok());
  }
}

TEST_CASE("signatures detect a different middle space") {
  const auto a = signature(factorize(load_series(std::vector<double>{0, 2, 1, 3, 0})).middle);
  const auto b = signature(factorize(load_series(std::vector<double>{0, 2, 1.5, 3, 0})).middle);
  std::string why;
  CHECK_FALSE(signatures_match(a, b, 1e-9, &why));
  CHECK_FALSE(why.empty());
}

TEST_CASE("middle space export lists every vertex location") {
  const Factorization fact = factorize(load_series(std::vector<double>{0, 2, 1, 3, 0}));
  const auto doc = middle_space_to_json(fact);
  CHECK(doc.at("format") == "varilet.middle");
  CHECK(doc.at("vertices").size() == 5);
  CHECK(doc.at("edges").size() == 4);
}
