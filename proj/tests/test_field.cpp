#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "varilet/error.hpp"
#include "varilet/field.hpp"

using namespace varilet;

TEST_CASE("series becomes a chain with consecutive ids") {
  const std::vector<double> x{0, 2, 1, 3, 0};
  const ScalarField f = load_series(x);
  CHECK(f.domain().vertex_count() == 5);
  CHECK(f.domain().edge_count() == 4);
  CHECK(f.domain().component_count() == 1);
  REQUIRE(f.domain().chain_order());
  CHECK(classic_tv_1d(f) == 8.0);
  CHECK(classic_tv_1d(load_series(std::vector<double>{0, 1, 0})) == 2.0);
  CHECK(f.evaluate({1, 0.5}) == doctest::Approx(1.5));
}

TEST_CASE("series needs two finite samples") {
  CHECK_THROWS_AS(load_series(std::vector<double>{1.0}), ParseError);
  CHECK_THROWS_AS(load_series(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}), ParseError);
}

TEST_CASE("csv parsing skips one header line and blank lines") {
  std::istringstream in("value\n0\n\n2\n1.5\n");
  CHECK(parse_series_csv(in) == std::vector<double>{0, 2, 1.5});
  std::istringstream bad("0\n1\nabc\n");
  CHECK_THROWS_AS(parse_series_csv(bad), ParseError);
}

TEST_CASE("graph json round trip keeps ids and split origins") {
  const auto doc = nlohmann::json::parse(R"({
    "format": "varilet.field", "version": 1,
    "vertices": [{"id": 10, "value": 0}, {"id": 20, "value": 1}, {"id": 30, "value": 1,
                 "split": {"edge": 7, "t": 0.5}}],
    "edges": [{"id": 7, "endpoints": [10, 30]}, {"id": 9, "endpoints": [30, 20]}]
  })");
  const ScalarField f = load_graph_field(doc);
  CHECK(f.domain().vertex_id(2) == 30);
  REQUIRE(f.domain().origin(2));
  CHECK(f.domain().origin(2)->edge_id == 7);
  CHECK(field_to_json(f) == doc);
}

TEST_CASE("malformed graphs are rejected") {
  auto parse = [](const char* text) { return load_graph_field(nlohmann::json::parse(text)); };
  SUBCASE("duplicate vertex id") {
    CHECK_THROWS_AS(parse(R"({"vertices":[{"id":1,"value":0},{"id":1,"value":1}],"edges":[]})"), ParseError);
  }
  SUBCASE("dangling endpoint") {
    CHECK_THROWS_AS(parse(R"({"vertices":[{"id":1,"value":0},{"id":2,"value":1}],
                              "edges":[{"id":0,"endpoints":[1,3]}]})"),
                    ParseError);
  }
  SUBCASE("self loop") {
    CHECK_THROWS_AS(parse(R"({"vertices":[{"id":1,"value":0},{"id":2,"value":1}],
                              "edges":[{"id":0,"endpoints":[1,1]},{"id":1,"endpoints":[1,2]}]})"),
                    ParseError);
  }
  SUBCASE("isolated vertex") {
    CHECK_THROWS_AS(parse(R"({"vertices":[{"id":1,"value":0},{"id":2,"value":1},{"id":3,"value":2}],
                              "edges":[{"id":0,"endpoints":[1,2]}]})"),
                    ParseError);
  }
  SUBCASE("wrong format tag") {
    CHECK_THROWS_AS(parse(R"({"format":"other","vertices":[],"edges":[]})"), ParseError);
  }
}

TEST_CASE("parallel edges form a loop") {
  const ScalarField f = load_graph_field(nlohmann::json::parse(R"({
    "vertices":[{"id":0,"value":0},{"id":1,"value":2}],
    "edges":[{"id":0,"endpoints":[0,1]},{"id":1,"endpoints":[1,0]}]})"));
  CHECK(f.domain().edge_count() == 2);
  CHECK_FALSE(f.domain().chain_order());
  CHECK_THROWS_AS(classic_tv_1d(f), ValidationError);
}

TEST_CASE("linear combination checks its inputs") {
  const ScalarField a = load_series(std::vector<double>{0, 1, 2});
  const ScalarField b(a.domain_ptr(), {2, 2, 2});
  const std::vector<ScalarField> fields{a, b};
  const ScalarField c = linear_combination(fields, std::vector<double>{2.0, -0.5});
  CHECK(std::vector<double>(c.values().begin(), c.values().end()) == std::vector<double>{-1, 1, 3});
  CHECK_THROWS_AS(linear_combination(fields, std::vector<double>{1.0}), CoefficientError);
  const ScalarField other = load_series(std::vector<double>{0, 1, 2});
  const std::vector<ScalarField> mixed{a, other};
  CHECK_THROWS_AS(linear_combination(mixed, std::vector<double>{1.0, 1.0}), ValidationError);
}

TEST_CASE("subdivision keeps values and coarsen undoes it") {
  const ScalarField f = load_series(std::vector<double>{0, 2, 1, 3, 0});
  const ScalarField once = subdivide_edge(f, 3, 0.25);
  CHECK(once.domain().vertex_count() == 6);
  CHECK(once.value(5) == doctest::Approx(2.25));
  const ScalarField twice = subdivide_edge(once, 3, 0.5);  // the head piece of edge 3 again
  CHECK(twice.domain().origin(6)->edge_id == 3);
  CHECK(twice.domain().origin(6)->t == doctest::Approx(0.125));
  CHECK(classic_tv_1d(twice) == doctest::Approx(8.0));
  const ScalarField back = coarsen(twice);
  CHECK(field_to_json(back) == field_to_json(f));
  CHECK_THROWS_AS(subdivide_edge(f, 0, 1.0), ValidationError);
}

TEST_CASE("classic tv matches the oracle on random series") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> value(-100.0, 100.0);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> x(2 + k * 7);
    for (double& v : x) v = value(rng);
    CHECK(oracle::close(classic_tv_1d(load_series(x)), oracle::chain_variation(x), 1e-13));
  }
}
