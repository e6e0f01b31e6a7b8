#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <memory>
#include <random>

#include "varilet/error.hpp"
#include "varilet/lens.hpp"
#include "varilet/ttv.hpp"
#include "varilet/verify.hpp"

using namespace varilet;

namespace {

std::shared_ptr<const Factorization> worked() {
  return std::make_shared<const Factorization>(factorize(load_series(std::vector<double>{0, 2, 1, 3, 0})));
}

ThresholdCut peak_cut(double level = 1.0) {
  return {level, Direction::up, Seed{Seed::Kind::domain_vertex, 3, 0.0}};
}

}  // namespace

TEST_CASE("superlevel region at 1 on the worked chain") {
  const auto fact = worked();
  const Region r = threshold_region(*fact, peak_cut());
  // Middle edges: 0 = [0,2] left, 1 = [0,3] right, 2 = [1,2], 3 = [1,3].
  CHECK(r.fragments == std::vector<Fragment>{{0, 1, 2}, {1, 1, 3}, {2, 1, 2}, {3, 1, 3}});
  CHECK(r.boundary_level == 1.0);
  CHECK(ttv_restricted(fact->middle, r) == 6.0);
}

TEST_CASE("strict superlevel closure differs from the closed set at a critical level") {
  const auto fact = worked();
  ThresholdCut cut{1.0, Direction::up, Seed{Seed::Kind::middle_vertex, 3, 0.0}};
  const Region open = threshold_region(*fact, cut, false);
  CHECK(open.fragments == std::vector<Fragment>{{0, 1, 2}, {2, 1, 2}});
}

TEST_CASE("threshold seeds must lie strictly inside the requested set") {
  const auto fact = worked();
  CHECK_THROWS_WITH_AS(threshold_region(*fact, peak_cut(4.0)), doctest::Contains("empty region"), LensError);
  CHECK_THROWS_AS(threshold_region(*fact, peak_cut(3.0)), LensError);
  CHECK_THROWS_AS(threshold_region(*fact, {1.0, Direction::up, Seed{Seed::Kind::domain_vertex, 0, 0}}), LensError);
  CHECK_THROWS_AS(threshold_region(*fact, {1.0, Direction::up, Seed{Seed::Kind::domain_vertex, 99, 0}}), LensError);
  CHECK_THROWS_AS(threshold_region(*fact, peak_cut(-1.0)), LensError);  // whole component
}

TEST_CASE("worked lens validates, with supports and one link pair") {
  const auto fact = worked();
  const std::vector<ThresholdCut> cuts{peak_cut()};
  const Lens lens = build_threshold_lens(*fact, cuts);
  REQUIRE(lens.size() == 2);
  CHECK(lens.specs[0].kind == RegionSpec::Kind::root);
  const LensLayout layout(fact, lens);
  CHECK(layout.valid());
  CHECK(layout.root_count() == 1);
  CHECK(layout.predecessor(1) == 0u);
  CHECK(layout.boundary_level(1) == 1.0);
  CHECK(layout.region_boundary(1).size() == 2);

  const auto sup = supports(layout);
  REQUIRE(sup.size() == 2);
  CHECK(sup[0].region.fragments == std::vector<Fragment>{{0, 0, 1}, {1, 0, 1}});
  CHECK(ttv_restricted(fact->middle, sup[0].region) == 2.0);
  CHECK(ttv_restricted(fact->middle, sup[1].region) == 6.0);
  CHECK(sup[0].boundary.size() == 2);

  const auto links = link_pairs(layout);
  REQUIRE(links.size() == 1);
  CHECK(links[0].predecessor == 0);
  CHECK(links[0].successor == 1);
  CHECK(links[0].value == 1.0);
  CHECK(links[0].p == links[0].q);

  std::vector<Region> tiles;
  for (const Support& s : sup) tiles.push_back(s.region);
  CHECK(check_decomposition(fact->middle, tiles).ok());
}

TEST_CASE("trivial lens has one support and no links") {
  const auto fact = worked();
  const Lens lens = build_threshold_lens(*fact, {});
  const LensLayout layout(fact, lens);
  CHECK(layout.valid());
  CHECK(supports(layout).size() == 1);
  CHECK(link_pairs(layout).empty());
}

TEST_CASE("three nested regions give a chain of links") {
  const auto fact = std::make_shared<const Factorization>(factorize(load_series(std::vector<double>{0, 10, 0})));
  const std::vector<ThresholdCut> cuts{{7, Direction::up, Seed{Seed::Kind::domain_vertex, 1, 0}},
                                       {3, Direction::up, Seed{Seed::Kind::domain_vertex, 1, 0}}};
  const Lens lens = build_threshold_lens(*fact, cuts);
  const LensLayout layout(fact, lens);
  REQUIRE(layout.valid());
  CHECK(layout.boundary_level(1) == 3.0);  // larger region first
  CHECK(layout.boundary_level(2) == 7.0);
  const auto links = link_pairs(layout);
  REQUIRE(links.size() == 2);
  CHECK(links[0].predecessor == 0);
  CHECK(links[1].predecessor == 1);
}

TEST_CASE("validation reports each kind of violation") {
  const auto fact = worked();
  const Region whole = whole_component(fact->middle, 0);
  const Region up = threshold_region(*fact, peak_cut());
  Region other;
  other.fragments = {{0, 0.5, 2}, {2, 1.5, 2}};
  other.boundary_level = 0.5;

  SUBCASE("overlap without nesting") {
    Lens lens{{whole, up, other}, {}};
    const auto r = validate_lens(fact, lens);
    CHECK_FALSE(r.find("nested")->passed);
    CHECK_FALSE(r.find("constant_boundary")->passed);
  }
  SUBCASE("duplicate region") {
    Lens lens{{whole, up, up}, {}};
    CHECK_FALSE(validate_lens(fact, lens).find("distinct")->passed);
  }
  SUBCASE("missing root") {
    Lens lens{{up}, {}};
    const auto r = validate_lens(fact, lens);
    CHECK_FALSE(r.find("roots")->passed);
    CHECK_FALSE(r.find("cover")->passed);
  }
  SUBCASE("root not first") {
    Lens lens{{up, whole}, {}};
    CHECK_FALSE(validate_lens(fact, lens).find("roots")->passed);
  }
  SUBCASE("disconnected region") {
    Region split;
    split.fragments = {{0, 1.5, 2}, {1, 2.5, 3}};
    split.boundary_level = 1.5;
    Lens lens{{whole, split}, {}};
    CHECK_FALSE(validate_lens(fact, lens).find("connected")->passed);
  }
  SUBCASE("region outside the middle space") {
    Region bad;
    bad.fragments = {{9, 0, 1}};
    Lens lens{{whole, bad}, {}};
    CHECK_FALSE(validate_lens(fact, lens).find("fragments_fit")->passed);
  }
  SUBCASE("supports needs a valid lens") {
    Lens lens{{whole, up, up}, {}};
    CHECK_THROWS_AS(supports(LensLayout(fact, lens)), LensError);
  }
}

TEST_CASE("non-nested cuts are refused") {
  const auto fact = std::make_shared<const Factorization>(factorize(load_series(std::vector<double>{0, 4, 0})));
  const std::vector<ThresholdCut> cuts{{1, Direction::up, Seed{Seed::Kind::domain_vertex, 1, 0}},
                                       {3, Direction::down, Seed{Seed::Kind::domain_vertex, 0, 0}}};
  CHECK_THROWS_AS(build_threshold_lens(*fact, cuts), LensError);
}

TEST_CASE("branch lens on the worked chain") {
  const auto fact = worked();
  const Lens lens = build_branch_lens(*fact);
  const LensLayout layout(fact, lens);
  REQUIRE(layout.valid());
  REQUIRE(lens.size() == 3);
  // Brute force over saddle levels: the right minimum's branch [0, 3] on
  // edge 1 (persistence 3), the peak at 2 above 1 (persistence 1), and the
  // pit at 1 below 2, which overlaps the peak branch and is dropped.
  CHECK(ttv_restricted(fact->middle, lens.regions[1]) == 3.0);
  CHECK(ttv_restricted(fact->middle, lens.regions[2]) == 2.0);
  CHECK(lens.regions[2].fragments == std::vector<Fragment>{{0, 1, 2}, {2, 1, 2}});
}

TEST_CASE("branch lens extremes") {
  const auto mono = std::make_shared<const Factorization>(factorize(load_series(std::vector<double>{0, 1, 2, 5})));
  CHECK(build_branch_lens(*mono).size() == 1);
  const auto fact = worked();
  CHECK(build_branch_lens(*fact, std::numeric_limits<double>::infinity()).size() == 1);
}

TEST_CASE("branch lenses validate on random fields") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 40; ++k) {
    const auto fact = std::make_shared<const Factorization>(factorize(random_field(rng, 80)));
    const Lens lens = build_branch_lens(*fact);
    const LensLayout layout(fact, lens);
    CAPTURE(k);
    CHECK(layout.valid());
  }
}

TEST_CASE("lens documents round trip") {
  const auto fact = worked();
  const std::vector<ThresholdCut> cuts{peak_cut()};
  const Lens lens = build_threshold_lens(*fact, cuts);
  const auto doc = lens_to_json(lens);
  const auto specs = lens_specs_from_json(doc);
  const Lens again = realize_lens(*fact, specs);
  CHECK(lens_to_json(again) == doc);
  CHECK(again.regions[1].fragments == lens.regions[1].fragments);

  const auto branch = build_branch_lens(*fact);
  const auto bdoc = lens_to_json(branch);
  CHECK(lens_to_json(realize_lens(*fact, lens_specs_from_json(bdoc))) == bdoc);
}

TEST_CASE("lens documents without roots are completed and ordered") {
  const auto fact = worked();
  const auto doc = nlohmann::json::parse(R"({"regions":[
      {"kind":"threshold","level":1,"direction":"up","seed":{"middle_edge":3,"value":2}}]})");
  const Lens lens = realize_lens(*fact, lens_specs_from_json(doc));
  REQUIRE(lens.size() == 2);
  CHECK(lens.specs[0].kind == RegionSpec::Kind::root);
  CHECK(LensLayout(fact, lens).valid());
}

TEST_CASE("malformed lens documents raise parse errors") {
  CHECK_THROWS_AS(lens_specs_from_json(nlohmann::json::parse(R"({"regions":[{"kind":"blob"}]})")), ParseError);
  CHECK_THROWS_AS(lens_specs_from_json(nlohmann::json::parse(R"({"regions":[{"kind":"threshold"}]})")), ParseError);
  CHECK_THROWS_AS(lens_specs_from_json(nlohmann::json::parse(R"({"format":"x","regions":[]})")), ParseError);
}

TEST_CASE("random threshold lenses are valid") {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 40; ++k) {
    const auto fact = std::make_shared<const Factorization>(factorize(random_field(rng, 80)));
    const Lens lens = random_threshold_lens(rng, *fact, 5);
    const LensLayout layout(fact, lens);
    CAPTURE(k);
    REQUIRE(layout.valid());
    std::vector<Region> tiles;
    for (const Support& s : supports(layout)) tiles.push_back(s.region);
    CHECK(check_decomposition(fact->middle, tiles).ok());
    CHECK(link_pairs(layout).size() == lens.size() - layout.root_count());
  }
}
