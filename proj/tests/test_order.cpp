#include <catch2/catch_amalgamated.hpp>

#include "docstruct/order.hpp"
#include "docstruct/pipeline.hpp"
#include "docstruct/synth.hpp"

using namespace docstruct;

namespace {

Region text_region(Id id, std::vector<Id> lines, BBox bbox,
                   LogicalRole role = LogicalRole::Paragraph) {
  Region r;
  r.id = id;
  r.role = role;
  r.lines = std::move(lines);
  r.bbox = bbox;
  return r;
}

Region graphic_region(Id id, BBox bbox, LogicalRole role = LogicalRole::Figure) {
  Region r;
  r.id = id;
  r.role = role;
  r.graphic = id;
  r.bbox = bbox;
  return r;
}

RelationTypeDistribution uniform_none(const std::vector<Region>& regions) {
  RelationTypeDistribution d;
  for (const auto& r : regions) d.ids.push_back(r.id);
  d.probs.assign(regions.size() * regions.size(), {0.0, 0.0, 1.0});
  return d;
}

}  // namespace

TEST_CASE("classify_links labels argmax classes and drops none") {
  ChainDecodeResult decoded{{{0, 1, RelationKind::Succ, 0.9, {}},
                             {1, 2, RelationKind::Succ, 0.8, {}},
                             {2, 0, RelationKind::Succ, 0.7, {}},
                             {3, 3, RelationKind::Succ, 1.0, {}}}};
  RelationTypeDistribution dist;
  dist.ids = {0, 1, 2, 3};
  dist.probs.assign(16, {0.0, 0.0, 1.0});
  dist.probs[0 * 4 + 1] = {0.7, 0.2, 0.1};  // text-region-order
  dist.probs[1 * 4 + 2] = {0.1, 0.8, 0.1};  // graphical-region-link
  dist.probs[2 * 4 + 0] = {0.2, 0.2, 0.6};  // none: dropped
  const auto labeled = classify_links(decoded, dist);
  REQUIRE(labeled.size() == 2);
  CHECK(labeled[0].label == std::string("text-region-order"));
  CHECK(labeled[1].label == std::string("graphical-region-link"));
}

TEST_CASE("classify_links reports missing pair distributions") {
  ChainDecodeResult decoded{{{0, 9, RelationKind::Succ, 0.9, {}}}};
  RelationTypeDistribution dist;
  dist.ids = {0};
  dist.probs.assign(1, {1.0, 0.0, 0.0});
  CHECK_THROWS_AS(classify_links(decoded, dist), validation_error);
}

TEST_CASE("build_groups: a chain becomes one text group") {
  const std::vector<Region> regions = {
      text_region(0, {100}, {60, 60, 260, 90}),
      text_region(1, {110}, {60, 100, 260, 130}),
      text_region(2, {120}, {60, 140, 260, 170}),
  };
  const std::vector<RelationEdge> labeled = {
      {0, 1, RelationKind::RelationType, 0.9, std::string("text-region-order")},
      {1, 2, RelationKind::RelationType, 0.8, std::string("text-region-order")},
  };
  const OrderResult result = build_groups(labeled, regions);
  REQUIRE(result.groups.size() == 1);
  CHECK(result.groups[0].category == GroupCategory::TextRegion);
  CHECK(result.groups[0].members == std::vector<Id>{0, 1, 2});
}

TEST_CASE("build_groups: figure with caption forms a graphical group") {
  const std::vector<Region> regions = {
      graphic_region(5, {300, 60, 500, 260}),
      text_region(6, {130}, {300, 270, 480, 300}, LogicalRole::Caption),
  };
  const std::vector<RelationEdge> labeled = {
      {6, 5, RelationKind::RelationType, 0.95, std::string("graphical-region-link")},
  };
  const OrderResult result = build_groups(labeled, regions);
  REQUIRE(result.groups.size() == 1);
  CHECK(result.groups[0].category == GroupCategory::GraphicalRegion);
  CHECK(result.groups[0].members == std::vector<Id>{5, 6});
}

TEST_CASE("build_groups: two disjoint chains give two text groups") {
  const std::vector<Region> regions = {
      text_region(0, {100}, {60, 60, 260, 90}),
      text_region(1, {110}, {60, 100, 260, 130}),
      text_region(2, {120}, {400, 60, 600, 90}),
      text_region(3, {130}, {400, 100, 600, 130}),
  };
  const std::vector<RelationEdge> labeled = {
      {0, 1, RelationKind::RelationType, 0.9, std::string("text-region-order")},
      {2, 3, RelationKind::RelationType, 0.8, std::string("text-region-order")},
  };
  const OrderResult result = build_groups(labeled, regions);
  REQUIRE(result.groups.size() == 2);
  CHECK(result.groups[0].members == std::vector<Id>{0, 1});
  CHECK(result.groups[1].members == std::vector<Id>{2, 3});
}

TEST_CASE("build_groups: cycles are cut at the weakest edge") {
  const std::vector<Region> regions = {
      text_region(0, {100}, {60, 60, 260, 90}),
      text_region(1, {110}, {60, 100, 260, 130}),
      text_region(2, {120}, {60, 140, 260, 170}),
  };
  const std::vector<RelationEdge> labeled = {
      {0, 1, RelationKind::RelationType, 0.9, std::string("text-region-order")},
      {1, 2, RelationKind::RelationType, 0.8, std::string("text-region-order")},
      {2, 0, RelationKind::RelationType, 0.3, std::string("text-region-order")},
  };
  const OrderResult result = build_groups(labeled, regions);
  REQUIRE(result.groups.size() == 1);
  CHECK(result.groups[0].members == std::vector<Id>{0, 1, 2});
}

TEST_CASE("build_groups: isolated regions become singleton groups of their category") {
  const std::vector<Region> regions = {
      text_region(0, {100}, {60, 60, 260, 90}),
      graphic_region(1, {300, 60, 500, 260}, LogicalRole::Equation),
  };
  const OrderResult result = build_groups({}, regions);
  REQUIRE(result.groups.size() == 2);
  CHECK(result.groups[0].category == GroupCategory::GraphicalRegion);
  CHECK(result.groups[0].members == std::vector<Id>{1});
  CHECK(result.groups[1].category == GroupCategory::TextRegion);
  CHECK(result.groups[1].members == std::vector<Id>{0});
}

TEST_CASE("reading_sequence: single chain keeps chain order") {
  Document doc;
  doc.pages = {{0, 850, 1100}};
  doc.lines = {{100, 0, {60, 60, 260, 73}, "a"},
               {110, 0, {60, 100, 260, 113}, "b"},
               {120, 0, {60, 140, 260, 153}, "c"}};
  const std::vector<Region> regions = {
      text_region(0, {100}, {60, 60, 260, 73}),
      text_region(1, {110}, {60, 100, 260, 113}),
      text_region(2, {120}, {60, 140, 260, 153}),
  };
  OrderResult order;
  order.groups = {{GroupCategory::TextRegion, {0, 1, 2}}};
  CHECK(reading_sequence(order, regions, doc) == std::vector<Id>{0, 1, 2});
}

TEST_CASE("reading_sequence: graphical groups splice after the preceding text region") {
  Document doc;
  doc.pages = {{0, 850, 1100}};
  doc.lines = {{100, 0, {60, 60, 260, 73}, "a"},
               {110, 0, {60, 400, 260, 413}, "b"},
               {130, 0, {60, 210, 230, 223}, "caption"}};
  doc.graphics = {{50, 0, {60, 90, 260, 200}, GraphicClass::Figure}};
  const std::vector<Region> regions = {
      text_region(100, {100}, {60, 60, 260, 73}),
      text_region(110, {110}, {60, 400, 260, 413}),
      graphic_region(50, {60, 90, 260, 200}),
      text_region(130, {130}, {60, 210, 230, 223}, LogicalRole::Caption),
  };
  OrderResult order;
  order.groups = {{GroupCategory::TextRegion, {100, 110}},
                  {GroupCategory::GraphicalRegion, {50, 130}}};
  // The figure (y=90) follows the first text region (y=60).
  CHECK(reading_sequence(order, regions, doc) == std::vector<Id>{100, 50, 130, 110});
}

TEST_CASE("reading_sequence: empty input gives an empty sequence") {
  Document doc;
  doc.pages = {{0, 850, 1100}};
  CHECK(reading_sequence({}, {}, doc).empty());
}

TEST_CASE("reading_sequence is a permutation of all regions on synthetic documents") {
  for (std::uint64_t seed : {2ull, 33ull, 404ull}) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.pages = 3;
    cfg.columns = 2;
    cfg.toc_depth = 3;
    cfg.figure_probability = 0.5;
    const Document doc = generate(cfg);
    const GroundTruth& gt = *doc.ground_truth;
    OrderResult order{gt.groups, {}};
    std::vector<Id> seq = reading_sequence(order, gt.regions, doc);
    std::vector<Id> expected;
    for (const auto& r : gt.regions) expected.push_back(r.id);
    std::sort(seq.begin(), seq.end());
    std::sort(expected.begin(), expected.end());
    CHECK(seq == expected);
  }
}

TEST_CASE("oracle scorer drives the order stage to ground truth") {
  SynthConfig cfg;
  cfg.seed = 1234;
  cfg.pages = 3;
  cfg.columns = 2;
  cfg.toc_depth = 3;
  cfg.figure_probability = 0.6;
  const Document doc = generate(cfg);
  const GroundTruth& gt = *doc.ground_truth;
  const OracleScorer scorer(gt);
  const OrderResult result = run_order(doc, gt.regions, scorer);

  auto sorted_groups = [](std::vector<ReadingOrderGroup> groups) {
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
      if (a.category != b.category) return a.category < b.category;
      return a.members < b.members;
    });
    return groups;
  };
  CHECK(sorted_groups(result.groups) == sorted_groups(gt.groups));
}

TEST_CASE("relation distribution sanity: uniform none yields singletons") {
  const std::vector<Region> regions = {
      text_region(0, {100}, {60, 60, 260, 90}),
      text_region(1, {110}, {60, 100, 260, 130}),
  };
  ChainDecodeResult decoded{{{0, 1, RelationKind::Succ, 0.9, {}},
                             {1, 1, RelationKind::Succ, 0.6, {}}}};
  const auto labeled = classify_links(decoded, uniform_none(regions));
  CHECK(labeled.empty());
  const OrderResult result = build_groups(labeled, regions);
  CHECK(result.groups.size() == 2);
}
