#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "docstruct/eval.hpp"

#include "oracles.hpp"

using namespace docstruct;

namespace {

Region text_region(Id id, std::vector<Id> lines, LogicalRole role = LogicalRole::Paragraph) {
  Region r;
  r.id = id;
  r.role = role;
  r.lines = std::move(lines);
  r.bbox = {0, static_cast<double>(id) * 30, 100, static_cast<double>(id) * 30 + 13};
  return r;
}

Region graphic_region(Id id, BBox bbox) {
  Region r;
  r.id = id;
  r.role = LogicalRole::Figure;
  r.graphic = id;
  r.bbox = bbox;
  return r;
}

TokenSequence random_tokens(std::mt19937_64& rng, std::size_t max_len) {
  TokenSequence seq;
  const std::size_t len = rng() % (max_len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    if (rng() % 4 == 0) {
      seq.push_back(paragraph_tag());
    } else {
      seq.push_back(line_token(static_cast<Id>(rng() % 5)));
    }
  }
  return seq;
}

HierarchyNode hnode(Id id, LogicalRole role, std::string text,
                    std::vector<HierarchyNode> children = {}) {
  HierarchyNode n;
  n.id = id;
  n.role = role;
  n.text = std::move(text);
  n.children = std::move(children);
  return n;
}

}  // namespace

TEST_CASE("tokenize_group: text groups append a tag per region") {
  const std::vector<Region> regions = {text_region(0, {10, 11}), text_region(1, {12})};
  const ReadingOrderGroup group{GroupCategory::TextRegion, {0, 1}};
  const TokenSequence tokens = tokenize_group(group, regions);
  const TokenSequence expected = {line_token(10), line_token(11), paragraph_tag(),
                                  line_token(12), paragraph_tag()};
  CHECK(tokens == expected);
}

TEST_CASE("tokenize_group: graphical groups emit object ids then member lines, untagged") {
  const std::vector<Region> regions = {graphic_region(5, {0, 0, 100, 100}),
                                       text_region(6, {20, 21}, LogicalRole::Caption)};
  const ReadingOrderGroup group{GroupCategory::GraphicalRegion, {5, 6}};
  const TokenSequence tokens = tokenize_group(group, regions);
  const TokenSequence expected = {object_token(5), line_token(20), line_token(21)};
  CHECK(tokens == expected);
}

TEST_CASE("tokenize_group rejects empty groups and dangling members") {
  CHECK_THROWS_AS(tokenize_group({GroupCategory::TextRegion, {}}, {}), validation_error);
  CHECK_THROWS_AS(tokenize_group({GroupCategory::TextRegion, {9}}, {}), validation_error);
}

TEST_CASE("levenshtein basics") {
  const TokenSequence a = {line_token(1), line_token(2), paragraph_tag(), line_token(3),
                           paragraph_tag()};
  const TokenSequence b = {line_token(1), line_token(2), line_token(3), paragraph_tag()};
  CHECK(levenshtein(a, a) == 0);
  CHECK(levenshtein(a, b) == 1);
  CHECK(levenshtein(a, TokenSequence{}) == 5);
}

TEST_CASE("levenshtein matches the naive recursive oracle") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 500; ++trial) {
    const TokenSequence a = random_tokens(rng, 8);
    const TokenSequence b = random_tokens(rng, 8);
    CHECK(levenshtein(a, b) == oracles::naive_levenshtein(a, b));
  }
}

TEST_CASE("levenshtein is a metric") {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 500; ++trial) {
    const TokenSequence a = random_tokens(rng, 10);
    const TokenSequence b = random_tokens(rng, 10);
    const TokenSequence c = random_tokens(rng, 10);
    const auto ab = levenshtein(a, b);
    CHECK(ab >= 0);
    CHECK(levenshtein(a, a) == 0);
    CHECK(ab == levenshtein(b, a));
    CHECK(ab <= levenshtein(a, c) + levenshtein(c, b));
    if (ab == 0) CHECK(a == b);
  }
}

TEST_CASE("hungarian worked examples") {
  const Assignment a = hungarian({{1, 2}, {3, 0}});
  CHECK(a.total == 1.0);
  CHECK(a.col_of_row == std::vector<int>{0, 1});

  const Assignment diag = hungarian({{0, 5, 5}, {5, 0, 5}, {5, 5, 0}});
  CHECK(diag.total == 0.0);
  CHECK(diag.col_of_row == std::vector<int>{0, 1, 2});

  const Assignment row = hungarian({{5, 2, 7}});
  CHECK(row.total == 2.0);
  CHECK(row.col_of_row == std::vector<int>{1});
}

TEST_CASE("hungarian matches the exhaustive oracle") {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t p = 1 + rng() % 7;
    const std::size_t g = 1 + rng() % 7;
    std::vector<std::vector<double>> cost(p, std::vector<double>(g));
    for (auto& row : cost) {
      for (auto& v : row) v = static_cast<double>(rng() % 1000);
    }
    const Assignment got = hungarian(cost);
    CHECK(got.total == oracles::brute_force_assignment(cost));
  }
}

TEST_CASE("hungarian rejects bad inputs") {
  CHECK_THROWS_AS(hungarian({{1.0, -2.0}}), validation_error);
  CHECK_THROWS_AS(hungarian({{1.0}, {2.0, 3.0}}), validation_error);
}

TEST_CASE("reds: identity scores 1.0") {
  const std::vector<Region> regions = {text_region(0, {10, 11}), text_region(1, {12})};
  const std::vector<ReadingOrderGroup> groups = {{GroupCategory::TextRegion, {0, 1}}};
  const RedsResult result = reds(regions, groups, regions, groups);
  CHECK(result.text.score == 1.0);
  CHECK(result.text.D == 0);
  CHECK(result.text.N == 5);
  CHECK(result.graphical.score == 1.0);
}

TEST_CASE("reds: worked example scores 0.8") {
  // Ground truth: [a, b, </p>, c, </p>]; prediction: [a, b, c, </p>].
  const std::vector<Region> gt_regions = {text_region(0, {10, 11}), text_region(1, {12})};
  const std::vector<ReadingOrderGroup> gt_groups = {{GroupCategory::TextRegion, {0, 1}}};
  const std::vector<Region> pred_regions = {text_region(0, {10, 11, 12})};
  const std::vector<ReadingOrderGroup> pred_groups = {{GroupCategory::TextRegion, {0}}};
  const RedsResult result = reds(pred_regions, pred_groups, gt_regions, gt_groups);
  CHECK(result.text.D == 1);
  CHECK(result.text.N == 5);
  CHECK(result.text.score == Catch::Approx(0.8).margin(1e-9));
}

TEST_CASE("reds: empty prediction scores 0.0") {
  const std::vector<Region> gt_regions = {text_region(0, {10, 11}), text_region(1, {12})};
  const std::vector<ReadingOrderGroup> gt_groups = {{GroupCategory::TextRegion, {0, 1}}};
  const RedsResult result = reds({}, {}, gt_regions, gt_groups);
  CHECK(result.text.score == 0.0);
  CHECK(result.text.D == 5);
}

TEST_CASE("reds: graphical category compares object tokens via IoU matching") {
  const std::vector<Region> gt_regions = {graphic_region(5, {0, 0, 100, 100})};
  const std::vector<ReadingOrderGroup> gt_groups = {{GroupCategory::GraphicalRegion, {5}}};
  // Same box, different id: matched by IoU, token renamed, distance 0.
  const std::vector<Region> pred_close = {graphic_region(9, {1, 1, 100, 100})};
  const std::vector<ReadingOrderGroup> pred_groups = {{GroupCategory::GraphicalRegion, {9}}};
  const RedsResult close = reds(pred_close, pred_groups, gt_regions, gt_groups);
  CHECK(close.graphical.score == 1.0);

  // Disjoint box: unmatched, token can never equal the ground truth one.
  const std::vector<Region> pred_far = {graphic_region(9, {500, 500, 600, 600})};
  const RedsResult far = reds(pred_far, pred_groups, gt_regions, gt_groups);
  CHECK(far.graphical.score == 0.0);
  CHECK(far.graphical.D == 1);  // one substitution
}

TEST_CASE("reds(x, x) is 1.0 for synthetic groupings") {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Region> regions;
    std::vector<ReadingOrderGroup> groups;
    Id next_line = 100;
    const int k = 1 + static_cast<int>(rng() % 4);
    ReadingOrderGroup text{GroupCategory::TextRegion, {}};
    for (int i = 0; i < k; ++i) {
      std::vector<Id> lines;
      const int len = 1 + static_cast<int>(rng() % 4);
      for (int l = 0; l < len; ++l) lines.push_back(next_line++);
      regions.push_back(text_region(static_cast<Id>(i), lines));
      text.members.push_back(static_cast<Id>(i));
    }
    groups.push_back(text);
    const RedsResult result = reds(regions, groups, regions, groups);
    CHECK(result.text.score == 1.0);
  }
}

TEST_CASE("tree_edit_distance: identical trees cost nothing") {
  const auto t = hnode(kRootId, LogicalRole::Other, "",
                       {hnode(1, LogicalRole::Section, "1 Alpha",
                              {hnode(2, LogicalRole::Paragraph, "body")}),
                        hnode(3, LogicalRole::Section, "2 Beta")});
  CHECK(tree_edit_distance(t, t, steds_node_cost) == 0.0);
}

TEST_CASE("tree_edit_distance: single nodes with different labels") {
  const auto a = hnode(1, LogicalRole::Section, "left");
  const auto b = hnode(2, LogicalRole::Paragraph, "right");
  CHECK(tree_edit_distance(a, b, steds_node_cost) == 1.0);
}

TEST_CASE("tree_edit_distance is symmetric under unit costs") {
  std::mt19937_64 rng(65);
  auto unit_cost = [](const TocNode& a, const TocNode& b) { return a.id == b.id ? 0.0 : 1.0; };
  const auto shapes = oracles::enumerate_ordered_trees(4);
  for (int trial = 0; trial < 100; ++trial) {
    const TocNode& a = shapes[rng() % shapes.size()];
    const TocNode& b = shapes[rng() % shapes.size()];
    CHECK(tree_edit_distance(a, b, unit_cost) == tree_edit_distance(b, a, unit_cost));
  }
}

TEST_CASE("tree_edit_distance matches the exhaustive mapping oracle") {
  // All ordered tree shape pairs with up to 4 nodes (plus root), labels from
  // the pre-order ids modulo a small alphabet.
  auto cost = [](const TocNode& a, const TocNode& b) {
    return (a.id % 3) == (b.id % 3) ? 0.0 : 1.0;
  };
  std::vector<TocNode> shapes;
  for (int n = 0; n <= 3; ++n) {
    for (const auto& t : oracles::enumerate_ordered_trees(n)) shapes.push_back(t);
  }
  for (const auto& a : shapes) {
    for (const auto& b : shapes) {
      const double fast = tree_edit_distance(a, b, cost);
      const double slow = oracles::exhaustive_tree_edit_distance(a, b, cost);
      CHECK(fast == Catch::Approx(slow).margin(1e-9));
    }
  }
}

TEST_CASE("steds basics") {
  const auto gt = hnode(kRootId, LogicalRole::Other, "",
                        {hnode(1, LogicalRole::Section, "1 Alpha",
                               {hnode(2, LogicalRole::Paragraph, "lorem ipsum")})});
  CHECK(steds(gt, gt) == 1.0);

  const auto single_a = hnode(1, LogicalRole::Section, "abc");
  const auto single_b = hnode(2, LogicalRole::Section, "xyz");
  CHECK(steds(single_a, single_b) == 0.0);  // disjoint text, same role

  const auto role_clash = hnode(1, LogicalRole::Paragraph, "abc");
  CHECK(steds(single_a, role_clash) == 0.0);
}

TEST_CASE("steds partial text credit") {
  const auto a = hnode(1, LogicalRole::Section, "alpha beta");
  const auto b = hnode(1, LogicalRole::Section, "alpha betq");
  // One substituted character out of ten.
  CHECK(steds(a, b) == Catch::Approx(0.9).margin(1e-9));
}

TEST_CASE("steds stays within [0, 1] and aggregates") {
  StedsReport report;
  report.add(1.0, 10);
  report.add(0.5, 30);
  report.finalize();
  CHECK(report.micro == Catch::Approx((1.0 * 10 + 0.5 * 30) / 40.0));
  CHECK(report.macro == Catch::Approx(0.75));
}

TEST_CASE("toc_with_payloads pulls role and text from the structure tree") {
  const auto hierarchy = hnode(kRootId, LogicalRole::Other, "",
                               {hnode(1, LogicalRole::Section, "1 Alpha",
                                      {hnode(2, LogicalRole::Paragraph, "body"),
                                       hnode(3, LogicalRole::Section, "1.1 Beta")})});
  TocNode toc;
  toc.children.push_back({1, {}});
  toc.children[0].children.push_back({3, {}});
  const HierarchyNode t = toc_with_payloads(toc, hierarchy);
  REQUIRE(t.children.size() == 1);
  CHECK(t.children[0].text == "1 Alpha");
  REQUIRE(t.children[0].children.size() == 1);
  CHECK(t.children[0].children[0].text == "1.1 Beta");

  TocNode dangling;
  dangling.children.push_back({99, {}});
  CHECK_THROWS_AS(toc_with_payloads(dangling, hierarchy), validation_error);
}

TEST_CASE("normalized_text_similarity") {
  CHECK(normalized_text_similarity("", "") == 1.0);
  CHECK(normalized_text_similarity("abc", "abc") == 1.0);
  CHECK(normalized_text_similarity("abc", "") == 0.0);
  CHECK(normalized_text_similarity("abcd", "abcx") == Catch::Approx(0.75));
}
