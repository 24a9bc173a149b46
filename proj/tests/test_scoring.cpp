#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "docstruct/detect.hpp"
#include "docstruct/scoring.hpp"

using namespace docstruct;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("row_softmax of a symmetric row splits the mass") {
  const auto rows = row_softmax({{0.0, 0.0}});
  CHECK(rows[0][0] == Catch::Approx(0.5).margin(1e-12));
  CHECK(rows[0][1] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("row_softmax closed form") {
  const auto rows = row_softmax({{std::log(1.0), std::log(3.0)}});
  CHECK(rows[0][0] == Catch::Approx(0.25).margin(1e-12));
  CHECK(rows[0][1] == Catch::Approx(0.75).margin(1e-12));
}

TEST_CASE("row_softmax rows sum to one and handle extreme logits") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> logit(-800.0, 800.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<std::vector<double>> raw(n, std::vector<double>(n));
    for (auto& row : raw) {
      for (auto& v : row) v = logit(rng);
    }
    const auto rows = row_softmax(raw);
    for (const auto& row : rows) {
      double sum = 0.0;
      for (double v : row) {
        CHECK(std::isfinite(v));
        sum += v;
      }
      CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    }
  }
}

TEST_CASE("row_softmax honors the mask and rejects fully masked rows") {
  Mask mask{{true, false}, {true, true}};
  const auto rows = row_softmax({{5.0, 100.0}, {0.0, 0.0}}, &mask);
  CHECK(rows[0][0] == 1.0);
  CHECK(rows[0][1] == 0.0);

  Mask dead{{false, false}, {true, true}};
  CHECK_THROWS_WITH(row_softmax({{1.0, 2.0}, {3.0, 4.0}}, &dead),
                    Catch::Matchers::ContainsSubstring("row 0"));
}

TEST_CASE("heuristic_succ_scores: single element keeps all mass on itself") {
  const ScoreMatrix m = heuristic_succ_scores({{5, {0, 0, 100, 13}, 0}});
  REQUIRE(m.size() == 1);
  CHECK(m.rows[0][0] == 1.0);
}

TEST_CASE("heuristic_succ_scores: stacked lines chain downward") {
  const std::vector<PlacedElement> elems = {
      {0, {60, 60, 260, 73}, 0},
      {1, {60, 77, 255, 90}, 0},
  };
  const ScoreMatrix m = heuristic_succ_scores(elems);
  const ChainDecodeResult decoded = decode_succ(m);
  CHECK(decoded.edges[0].to == 1);
  CHECK(decoded.edges[1].to == 1);  // chain end: self
}

TEST_CASE("heuristic_succ_scores: two columns decode left column before right") {
  // Two side-by-side columns of two lines each, all full width.
  const std::vector<PlacedElement> elems = {
      {0, {60, 60, 260, 73}, 0},
      {1, {60, 77, 260, 90}, 0},
      {2, {300, 60, 500, 73}, 0},
      {3, {300, 77, 500, 90}, 0},
  };
  const ChainDecodeResult decoded = decode_succ(heuristic_succ_scores(elems));
  CHECK(decoded.edges[0].to == 1);
  CHECK(decoded.edges[1].to == 2);  // crosses to the right column's top
  CHECK(decoded.edges[2].to == 3);
  CHECK(decoded.edges[3].to == 3);
}

TEST_CASE("heuristic_succ_scores: large vertical gaps break the chain") {
  const std::vector<PlacedElement> elems = {
      {0, {60, 60, 260, 73}, 0},
      {1, {60, 100, 260, 113}, 0},  // gap of 27 > 0.55 * 13
  };
  const ChainDecodeResult decoded = decode_succ(heuristic_succ_scores(elems));
  CHECK(decoded.edges[0].to == 0);
  CHECK(decoded.edges[1].to == 1);
}

TEST_CASE("heuristic_succ_scores: narrow endpoints stop column crossings") {
  // Left column ends with a short line, right column starts full width.
  const std::vector<PlacedElement> elems = {
      {0, {60, 60, 260, 73}, 0},
      {1, {60, 77, 140, 90}, 0},  // short closing line
      {2, {300, 60, 500, 73}, 0},
      {3, {300, 77, 500, 90}, 0},
  };
  const ChainDecodeResult decoded = decode_succ(heuristic_succ_scores(elems));
  CHECK(decoded.edges[1].to == 1);  // no crossing
}

TEST_CASE("heuristic_succ_scores is deterministic") {
  std::vector<PlacedElement> elems;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 40; ++i) {
    const double x = 60 + (i % 2) * 300;
    const double y = 60 + (i / 2) * 17.0 + (rng() % 5);
    elems.push_back({i, {x, y, x + 200, y + 13}, 0});
  }
  const ScoreMatrix a = heuristic_succ_scores(elems);
  const ScoreMatrix b = heuristic_succ_scores(elems);
  CHECK(a.rows == b.rows);
  CHECK(a.ids == b.ids);
}

TEST_CASE("heuristic_pred_scores mirrors the successor chain on clean layouts") {
  const std::vector<PlacedElement> elems = {
      {0, {60, 60, 260, 73}, 0},
      {1, {60, 77, 260, 90}, 0},
      {2, {60, 94, 260, 107}, 0},
  };
  const ChainDecodeResult pred = decode_succ(heuristic_pred_scores(elems));
  CHECK(pred.edges[0].to == 0);  // first line has no predecessor
  CHECK(pred.edges[1].to == 0);
  CHECK(pred.edges[2].to == 1);
}

TEST_CASE("numbering_depth parses section numbers") {
  CHECK(numbering_depth("1 Introduction") == 1);
  CHECK(numbering_depth("2.1.3 Deep Dive") == 3);
  CHECK(numbering_depth("10.2 Methods") == 2);
  CHECK(numbering_depth("Appendix") == 1);
  CHECK(numbering_depth("  3.4 Indented") == 2);
}

TEST_CASE("heuristic_toc_scores: numbered outline") {
  const std::vector<HeadingCue> headings = {
      {10, "1 Alpha", numbering_depth("1 Alpha")},
      {11, "1.1 Beta", numbering_depth("1.1 Beta")},
      {12, "2 Gamma", numbering_depth("2 Gamma")},
  };
  const TocScorePair scores = heuristic_toc_scores(headings);
  CHECK(scores.parent.at(11, 10) == 1.0);       // parent("1.1") = "1"
  CHECK(scores.parent.at(12, kRootId) == 1.0);  // parent("2") = ROOT
  CHECK(scores.sibling.at(12, 10) == 1.0);      // sibling("2") = "1"
  CHECK(scores.sibling.at(11, 11) == 1.0);      // no left sibling: self
}

TEST_CASE("heuristic_toc_scores: single heading and unnumbered fallback") {
  const TocScorePair single = heuristic_toc_scores({{5, "Overview", numbering_depth("Overview")}});
  CHECK(single.parent.at(5, kRootId) == 1.0);
  CHECK(single.sibling.at(5, 5) == 1.0);

  const std::vector<HeadingCue> unnumbered = {
      {1, "Alpha", numbering_depth("Alpha")},
      {2, "Beta", numbering_depth("Beta")},
  };
  const TocScorePair scores = heuristic_toc_scores(unnumbered);
  CHECK(scores.parent.at(2, kRootId) == 1.0);
  CHECK(scores.sibling.at(2, 1) == 1.0);  // equal depth, same parent
}

TEST_CASE("score files: round trip is exact") {
  std::mt19937_64 rng(17);
  ScoreMatrix m;
  m.kind = "inter-succ";
  m.ids = {3, 1, 4, 15, 9};
  std::vector<std::vector<double>> raw(5, std::vector<double>(5));
  for (auto& row : raw) {
    for (auto& v : row) v = std::uniform_real_distribution<double>(-2, 2)(rng);
  }
  m.rows = row_softmax(raw);
  const std::string path = temp_path("docstruct_scores_roundtrip.json");
  store_scores(m, path);
  const ScoreMatrix loaded = load_scores(path);
  CHECK(loaded.kind == m.kind);
  CHECK(loaded.ids == m.ids);
  REQUIRE(loaded.rows.size() == m.rows.size());
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    for (std::size_t j = 0; j < m.rows.size(); ++j) {
      CHECK(loaded.rows[i][j] == Catch::Approx(m.rows[i][j]).margin(1e-9));
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("score files: shape mismatch and non-finite entries are rejected") {
  const std::string path = temp_path("docstruct_scores_bad.json");
  {
    std::ofstream out(path);
    out << R"({"kind":"intra-succ","ids":[1,2,3],"rows":[[0.5,0.5,0,0],[1,0,0],[0,0,1]]})";
  }
  CHECK_THROWS_WITH(load_scores(path), Catch::Matchers::ContainsSubstring("row 0"));
  {
    std::ofstream out(path);
    out << R"({"kind":"intra-succ","ids":[1,2],"rows":[[0.5,0.5],[null,1]]})";
  }
  CHECK_THROWS_AS(load_scores(path), io_error);
  {
    // NaN spelled as a JSON-breaking token is a parse error; an out-of-band
    // huge exponent parses to infinity and must be caught as non-finite.
    std::ofstream out(path);
    out << R"({"kind":"intra-succ","ids":[1,2],"rows":[[0.5,0.5],[1e999,1]]})";
  }
  CHECK_THROWS_WITH(load_scores(path), Catch::Matchers::ContainsSubstring("non-finite"));
  {
    std::ofstream out(path);
    out << R"({"kind":"intra-succ","ids":[1,1],"rows":[[0.5,0.5],[0,1]]})";
  }
  CHECK_THROWS_WITH(load_scores(path), Catch::Matchers::ContainsSubstring("duplicate"));
  std::filesystem::remove(path);
}

TEST_CASE("role score files round trip") {
  RoleScores roles;
  roles.ids = {1, 2};
  std::array<double, kRoleCount> row{};
  row[static_cast<std::size_t>(LogicalRole::Section)] = 1.0;
  roles.rows.push_back(row);
  row.fill(1.0 / kRoleCount);
  roles.rows.push_back(row);
  const std::string path = temp_path("docstruct_roles.json");
  store_role_scores(roles, path);
  const RoleScores loaded = load_role_scores(path);
  CHECK(loaded.ids == roles.ids);
  CHECK(loaded.argmax_role(1) == LogicalRole::Section);
  std::filesystem::remove(path);
}

TEST_CASE("relation-type files round trip through argmax form") {
  RelationTypeDistribution dist;
  dist.ids = {1, 2};
  dist.probs = {{1, 0, 0}, {0.1, 0.8, 0.1}, {0, 0, 1}, {0.2, 0.2, 0.6}};
  const std::string path = temp_path("docstruct_rel.json");
  store_relation_types(dist, path);
  const RelationTypeDistribution loaded = load_relation_types(path);
  CHECK(loaded.ids == dist.ids);
  CHECK(loaded.pair(1, 2)[1] == Catch::Approx(0.8));
  CHECK(loaded.pair(2, 2)[2] == Catch::Approx(0.6));
  std::filesystem::remove(path);
}
