#pragma once

#include <algorithm>
#include <compare>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "docstruct/model.hpp"
#include "docstruct/scoring.hpp"

namespace docstruct {

/// Source of every relation score the pipeline consumes. Implementations
/// are stateless after construction and callable from concurrent workers.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual ScoreMatrix intra_succ(const Document& doc,
                                 const std::vector<TextLine>& lines) const = 0;
  virtual ScoreMatrix intra_pred(const Document& doc,
                                 const std::vector<TextLine>& lines) const = 0;
  virtual RoleScores line_roles(const Document& doc,
                                const std::vector<TextLine>& lines) const = 0;
  virtual ScoreMatrix inter_succ(const Document& doc,
                                 const std::vector<Region>& regions) const = 0;
  virtual RelationTypeDistribution relation_types(const Document& doc,
                                                  const std::vector<Region>& regions) const = 0;
  virtual TocScorePair toc_scores(const Document& doc,
                                  const std::vector<Region>& headings) const = 0;
};

namespace detail {

inline std::vector<PlacedElement> placed_lines(const std::vector<TextLine>& lines) {
  std::vector<PlacedElement> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back({l.id, l.bbox, l.page});
  return out;
}

inline bool is_main_body(const Region& r) {
  if (r.is_graphical()) return false;
  switch (r.role) {
    case LogicalRole::Caption:
    case LogicalRole::Footnote:
    case LogicalRole::Header:
    case LogicalRole::Footer:
      return false;
    default:
      return true;
  }
}

inline ScoreMatrix one_hot_matrix(std::string kind, std::vector<Id> ids,
                                  const std::unordered_map<Id, Id>& target) {
  const std::size_t n = ids.size();
  ScoreMatrix m{std::move(kind), std::move(ids), {}};
  m.rows.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const Id from = m.ids[i];
    auto it = target.find(from);
    const Id to = it == target.end() ? from : it->second;
    auto col = m.index_of(to);
    m.rows[i][col ? *col : i] = 1.0;
  }
  m.validate();
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Heuristic scorer
// ---------------------------------------------------------------------------

/// Deterministic geometric and keyword rules. Strong enough to run the whole
/// pipeline standalone on clean column layouts; a trained model can replace
/// it through the file-backed scorer without touching anything downstream.
class HeuristicScorer : public Scorer {
 public:
  explicit HeuristicScorer(HeuristicParams params = {}) : params_(params) {}

  ScoreMatrix intra_succ(const Document&, const std::vector<TextLine>& lines) const override {
    return heuristic_succ_scores(detail::placed_lines(lines), params_);
  }

  ScoreMatrix intra_pred(const Document&, const std::vector<TextLine>& lines) const override {
    return heuristic_pred_scores(detail::placed_lines(lines), params_);
  }

  RoleScores line_roles(const Document& doc, const std::vector<TextLine>& lines) const override {
    RoleScores scores;
    for (const auto& line : lines) {
      scores.ids.push_back(line.id);
      std::array<double, kRoleCount> row{};
      row[static_cast<std::size_t>(classify_line(doc, line))] = 1.0;
      scores.rows.push_back(row);
    }
    scores.validate();
    return scores;
  }

  ScoreMatrix inter_succ(const Document& doc, const std::vector<Region>& regions) const override {
    // Column structure comes from the member lines; a region that flows
    // across columns is keyed by where it starts, not by its union box.
    std::vector<PlacedElement> elems;
    std::unordered_map<Id, const TextLine*> line_of;
    for (const auto& l : doc.lines) line_of[l.id] = &l;
    for (const auto& r : regions) {
      for (Id lid : r.lines) {
        auto it = line_of.find(lid);
        if (it == line_of.end()) {
          throw validation_error("region " + std::to_string(r.id) +
                                 " references unknown line " + std::to_string(lid));
        }
        elems.push_back({lid, it->second->bbox, it->second->page});
      }
    }
    const ColumnLayout layout = detect_columns(elems, params_.column_overlap_ratio);
    std::unordered_map<Id, std::size_t> elem_index;
    for (std::size_t i = 0; i < elems.size(); ++i) elem_index[elems[i].id] = i;

    using ChainKey = std::tuple<int, int, double, double, Id>;  // page, column, y, x, id
    std::vector<std::pair<ChainKey, Id>> chain;
    std::unordered_map<Id, Id> target;
    for (const auto& r : regions) {
      if (!detail::is_main_body(r) || r.lines.empty()) continue;
      const std::size_t e = elem_index.at(r.lines.front());
      chain.push_back({ChainKey{elems[e].page, layout.column_of[e], elems[e].bbox.y1,
                                elems[e].bbox.x1, r.id},
                       r.id});
    }
    std::sort(chain.begin(), chain.end());
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      target[chain[i].second] = chain[i + 1].second;
    }

    // Captions and footnotes point at the nearest graphical object on their
    // page; everything unlinked keeps its self-loop.
    for (const auto& r : regions) {
      if (r.is_graphical() || detail::is_main_body(r) || r.lines.empty()) continue;
      if (r.role != LogicalRole::Caption && r.role != LogicalRole::Footnote) continue;
      const Region* best = nullptr;
      double best_dist = 0.0;
      for (const auto& g : regions) {
        if (!g.is_graphical()) continue;
        const TextLine* first = nullptr;
        if (auto it = line_of.find(r.lines.front()); it != line_of.end()) first = it->second;
        if (!first) continue;
        const GraphicalObject* obj = doc.find_graphic(*g.graphic);
        if (!obj || obj->page != first->page) continue;
        const double dx = g.bbox.center_x() - r.bbox.center_x();
        const double dy = g.bbox.center_y() - r.bbox.center_y();
        const double dist = dx * dx + dy * dy;
        if (!best || dist < best_dist || (dist == best_dist && g.id < best->id)) {
          best = &g;
          best_dist = dist;
        }
      }
      if (best) target[r.id] = best->id;
    }

    std::vector<Id> ids;
    ids.reserve(regions.size());
    for (const auto& r : regions) ids.push_back(r.id);
    return detail::one_hot_matrix(std::string(to_string(ScorerKind::InterSucc)),
                                  std::move(ids), target);
  }

  RelationTypeDistribution relation_types(const Document&,
                                          const std::vector<Region>& regions) const override {
    RelationTypeDistribution dist;
    for (const auto& r : regions) dist.ids.push_back(r.id);
    const std::size_t n = regions.size();
    dist.probs.assign(n * n, {0.0, 0.0, 1.0});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        auto& cell = dist.probs[i * n + j];
        const bool linkish = (regions[i].role == LogicalRole::Caption ||
                              regions[i].role == LogicalRole::Footnote) &&
                             regions[j].is_graphical();
        const bool linkish_rev = (regions[j].role == LogicalRole::Caption ||
                                  regions[j].role == LogicalRole::Footnote) &&
                                 regions[i].is_graphical();
        if (linkish || linkish_rev) {
          cell = {0.0, 1.0, 0.0};
        } else if (i != j && detail::is_main_body(regions[i]) &&
                   detail::is_main_body(regions[j])) {
          cell = {1.0, 0.0, 0.0};
        }
      }
    }
    dist.validate();
    return dist;
  }

  TocScorePair toc_scores(const Document& doc, const std::vector<Region>& headings) const override {
    std::vector<HeadingCue> cues;
    cues.reserve(headings.size());
    for (const auto& h : headings) {
      HeadingCue cue;
      cue.id = h.id;
      cue.text = region_text(h, doc);
      cue.depth = numbering_depth(cue.text);
      cues.push_back(std::move(cue));
    }
    return heuristic_toc_scores(cues);
  }

 private:
  static bool caption_prefix(const std::string& text) {
    for (const char* prefix : {"Figure ", "Fig. ", "Table ", "Tab. "}) {
      if (text.rfind(prefix, 0) == 0) {
        const std::size_t start = std::string(prefix).size();
        return start < text.size() && std::isdigit(static_cast<unsigned char>(text[start]));
      }
    }
    return false;
  }

  // "2.1.3 Words ..." with nothing but digits and dots in the first token.
  static bool numbered_heading(const std::string& text) {
    std::size_t ws = 0;
    while (ws < text.size() && std::isspace(static_cast<unsigned char>(text[ws]))) ++ws;
    const std::size_t sp = text.find(' ', ws);
    if (sp == std::string::npos || sp == ws || sp + 1 >= text.size()) return false;
    bool expect_digit = true;
    for (std::size_t i = ws; i < sp; ++i) {
      const char c = text[i];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        expect_digit = false;
      } else if (c == '.' && !expect_digit) {
        expect_digit = true;
      } else {
        return false;
      }
    }
    return true;
  }

  LogicalRole classify_line(const Document& doc, const TextLine& line) const {
    if (caption_prefix(line.text)) return LogicalRole::Caption;
    if (numbered_heading(line.text)) return LogicalRole::Section;
    if (line.page == 0 && !doc.pages.empty() &&
        line.bbox.y1 < 0.18 * doc.pages.front().height) {
      return LogicalRole::Title;
    }
    return LogicalRole::Paragraph;
  }

  HeuristicParams params_;
};

// ---------------------------------------------------------------------------
// Oracle scorer
// ---------------------------------------------------------------------------

/// Indicator matrices read off the ground truth: probability one on each
/// annotated relation, self-loops everywhere else. Test-only by intent; it
/// verifies the decoders independently of any model.
class OracleScorer : public Scorer {
 public:
  explicit OracleScorer(GroundTruth gt) : gt_(std::move(gt)) {}

  ScoreMatrix intra_succ(const Document&, const std::vector<TextLine>& lines) const override {
    return line_chain(lines, true);
  }

  ScoreMatrix intra_pred(const Document&, const std::vector<TextLine>& lines) const override {
    return line_chain(lines, false);
  }

  RoleScores line_roles(const Document&, const std::vector<TextLine>& lines) const override {
    std::unordered_map<Id, LogicalRole> role_of;
    for (const auto& r : gt_.regions) {
      for (Id lid : r.lines) role_of[lid] = r.role;
    }
    RoleScores scores;
    for (const auto& line : lines) {
      scores.ids.push_back(line.id);
      std::array<double, kRoleCount> row{};
      auto it = role_of.find(line.id);
      const LogicalRole role = it == role_of.end() ? LogicalRole::Other : it->second;
      row[static_cast<std::size_t>(role)] = 1.0;
      scores.rows.push_back(row);
    }
    scores.validate();
    return scores;
  }

  ScoreMatrix inter_succ(const Document&, const std::vector<Region>& regions) const override {
    std::unordered_map<Id, Id> target;
    for (const auto& g : gt_.groups) {
      if (g.category == GroupCategory::TextRegion) {
        for (std::size_t i = 0; i + 1 < g.members.size(); ++i) {
          target[g.members[i]] = g.members[i + 1];
        }
      } else {
        for (std::size_t i = 1; i < g.members.size(); ++i) {
          target[g.members[i]] = g.members.front();
        }
      }
    }
    std::vector<Id> ids;
    ids.reserve(regions.size());
    for (const auto& r : regions) ids.push_back(r.id);
    return detail::one_hot_matrix(std::string(to_string(ScorerKind::InterSucc)),
                                  std::move(ids), target);
  }

  RelationTypeDistribution relation_types(const Document&,
                                          const std::vector<Region>& regions) const override {
    std::map<std::pair<Id, Id>, RelationTypeClass> cls;
    for (const auto& g : gt_.groups) {
      if (g.category == GroupCategory::TextRegion) {
        for (std::size_t i = 0; i + 1 < g.members.size(); ++i) {
          cls[{g.members[i], g.members[i + 1]}] = RelationTypeClass::TextRegionOrder;
        }
      } else {
        for (std::size_t i = 1; i < g.members.size(); ++i) {
          cls[{g.members[i], g.members.front()}] = RelationTypeClass::GraphicalRegionLink;
          cls[{g.members.front(), g.members[i]}] = RelationTypeClass::GraphicalRegionLink;
        }
      }
    }
    RelationTypeDistribution dist;
    for (const auto& r : regions) dist.ids.push_back(r.id);
    const std::size_t n = regions.size();
    dist.probs.assign(n * n, {0.0, 0.0, 1.0});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        auto it = cls.find({dist.ids[i], dist.ids[j]});
        if (it != cls.end()) {
          auto& cell = dist.probs[i * n + j];
          cell = {0.0, 0.0, 0.0};
          cell[static_cast<std::size_t>(it->second)] = 1.0;
        }
      }
    }
    dist.validate();
    return dist;
  }

  TocScorePair toc_scores(const Document&, const std::vector<Region>& headings) const override {
    std::unordered_map<Id, Id> parent_of;
    std::unordered_map<Id, Id> sibling_of;
    collect_toc_relations(gt_.toc, parent_of, sibling_of);

    TocScorePair out;
    out.parent.kind = std::string(to_string(ScorerKind::TocParent));
    out.parent.ids.push_back(kRootId);
    for (const auto& h : headings) out.parent.ids.push_back(h.id);
    const std::size_t np = headings.size() + 1;
    out.parent.rows.assign(np, std::vector<double>(np, 0.0));
    out.parent.rows[0][0] = 1.0;
    for (std::size_t i = 0; i < headings.size(); ++i) {
      auto it = parent_of.find(headings[i].id);
      const Id parent = it == parent_of.end() ? kRootId : it->second;
      auto col = out.parent.index_of(parent);
      out.parent.rows[i + 1][col ? *col : 0] = 1.0;
    }
    out.parent.validate();

    out.sibling.kind = std::string(to_string(ScorerKind::TocSibling));
    for (const auto& h : headings) out.sibling.ids.push_back(h.id);
    out.sibling.rows.assign(headings.size(), std::vector<double>(headings.size(), 0.0));
    for (std::size_t i = 0; i < headings.size(); ++i) {
      auto it = sibling_of.find(headings[i].id);
      const Id sib = it == sibling_of.end() ? headings[i].id : it->second;
      auto col = out.sibling.index_of(sib);
      out.sibling.rows[i][col ? *col : i] = 1.0;
    }
    out.sibling.validate();
    return out;
  }

 private:
  static void collect_toc_relations(const TocNode& node, std::unordered_map<Id, Id>& parent_of,
                                    std::unordered_map<Id, Id>& sibling_of) {
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      parent_of[node.children[i].id] = node.id;
      sibling_of[node.children[i].id] = i == 0 ? node.children[i].id : node.children[i - 1].id;
      collect_toc_relations(node.children[i], parent_of, sibling_of);
    }
  }

  ScoreMatrix line_chain(const std::vector<TextLine>& lines, bool forward) const {
    std::unordered_map<Id, Id> target;
    for (const auto& r : gt_.regions) {
      for (std::size_t i = 0; i + 1 < r.lines.size(); ++i) {
        if (forward) {
          target[r.lines[i]] = r.lines[i + 1];
        } else {
          target[r.lines[i + 1]] = r.lines[i];
        }
      }
    }
    std::vector<Id> ids;
    ids.reserve(lines.size());
    for (const auto& l : lines) ids.push_back(l.id);
    const auto kind = forward ? ScorerKind::IntraSucc : ScorerKind::IntraPred;
    return detail::one_hot_matrix(std::string(to_string(kind)), std::move(ids), target);
  }

  GroundTruth gt_;
};

// ---------------------------------------------------------------------------
// File-backed scorer
// ---------------------------------------------------------------------------

/// Loads precomputed score files (one JSON per kind) from a directory, as
/// produced by an external model. Every file must cover exactly the element
/// set the pipeline asks about.
class FileScorer : public Scorer {
 public:
  explicit FileScorer(std::string dir) : dir_(std::move(dir)) {}

  ScoreMatrix intra_succ(const Document&, const std::vector<TextLine>& lines) const override {
    auto m = load_scores(path_for(ScorerKind::IntraSucc));
    check_ids(m.kind, m.ids, line_ids(lines));
    return m;
  }

  ScoreMatrix intra_pred(const Document&, const std::vector<TextLine>& lines) const override {
    auto m = load_scores(path_for(ScorerKind::IntraPred));
    check_ids(m.kind, m.ids, line_ids(lines));
    return m;
  }

  RoleScores line_roles(const Document&, const std::vector<TextLine>& lines) const override {
    auto r = load_role_scores(path_for(ScorerKind::Role));
    check_ids("role", r.ids, line_ids(lines));
    return r;
  }

  ScoreMatrix inter_succ(const Document&, const std::vector<Region>& regions) const override {
    auto m = load_scores(path_for(ScorerKind::InterSucc));
    check_ids(m.kind, m.ids, region_ids(regions));
    return m;
  }

  RelationTypeDistribution relation_types(const Document&,
                                          const std::vector<Region>& regions) const override {
    auto d = load_relation_types(path_for(ScorerKind::InterRelationType));
    check_ids("inter-relation-type", d.ids, region_ids(regions));
    return d;
  }

  TocScorePair toc_scores(const Document&, const std::vector<Region>& headings) const override {
    TocScorePair pair{load_scores(path_for(ScorerKind::TocParent)),
                      load_scores(path_for(ScorerKind::TocSibling))};
    std::vector<Id> expected = region_ids(headings);
    check_ids(pair.sibling.kind, pair.sibling.ids, expected);
    expected.push_back(kRootId);
    check_ids(pair.parent.kind, pair.parent.ids, expected);
    return pair;
  }

 private:
  static std::vector<Id> line_ids(const std::vector<TextLine>& lines) {
    std::vector<Id> ids;
    ids.reserve(lines.size());
    for (const auto& l : lines) ids.push_back(l.id);
    return ids;
  }

  static std::vector<Id> region_ids(const std::vector<Region>& regions) {
    std::vector<Id> ids;
    ids.reserve(regions.size());
    for (const auto& r : regions) ids.push_back(r.id);
    return ids;
  }

  static void check_ids(const std::string& kind, std::vector<Id> got, std::vector<Id> expected) {
    std::sort(got.begin(), got.end());
    std::sort(expected.begin(), expected.end());
    if (got != expected) {
      throw validation_error("score file '" + kind +
                             "' does not cover the expected element ids");
    }
  }

  std::string path_for(ScorerKind kind) const {
    return dir_ + "/" + std::string(to_string(kind)) + ".json";
  }

  std::string dir_;
};

}  // namespace docstruct
