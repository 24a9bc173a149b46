#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <iterator>
#include <string>
#include <vector>

#include "docstruct/construct.hpp"
#include "docstruct/detect.hpp"
#include "docstruct/model.hpp"
#include "docstruct/pipeline.hpp"
#include "docstruct/scorers.hpp"

namespace docstruct {

struct SynthConfig {
  std::uint64_t seed = 1;
  int pages = 2;                   // page budget; content is truncated to fit
  int columns = 2;                 // 1..3
  int toc_depth = 2;               // maximum heading depth, 1..4
  int paragraphs_per_section = 2;  // upper bound per section
  double figure_probability = 0.25;
};

namespace synth_detail {

/// SplitMix64. Self-contained so that fixed seeds give bit-identical
/// documents on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int irange(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool chance(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

inline constexpr const char* kWords[] = {
    "lorem",  "ipsum",  "dolor",   "amet",    "verba",  "structa", "ordo",
    "pagina", "textus", "columna", "regio",   "titulus", "caput",  "corpus",
    "ratio",  "forma",  "signum",  "numerus", "series", "modus",  "campus",
    "punctum", "linea",  "spatium", "index",   "folium", "summa",  "nexus"};

inline std::string make_words(Rng& rng, int count, bool capitalize_each = false) {
  std::string out;
  for (int i = 0; i < count; ++i) {
    std::string w = kWords[rng.irange(0, static_cast<int>(std::size(kWords)) - 1)];
    if (capitalize_each || i == 0) w[0] = static_cast<char>(std::toupper(w[0]));
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

struct PlanSection {
  std::string number;
  int depth = 1;
  int paragraphs = 1;
  bool figure = false;
  std::vector<PlanSection> children;
};

inline std::vector<PlanSection> plan_sections(Rng& rng, const SynthConfig& cfg, int depth,
                                              const std::string& prefix) {
  std::vector<PlanSection> out;
  const int count = depth == 1 ? rng.irange(2, 3) : rng.irange(1, 2);
  for (int i = 0; i < count; ++i) {
    PlanSection s;
    s.number = prefix.empty() ? std::to_string(i + 1) : prefix + "." + std::to_string(i + 1);
    s.depth = depth;
    s.paragraphs = rng.irange(1, std::max(1, cfg.paragraphs_per_section));
    s.figure = rng.chance(cfg.figure_probability);
    if (depth < cfg.toc_depth && rng.chance(0.65)) {
      s.children = plan_sections(rng, cfg, depth + 1, s.number);
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Column-flow layout engine. Geometry is tuned against the pipeline's
/// geometric heuristics: line pitch well under the region gap, short
/// closing lines, narrow headings, full-width continuation lines.
class Layout {
 public:
  Layout(Rng& rng, const SynthConfig& cfg) : rng_(rng) {
    pages_budget_ = std::clamp(cfg.pages, 1, 8);
    columns_ = std::clamp(cfg.columns, 1, 3);
    col_w_ = (kPageW - 2 * kMargin - (columns_ - 1) * kGutter) / columns_;
  }

  Document take_document() && { return std::move(doc_); }

  bool exhausted() const { return exhausted_; }
  double column_width() const { return col_w_; }
  int figure_count() const { return figure_count_; }

  /// Places one text region; returns its ordered line ids (empty when the
  /// page budget ran out before the first line).
  std::vector<Id> place_text_region(const std::vector<std::pair<double, std::string>>& lines,
                                    double lead_gap) {
    std::vector<Id> ids;
    double gap = lead_gap;
    for (const auto& [width_ratio, text] : lines) {
      if (!fit(gap + kLineH)) {
        if (!advance_column()) break;
        gap = 0.0;
      }
      const double y1 = column_empty() ? kMargin : y_ + gap;
      const double x1 = col_x() + rng_.range(-1.0, 1.0);
      const double w = width_ratio * col_w_;
      doc_.lines.push_back({next_id_++, page_, {x1, y1, x1 + w, y1 + kLineH}, text});
      ids.push_back(doc_.lines.back().id);
      y_ = y1 + kLineH;
      empty_ = false;
      gap = rng_.range(0.26, 0.34) * kLineH;  // intra-region pitch
    }
    return ids;
  }

  /// Places a graphical object, optionally followed by a caption region.
  /// Returns (object id, caption line ids); object id is -1 when skipped.
  std::pair<Id, std::vector<Id>> place_graphic(GraphicClass cls, bool with_caption) {
    const double fig_h = rng_.range(0.16, 0.26) * (kPageH - 2 * kMargin);
    const double cap_need = with_caption ? 4.0 * kLineH : 0.0;
    const double lead = rng_.range(1.2, 1.5) * kLineH;
    if (!fit(lead + fig_h + cap_need) && !advance_column()) return {kRootId, {}};
    if (!fit(lead + fig_h + cap_need)) {
      // Fresh column too short for the whole float: drop it.
      return {kRootId, {}};
    }
    const double y1 = column_empty() ? kMargin : y_ + lead;
    const double x1 = col_x() + rng_.range(0.0, 0.04) * col_w_;
    const double w = rng_.range(0.9, 0.97) * col_w_;
    const Id oid = next_id_++;
    doc_.graphics.push_back({oid, page_, {x1, y1, x1 + w, y1 + fig_h}, cls});
    ++figure_count_;

    // Sometimes drop a stray line inside the box; the region detector must
    // filter it out.
    if (rng_.chance(0.4)) {
      const double ly = y1 + rng_.range(0.3, 0.6) * fig_h;
      const double lx = x1 + 0.25 * w;
      doc_.lines.push_back({next_id_++, page_, {lx, ly, lx + 0.5 * w, ly + kLineH},
                            make_words(rng_, 2)});
    }
    y_ = y1 + fig_h;
    empty_ = false;

    std::vector<Id> caption_ids;
    if (with_caption) {
      const std::string tag = cls == GraphicClass::Table ? "Table" : "Figure";
      const std::string text = tag + " " + std::to_string(figure_count_) + ": " +
                               make_words(rng_, rng_.irange(3, 6));
      std::vector<std::pair<double, std::string>> cap;
      if (rng_.chance(0.4)) {
        cap.push_back({rng_.range(0.86, 0.95), text});
        cap.push_back({rng_.range(0.4, 0.6), make_words(rng_, rng_.irange(2, 4))});
      } else {
        cap.push_back({rng_.range(0.5, 0.75), text});
      }
      caption_ids = place_text_region(cap, rng_.range(0.5, 0.7) * kLineH);
      // Keep following content clearly separated from the float.
      y_ += rng_.range(0.4, 0.6) * kLineH;
    }
    return {oid, caption_ids};
  }

  double region_gap() { return rng_.range(0.85, 1.05) * kLineH; }
  double heading_gap() { return rng_.range(1.15, 1.35) * kLineH; }

  void finalize_pages() {
    for (int p = 0; p <= page_ && p < pages_budget_; ++p) {
      doc_.pages.push_back({p, kPageW, kPageH});
    }
  }

 private:
  static constexpr double kPageW = 850.0;
  static constexpr double kPageH = 1100.0;
  static constexpr double kMargin = 60.0;
  static constexpr double kGutter = 24.0;
  static constexpr double kLineH = 13.0;

  double col_x() const { return kMargin + col_ * (col_w_ + kGutter); }
  bool column_empty() const { return empty_; }

  bool fit(double needed) const {
    const double start = empty_ ? kMargin : y_;
    return start + needed <= kPageH - kMargin;
  }

  bool advance_column() {
    if (exhausted_) return false;
    ++col_;
    if (col_ >= columns_) {
      col_ = 0;
      ++page_;
      if (page_ >= pages_budget_) {
        exhausted_ = true;
        --page_;
        return false;
      }
    }
    y_ = kMargin;
    empty_ = true;
    return true;
  }

  Rng& rng_;
  Document doc_;
  Id next_id_ = 0;
  int pages_budget_ = 1;
  int columns_ = 1;
  double col_w_ = 0.0;
  int page_ = 0;
  int col_ = 0;
  double y_ = kMargin;
  bool empty_ = true;
  bool exhausted_ = false;
  int figure_count_ = 0;
};

}  // namespace synth_detail

/// Generates a synthetic multi-page document with full ground truth:
/// regions, reading-order groups, heading tree, and structure tree.
/// Deterministic for a fixed config.
inline Document generate(const SynthConfig& cfg) {
  synth_detail::Rng rng(cfg.seed);
  synth_detail::Layout layout(rng, cfg);

  GroundTruth gt;
  std::vector<Id> text_chain;  // GT text group, in placement order

  auto add_text_region = [&](LogicalRole role,
                             const std::vector<std::pair<double, std::string>>& lines,
                             double lead_gap, bool in_chain) -> const Region* {
    const std::vector<Id> ids = layout.place_text_region(lines, lead_gap);
    if (ids.empty()) return nullptr;
    Region r;
    r.id = region_id_for(ids);
    r.role = role;
    r.lines = ids;
    gt.regions.push_back(std::move(r));
    if (in_chain) text_chain.push_back(gt.regions.back().id);
    return &gt.regions.back();
  };

  // Front matter lives at the top of the first column. RNG draws happen in
  // a fixed sequence so that a seed pins the whole document.
  {
    std::vector<std::pair<double, std::string>> title_lines;
    title_lines.push_back({rng.range(0.6, 0.75), synth_detail::make_words(rng, rng.irange(3, 5), true)});
    title_lines.push_back({rng.range(0.45, 0.6), synth_detail::make_words(rng, rng.irange(2, 4), true)});
    add_text_region(LogicalRole::Title, title_lines, 0.0, true);

    std::vector<std::pair<double, std::string>> author_lines;
    author_lines.push_back({rng.range(0.5, 0.68), synth_detail::make_words(rng, 3, true)});
    const double author_gap = layout.region_gap();
    add_text_region(LogicalRole::Author, author_lines, author_gap, true);

    std::vector<std::pair<double, std::string>> affiliation_lines;
    affiliation_lines.push_back({rng.range(0.45, 0.62), synth_detail::make_words(rng, 3, true)});
    const double affiliation_gap = layout.region_gap();
    add_text_region(LogicalRole::Affiliation, affiliation_lines, affiliation_gap, true);
  }

  const auto plan = synth_detail::plan_sections(rng, cfg, 1, "");

  struct TocFrame {
    TocNode* node;
  };
  auto place_section = [&](auto&& self, const synth_detail::PlanSection& section,
                           TocNode& parent) -> void {
    if (layout.exhausted()) return;
    const std::string heading_text =
        section.number + " " + synth_detail::make_words(rng, rng.irange(2, 4), true);
    const double heading_width = rng.range(0.5, 0.78);
    const double heading_gap = layout.heading_gap();
    const Region* heading = add_text_region(LogicalRole::Section,
                                            {{heading_width, heading_text}}, heading_gap, true);
    if (!heading) return;
    parent.children.push_back(TocNode{heading->id, {}});
    TocNode& toc_node = parent.children.back();

    for (int p = 0; p < section.paragraphs && !layout.exhausted(); ++p) {
      std::vector<std::pair<double, std::string>> lines;
      const int count = rng.irange(3, 7);
      for (int l = 0; l < count; ++l) {
        const bool last = l == count - 1;
        const double w = last ? rng.range(0.35, 0.75) : rng.range(0.96, 1.0);
        lines.push_back({w, synth_detail::make_words(rng, last ? rng.irange(2, 4)
                                                               : rng.irange(6, 9))});
      }
      const double paragraph_gap = layout.region_gap();
      add_text_region(LogicalRole::Paragraph, lines, paragraph_gap, true);
    }

    if (section.figure && !layout.exhausted()) {
      const double roll = rng.uniform();
      const GraphicClass cls = roll < 0.55  ? GraphicClass::Figure
                               : roll < 0.85 ? GraphicClass::Table
                                             : GraphicClass::EquationBlock;
      const bool with_caption = cls != GraphicClass::EquationBlock;
      const auto [oid, caption_ids] = layout.place_graphic(cls, with_caption);
      if (oid != kRootId) {
        Region obj;
        obj.id = oid;
        obj.role = role_for_graphic(cls);
        obj.graphic = oid;
        gt.regions.push_back(obj);
        ReadingOrderGroup group{GroupCategory::GraphicalRegion, {oid}};
        if (!caption_ids.empty()) {
          Region cap;
          cap.id = region_id_for(caption_ids);
          cap.role = LogicalRole::Caption;
          cap.lines = caption_ids;
          gt.regions.push_back(std::move(cap));
          group.members.push_back(gt.regions.back().id);
        }
        gt.groups.push_back(std::move(group));
      }
    }

    for (const auto& child : section.children) {
      if (layout.exhausted()) break;
      self(self, child, toc_node);
    }
  };
  for (const auto& section : plan) {
    if (layout.exhausted()) break;
    place_section(place_section, section, gt.toc);
  }

  layout.finalize_pages();
  Document doc = std::move(layout).take_document();

  // Geometry for region boxes and graphic boxes.
  for (auto& region : gt.regions) {
    if (region.is_graphical()) {
      region.bbox = doc.find_graphic(*region.graphic)->bbox;
    } else {
      region.bbox = doc.find_line(region.lines.front())->bbox;
      for (Id lid : region.lines) {
        region.bbox = union_bbox(region.bbox, doc.find_line(lid)->bbox);
      }
    }
  }
  if (!text_chain.empty()) {
    gt.groups.insert(gt.groups.begin(), {GroupCategory::TextRegion, text_chain});
  }

  // The structure tree is assembled by the same machinery the pipeline
  // uses, from the ground-truth regions, groups, and heading tree.
  OrderResult gt_order{gt.groups, {}};
  doc.ground_truth = gt;
  doc.ground_truth->hierarchy =
      assemble_hierarchy(gt.regions, gt_order, gt.toc, doc);
  return doc;
}

/// Writes the full set of oracle score files for a generated document:
/// indicator matrices for every decoder the pipeline runs.
inline void write_oracle_scores(const Document& doc, const std::string& dir) {
  if (!doc.ground_truth) {
    throw validation_error("write_oracle_scores: document carries no ground truth");
  }
  const OracleScorer oracle(*doc.ground_truth);
  const std::vector<TextLine> lines = eligible_lines(doc);
  store_scores(oracle.intra_succ(doc, lines), dir + "/intra-succ.json");
  store_scores(oracle.intra_pred(doc, lines), dir + "/intra-pred.json");
  store_role_scores(oracle.line_roles(doc, lines), dir + "/role.json");

  const std::vector<Region>& regions = doc.ground_truth->regions;
  store_scores(oracle.inter_succ(doc, regions), dir + "/inter-succ.json");
  store_relation_types(oracle.relation_types(doc, regions), dir + "/inter-relation-type.json");

  std::vector<Region> headings;
  const detail::RegionLookup lookup(regions);
  for (Id id : preorder(doc.ground_truth->toc)) headings.push_back(lookup.at(id));
  const TocScorePair toc = oracle.toc_scores(doc, headings);
  store_scores(toc.parent, dir + "/toc-parent.json");
  store_scores(toc.sibling, dir + "/toc-sibling.json");
}

}  // namespace docstruct
