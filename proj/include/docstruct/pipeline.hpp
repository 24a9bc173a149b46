#pragma once

#include <memory>
#include <string>
#include <vector>

#include "docstruct/construct.hpp"
#include "docstruct/detect.hpp"
#include "docstruct/model.hpp"
#include "docstruct/order.hpp"
#include "docstruct/scorers.hpp"

namespace docstruct {

enum class ScorerSource { Heuristic, Oracle, Files };

struct PipelineConfig {
  ScorerSource source = ScorerSource::Heuristic;
  std::string score_dir;  // Files source only
  HeuristicParams params;
  double iou_threshold = 0.5;  // graphical matching in end-to-end evaluation
};

inline std::unique_ptr<Scorer> make_scorer(const PipelineConfig& cfg, const Document& doc) {
  switch (cfg.source) {
    case ScorerSource::Heuristic:
      return std::make_unique<HeuristicScorer>(cfg.params);
    case ScorerSource::Files:
      return std::make_unique<FileScorer>(cfg.score_dir);
    case ScorerSource::Oracle:
      if (!doc.ground_truth) {
        throw validation_error("oracle scorer requires a ground_truth block in the document");
      }
      return std::make_unique<OracleScorer>(*doc.ground_truth);
  }
  throw validation_error("unknown scorer source");
}

inline std::vector<Region> run_detect(const Document& doc, const Scorer& scorer) {
  const std::vector<TextLine> lines = eligible_lines(doc);
  return build_regions(doc, scorer.intra_succ(doc, lines), scorer.intra_pred(doc, lines),
                       scorer.line_roles(doc, lines));
}

inline OrderResult run_order(const Document& doc, const std::vector<Region>& regions,
                             const Scorer& scorer) {
  const ScoreMatrix m = scorer.inter_succ(doc, regions);
  std::vector<Id> got = m.ids;
  std::vector<Id> expected;
  expected.reserve(regions.size());
  for (const auto& r : regions) expected.push_back(r.id);
  std::sort(got.begin(), got.end());
  std::sort(expected.begin(), expected.end());
  if (got != expected) {
    throw validation_error("inter-succ scores do not cover the region set");
  }
  const ChainDecodeResult decoded = decode_inter_succ(m);
  const auto labeled = classify_links(decoded, scorer.relation_types(doc, regions));
  return build_groups(labeled, regions);
}

struct ConstructResult {
  TocTree toc;
  HierarchyTree hierarchy;
};

inline ConstructResult run_construct(const Document& doc, const std::vector<Region>& regions,
                                     const OrderResult& order, const Scorer& scorer) {
  const std::vector<Id> sequence = reading_sequence(order, regions, doc);
  const detail::RegionLookup lookup(regions);
  std::vector<Region> headings;
  std::vector<Id> heading_ids;
  for (Id id : sequence) {
    const Region& r = lookup.at(id);
    if (!r.is_graphical() && r.role == LogicalRole::Section) {
      headings.push_back(r);
      heading_ids.push_back(id);
    }
  }
  ConstructResult result;
  result.toc = build_toc(heading_ids, scorer.toc_scores(doc, headings));
  result.hierarchy = assemble_hierarchy(regions, order, result.toc, doc);
  return result;
}

struct PipelineResult {
  std::vector<Region> regions;
  OrderResult order;
  TocTree toc;
  HierarchyTree hierarchy;
};

/// detect -> order -> construct on one document.
inline PipelineResult run_pipeline(const Document& doc, const Scorer& scorer) {
  PipelineResult result;
  result.regions = run_detect(doc, scorer);
  result.order = run_order(doc, result.regions, scorer);
  auto constructed = run_construct(doc, result.regions, result.order, scorer);
  result.toc = std::move(constructed.toc);
  result.hierarchy = std::move(constructed.hierarchy);
  return result;
}

}  // namespace docstruct
