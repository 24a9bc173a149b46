#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "docstruct/detect.hpp"
#include "docstruct/model.hpp"
#include "docstruct/scoring.hpp"

namespace docstruct {

/// Reading-order groups plus the labeled links they were built from.
struct OrderResult {
  std::vector<ReadingOrderGroup> groups;
  std::vector<RelationEdge> links;
};

/// Region-level successor decoding; same contract as the line-level decoder.
inline ChainDecodeResult decode_inter_succ(const ScoreMatrix& m) { return decode_succ(m); }

/// Labels every decoded non-self edge with its argmax relation type and
/// drops the ones classified as `none`.
inline std::vector<RelationEdge> classify_links(const ChainDecodeResult& decoded,
                                                const RelationTypeDistribution& dist) {
  std::vector<RelationEdge> out;
  for (const auto& e : decoded.edges) {
    if (e.is_self_loop()) continue;
    const auto& p = dist.pair(e.from, e.to);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < p.size(); ++c) {
      if (p[c] > p[arg]) arg = c;
    }
    const auto cls = static_cast<RelationTypeClass>(arg);
    if (cls == RelationTypeClass::None) continue;
    RelationEdge labeled = e;
    labeled.kind = RelationKind::RelationType;
    labeled.label = std::string(to_string(cls));
    out.push_back(std::move(labeled));
  }
  return out;
}

namespace detail {

struct RegionLookup {
  std::unordered_map<Id, const Region*> by_id;

  explicit RegionLookup(const std::vector<Region>& regions) {
    for (const auto& r : regions) by_id[r.id] = &r;
  }

  const Region& at(Id id) const {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw validation_error("unknown region id " + std::to_string(id));
    }
    return *it->second;
  }
};

}  // namespace detail

/// Builds text-region chains and graphical groups out of the labeled edges.
/// Graphical links are resolved first: a text region claimed by a graphical
/// object keeps that attachment and leaves the text chains. Remaining text
/// chains are de-conflicted (one predecessor per region, best score wins),
/// cycles are broken at their lowest-scored edge, and every unclaimed region
/// becomes a singleton group of its category.
inline OrderResult build_groups(const std::vector<RelationEdge>& labeled,
                                const std::vector<Region>& regions) {
  const detail::RegionLookup lookup(regions);
  OrderResult result;

  // Graphical attachments: (hub object, linked text region, score).
  struct GraphicalLink {
    Id hub;
    Id text;
    double score;
  };
  std::unordered_map<Id, GraphicalLink> best_link_for_text;
  std::vector<RelationEdge> text_edges;
  for (const auto& e : labeled) {
    const Region& from = lookup.at(e.from);
    const Region& to = lookup.at(e.to);
    if (e.label == std::string(to_string(RelationTypeClass::GraphicalRegionLink))) {
      const Region* hub = to.is_graphical() ? &to : (from.is_graphical() ? &from : nullptr);
      const Region* text = to.is_graphical() ? &from : &to;
      if (!hub || text->is_graphical()) continue;  // no usable hub, drop
      auto it = best_link_for_text.find(text->id);
      if (it == best_link_for_text.end() || e.score > it->second.score ||
          (e.score == it->second.score && hub->id < it->second.hub)) {
        best_link_for_text[text->id] = {hub->id, text->id, e.score};
      }
    } else if (!from.is_graphical() && !to.is_graphical()) {
      text_edges.push_back(e);
    }
  }

  std::unordered_set<Id> graphically_claimed;
  std::map<Id, std::vector<GraphicalLink>> links_by_hub;
  for (const auto& [text_id, link] : best_link_for_text) {
    graphically_claimed.insert(text_id);
    links_by_hub[link.hub].push_back(link);
    result.links.push_back({text_id, link.hub, RelationKind::RelationType, link.score,
                            std::string(to_string(RelationTypeClass::GraphicalRegionLink))});
  }

  // Text chains: one successor and one predecessor per region.
  std::sort(text_edges.begin(), text_edges.end(), [](const RelationEdge& a, const RelationEdge& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.from != b.from) return a.from < b.from;
    return a.to < b.to;
  });
  std::unordered_map<Id, Id> next;
  std::unordered_map<Id, Id> prev;
  std::vector<RelationEdge> kept_text;
  for (const auto& e : text_edges) {
    if (graphically_claimed.count(e.from) || graphically_claimed.count(e.to)) continue;
    if (next.count(e.from) || prev.count(e.to)) continue;
    next[e.from] = e.to;
    prev[e.to] = e.from;
    kept_text.push_back(e);
  }

  // Any remaining cycle has every node with in-degree 1; cut it at the
  // lowest-scored edge so traversal can start somewhere.
  std::unordered_set<Id> visited;
  for (const auto& e : kept_text) {
    if (visited.count(e.from)) continue;
    std::vector<Id> trail;
    std::unordered_set<Id> on_trail;
    Id cur = e.from;
    while (next.count(cur) && on_trail.insert(cur).second) {
      trail.push_back(cur);
      cur = next.at(cur);
    }
    for (Id id : trail) visited.insert(id);
    if (next.count(cur) && on_trail.count(cur)) {
      // Found a cycle through `cur`; locate its weakest edge and cut.
      Id weakest_from = cur;
      double weakest_score = std::numeric_limits<double>::infinity();
      Id walk = cur;
      do {
        const Id to = next.at(walk);
        double score = 0.0;
        for (const auto& k : kept_text) {
          if (k.from == walk && k.to == to) score = k.score;
        }
        if (score < weakest_score || (score == weakest_score && walk < weakest_from)) {
          weakest_score = score;
          weakest_from = walk;
        }
        walk = to;
      } while (walk != cur);
      prev.erase(next.at(weakest_from));
      next.erase(weakest_from);
    }
  }
  for (const auto& e : kept_text) {
    auto it = next.find(e.from);
    if (it != next.end() && it->second == e.to) {
      result.links.push_back({e.from, e.to, RelationKind::RelationType, e.score,
                              std::string(to_string(RelationTypeClass::TextRegionOrder))});
    }
  }

  // Emit groups. Text chains first, then graphical hubs with their links,
  // then leftovers as singletons; order is canonical by smallest member.
  std::unordered_set<Id> emitted;
  std::vector<ReadingOrderGroup> text_groups;
  for (const auto& r : regions) {
    if (r.is_graphical() || graphically_claimed.count(r.id) || prev.count(r.id)) continue;
    ReadingOrderGroup group{GroupCategory::TextRegion, {}};
    Id cur = r.id;
    std::unordered_set<Id> seen;
    while (seen.insert(cur).second) {
      group.members.push_back(cur);
      emitted.insert(cur);
      auto it = next.find(cur);
      if (it == next.end()) break;
      cur = it->second;
    }
    text_groups.push_back(std::move(group));
  }
  for (auto& [hub, links] : links_by_hub) {
    ReadingOrderGroup group{GroupCategory::GraphicalRegion, {hub}};
    emitted.insert(hub);
    std::sort(links.begin(), links.end(), [](const GraphicalLink& a, const GraphicalLink& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.text < b.text;
    });
    for (const auto& link : links) {
      group.members.push_back(link.text);
      emitted.insert(link.text);
    }
    result.groups.push_back(std::move(group));
  }
  for (const auto& r : regions) {
    if (emitted.count(r.id)) continue;
    const auto category = r.is_graphical() ? GroupCategory::GraphicalRegion
                                           : GroupCategory::TextRegion;
    if (category == GroupCategory::TextRegion) {
      text_groups.push_back({category, {r.id}});
    } else {
      result.groups.push_back({category, {r.id}});
    }
  }
  result.groups.insert(result.groups.end(), text_groups.begin(), text_groups.end());
  std::sort(result.links.begin(), result.links.end(),
            [](const RelationEdge& a, const RelationEdge& b) {
              if (a.from != b.from) return a.from < b.from;
              return a.to < b.to;
            });
  return result;
}

/// Flattens the groups into one sequence covering every region exactly once.
/// Text groups concatenate in page order of their leading member; each
/// graphical group splices in after the last text region that precedes its
/// anchor object on the anchor's page, or at that page's end when none does.
inline std::vector<Id> reading_sequence(const OrderResult& result,
                                        const std::vector<Region>& regions,
                                        const Document& doc) {
  const detail::RegionLookup lookup(regions);

  std::vector<const ReadingOrderGroup*> text_groups;
  std::vector<const ReadingOrderGroup*> graphical_groups;
  for (const auto& g : result.groups) {
    if (g.members.empty()) throw validation_error("empty reading-order group");
    (g.category == GroupCategory::TextRegion ? text_groups : graphical_groups).push_back(&g);
  }

  std::sort(text_groups.begin(), text_groups.end(), [&](const auto* a, const auto* b) {
    return region_order_key(lookup.at(a->members.front()), doc) <
           region_order_key(lookup.at(b->members.front()), doc);
  });
  std::vector<Id> text_seq;
  for (const auto* g : text_groups) {
    text_seq.insert(text_seq.end(), g->members.begin(), g->members.end());
  }
  std::vector<RegionOrderKey> text_keys;
  text_keys.reserve(text_seq.size());
  for (Id id : text_seq) text_keys.push_back(region_order_key(lookup.at(id), doc));

  // Insertion position = number of text regions preceding the splice point.
  struct Splice {
    std::size_t pos;
    RegionOrderKey anchor;
    const ReadingOrderGroup* group;
  };
  std::vector<Splice> splices;
  for (const auto* g : graphical_groups) {
    const RegionOrderKey anchor = region_order_key(lookup.at(g->members.front()), doc);
    std::size_t pos = 0;
    bool on_page = false;
    for (std::size_t t = 0; t < text_keys.size(); ++t) {
      if (text_keys[t].page == anchor.page && text_keys[t] <= anchor) {
        pos = t + 1;
        on_page = true;
      }
    }
    if (!on_page) {
      for (std::size_t t = 0; t < text_keys.size(); ++t) {
        if (text_keys[t].page <= anchor.page) pos = t + 1;
      }
    }
    splices.push_back({pos, anchor, g});
  }
  std::sort(splices.begin(), splices.end(), [](const Splice& a, const Splice& b) {
    if (a.pos != b.pos) return a.pos < b.pos;
    return a.anchor < b.anchor;
  });

  std::vector<Id> out;
  out.reserve(regions.size());
  std::size_t s = 0;
  for (std::size_t t = 0; t <= text_seq.size(); ++t) {
    while (s < splices.size() && splices[s].pos == t) {
      const auto& members = splices[s].group->members;
      out.insert(out.end(), members.begin(), members.end());
      ++s;
    }
    if (t < text_seq.size()) out.push_back(text_seq[t]);
  }
  return out;
}

}  // namespace docstruct
