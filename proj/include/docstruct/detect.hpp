#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "docstruct/geometry.hpp"
#include "docstruct/model.hpp"
#include "docstruct/scoring.hpp"

namespace docstruct {

// ---------------------------------------------------------------------------
// Chain decoding
// ---------------------------------------------------------------------------

/// One successor edge per element (self-loops mark chain ends).
struct ChainDecodeResult {
  std::vector<RelationEdge> edges;

  std::vector<Id> element_ids() const {
    std::vector<Id> ids;
    ids.reserve(edges.size());
    for (const auto& e : edges) ids.push_back(e.from);
    return ids;
  }
};

/// Row-argmax decoding: each element points at its best-scored partner.
/// Ties go to the lowest column index, which keeps the result deterministic.
inline ChainDecodeResult decode_succ(const ScoreMatrix& m) {
  ChainDecodeResult result;
  result.edges.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m.size(); ++j) {
      if (m.rows[i][j] > m.rows[i][best]) best = j;
    }
    result.edges.push_back({m.ids[i], m.ids[best], RelationKind::Succ, m.rows[i][best], {}});
  }
  return result;
}

/// Undirected line link produced by fusing the two directional heads.
struct Link {
  Id a = 0;
  Id b = 0;

  friend bool operator==(const Link&, const Link&) = default;
  friend auto operator<=>(const Link&, const Link&) = default;
};

inline Link make_link(Id x, Id y) { return x < y ? Link{x, y} : Link{y, x}; }

/// Combines the successor head with the predecessor head (its edges reversed
/// into successor direction). Agreeing proposals merge; when two proposals
/// claim the same predecessor or the same successor for an element, the
/// higher-scored edge wins and the loser is dropped.
inline std::vector<Link> fuse_bidirectional(const ChainDecodeResult& succ,
                                            const ChainDecodeResult& pred) {
  auto succ_ids = succ.element_ids();
  auto pred_ids = pred.element_ids();
  std::sort(succ_ids.begin(), succ_ids.end());
  std::sort(pred_ids.begin(), pred_ids.end());
  if (succ_ids != pred_ids) {
    throw validation_error("fuse_bidirectional: successor and predecessor heads cover "
                           "different element sets");
  }

  std::map<std::pair<Id, Id>, double> candidates;
  auto offer = [&](Id from, Id to, double score) {
    if (from == to) return;
    auto [it, inserted] = candidates.try_emplace({from, to}, score);
    if (!inserted) it->second = std::max(it->second, score);
  };
  for (const auto& e : succ.edges) offer(e.from, e.to, e.score);
  for (const auto& e : pred.edges) offer(e.to, e.from, e.score);

  std::vector<std::pair<std::pair<Id, Id>, double>> ordered(candidates.begin(), candidates.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });

  std::unordered_set<Id> out_taken, in_taken;
  std::vector<Link> links;
  for (const auto& [pair, score] : ordered) {
    if (out_taken.count(pair.first) || in_taken.count(pair.second)) continue;
    out_taken.insert(pair.first);
    in_taken.insert(pair.second);
    links.push_back(make_link(pair.first, pair.second));
  }
  std::sort(links.begin(), links.end());
  return links;
}

// ---------------------------------------------------------------------------
// Union-Find grouping
// ---------------------------------------------------------------------------

/// Connected components of the link graph; isolated ids become singletons.
/// Groups come back sorted by their smallest member.
inline std::vector<std::vector<Id>> group_lines(const std::vector<Link>& links,
                                                const std::vector<Id>& ids) {
  std::unordered_map<Id, Id> parent;
  parent.reserve(ids.size());
  for (Id id : ids) parent[id] = id;
  auto find = [&](Id x) {
    auto it = parent.find(x);
    if (it == parent.end()) {
      throw validation_error("group_lines: link references unknown id " + std::to_string(x));
    }
    while (it->second != x) {
      x = it->second;
      it = parent.find(x);
    }
    return x;
  };
  for (const auto& link : links) {
    const Id ra = find(link.a);
    const Id rb = find(link.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  std::map<Id, std::vector<Id>> by_root;
  for (Id id : ids) by_root[find(id)].push_back(id);
  std::vector<std::vector<Id>> groups;
  groups.reserve(by_root.size());
  for (auto& [root, members] : by_root) {
    std::sort(members.begin(), members.end());
    groups.push_back(std::move(members));
  }
  return groups;
}

// ---------------------------------------------------------------------------
// In-region ordering and role voting
// ---------------------------------------------------------------------------

/// Orders a grouped id set by following successor edges when they form a
/// simple path across the whole group; any other shape (cycles, forks,
/// broken chains) falls back to a (page, top-y, left-x) sort.
inline std::vector<Id> order_within_region(
    const std::vector<Id>& group, const ChainDecodeResult& succ,
    const std::unordered_map<Id, const TextLine*>& lines) {
  if (group.size() <= 1) return group;

  std::unordered_set<Id> members(group.begin(), group.end());
  std::unordered_map<Id, Id> next;
  std::unordered_map<Id, int> indegree;
  for (const auto& e : succ.edges) {
    if (!members.count(e.from) || !members.count(e.to) || e.from == e.to) continue;
    next[e.from] = e.to;
    ++indegree[e.to];
  }

  std::optional<Id> head;
  bool simple = true;
  for (Id id : group) {
    if (indegree[id] == 0) {
      if (head) simple = false;
      head = id;
    } else if (indegree[id] != 1) {
      simple = false;
    }
  }
  if (simple && head) {
    std::vector<Id> ordered;
    std::unordered_set<Id> visited;
    Id cur = *head;
    while (visited.insert(cur).second) {
      ordered.push_back(cur);
      auto it = next.find(cur);
      if (it == next.end()) break;
      cur = it->second;
    }
    if (ordered.size() == group.size()) return ordered;
  }

  std::vector<Id> sorted(group.begin(), group.end());
  std::sort(sorted.begin(), sorted.end(), [&](Id a, Id b) {
    const TextLine* la = lines.at(a);
    const TextLine* lb = lines.at(b);
    if (la->page != lb->page) return la->page < lb->page;
    if (la->bbox.y1 != lb->bbox.y1) return la->bbox.y1 < lb->bbox.y1;
    if (la->bbox.x1 != lb->bbox.x1) return la->bbox.x1 < lb->bbox.x1;
    return a < b;
  });
  return sorted;
}

/// Plurality vote over constituent line roles. Among tied roles the one
/// appearing earliest in region order wins.
inline LogicalRole vote_role(const std::vector<LogicalRole>& line_roles) {
  if (line_roles.empty()) throw validation_error("vote_role: empty region");
  std::array<int, kRoleCount> counts{};
  std::array<int, kRoleCount> first_seen{};
  first_seen.fill(-1);
  for (std::size_t i = 0; i < line_roles.size(); ++i) {
    const auto r = static_cast<std::size_t>(line_roles[i]);
    ++counts[r];
    if (first_seen[r] < 0) first_seen[r] = static_cast<int>(i);
  }
  std::size_t best = static_cast<std::size_t>(line_roles.front());
  for (std::size_t r = 0; r < kRoleCount; ++r) {
    if (counts[r] == 0) continue;
    if (counts[r] > counts[best] ||
        (counts[r] == counts[best] && first_seen[r] < first_seen[best])) {
      best = r;
    }
  }
  return static_cast<LogicalRole>(best);
}

// ---------------------------------------------------------------------------
// Region assembly
// ---------------------------------------------------------------------------

/// Text-lines that participate in text-region detection: lines whose bbox
/// center falls inside a graphical object's box belong to that object and
/// are excluded.
inline std::vector<TextLine> eligible_lines(const Document& doc) {
  std::vector<TextLine> out;
  out.reserve(doc.lines.size());
  for (const auto& line : doc.lines) {
    bool inside = false;
    for (const auto& g : doc.graphics) {
      if (g.page == line.page && g.bbox.contains(line.bbox.center_x(), line.bbox.center_y())) {
        inside = true;
        break;
      }
    }
    if (!inside) out.push_back(line);
  }
  return out;
}

inline std::vector<PlacedElement> placed_elements(const std::vector<TextLine>& lines) {
  std::vector<PlacedElement> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back({l.id, l.bbox, l.page});
  return out;
}

/// Canonical region id: the smallest member element id. Stable across
/// decoders, so two runs that find the same memberships name them alike.
inline Id region_id_for(const std::vector<Id>& members) {
  return *std::min_element(members.begin(), members.end());
}

/// Sort key that places regions in page order by their leading member.
struct RegionOrderKey {
  int page = 0;
  double y = 0.0;
  double x = 0.0;
  Id id = 0;

  friend auto operator<=>(const RegionOrderKey&, const RegionOrderKey&) = default;
};

inline RegionOrderKey region_order_key(const Region& region, const Document& doc) {
  if (region.is_graphical()) {
    const GraphicalObject* g = doc.find_graphic(*region.graphic);
    if (!g) throw validation_error("region " + std::to_string(region.id) +
                                   " references unknown graphic");
    return {g->page, g->bbox.y1, g->bbox.x1, region.id};
  }
  const TextLine* first = doc.find_line(region.lines.front());
  if (!first) throw validation_error("region " + std::to_string(region.id) +
                                     " references unknown line");
  return {first->page, first->bbox.y1, first->bbox.x1, region.id};
}

/// Runs the whole region-detection decode: fuse both directional heads,
/// group lines into regions, order each region, vote its role, and append
/// one region per graphical object. Matrices must cover exactly the
/// eligible lines.
inline std::vector<Region> build_regions(const Document& doc, const ScoreMatrix& succ_m,
                                         const ScoreMatrix& pred_m,
                                         const RoleScores& role_scores) {
  const std::vector<TextLine> lines = eligible_lines(doc);
  std::vector<Id> line_ids;
  line_ids.reserve(lines.size());
  std::unordered_map<Id, const TextLine*> by_id;
  for (const auto& l : lines) {
    line_ids.push_back(l.id);
    by_id[l.id] = &l;
  }

  auto check_coverage = [&](const ScoreMatrix& m) {
    std::vector<Id> a = m.ids;
    std::vector<Id> b = line_ids;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) {
      throw validation_error("score matrix '" + m.kind +
                             "' does not cover the eligible text-lines");
    }
  };
  check_coverage(succ_m);
  check_coverage(pred_m);

  const ChainDecodeResult succ = decode_succ(succ_m);
  const ChainDecodeResult pred = decode_succ(pred_m);
  const std::vector<Link> links = fuse_bidirectional(succ, pred);
  const std::vector<std::vector<Id>> groups = group_lines(links, line_ids);

  std::vector<Region> regions;
  regions.reserve(groups.size() + doc.graphics.size());
  for (const auto& group : groups) {
    Region region;
    region.lines = order_within_region(group, succ, by_id);
    region.id = region_id_for(region.lines);
    std::vector<LogicalRole> roles;
    roles.reserve(region.lines.size());
    region.bbox = by_id.at(region.lines.front())->bbox;
    for (Id lid : region.lines) {
      roles.push_back(role_scores.argmax_role(lid));
      region.bbox = union_bbox(region.bbox, by_id.at(lid)->bbox);
    }
    region.role = vote_role(roles);
    regions.push_back(std::move(region));
  }
  for (const auto& g : doc.graphics) {
    Region region;
    region.id = g.id;
    region.role = role_for_graphic(g.cls);
    region.graphic = g.id;
    region.bbox = g.bbox;
    regions.push_back(std::move(region));
  }

  // Canonical ids are monotone in document order, so this is both
  // deterministic and stable across decoders that agree on memberships.
  std::sort(regions.begin(), regions.end(),
            [](const Region& a, const Region& b) { return a.id < b.id; });
  return regions;
}

}  // namespace docstruct
