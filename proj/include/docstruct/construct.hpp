#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "docstruct/model.hpp"
#include "docstruct/order.hpp"
#include "docstruct/scoring.hpp"

namespace docstruct {

/// Nodes from ROOT down through last children to the deepest rightmost node:
/// the only legal insertion frontier.
inline std::vector<Id> rightmost_path(const TocTree& t) {
  std::vector<Id> path{t.id};
  const TocNode* cur = &t;
  while (!cur->children.empty()) {
    cur = &cur->children.back();
    path.push_back(cur->id);
  }
  return path;
}

/// Inserts one heading: scores every rightmost-path node as a parent,
/// pairs it with the sibling that attachment would imply (the node's current
/// last child, or the heading itself when there is none), multiplies the two
/// scores and attaches at the argmax. Ties go to the shallowest node.
inline void insert_node(TocTree& t, Id sec, const TocScorePair& scores) {
  std::vector<TocNode*> path;
  TocNode* cur = &t;
  path.push_back(cur);
  while (!cur->children.empty()) {
    cur = &cur->children.back();
    path.push_back(cur);
  }

  double best = -1.0;
  std::size_t best_m = 0;
  for (std::size_t m = 0; m < path.size(); ++m) {
    const double parent_score = scores.parent.at(sec, path[m]->id);
    const Id sibling = m + 1 < path.size() ? path[m + 1]->id : sec;
    const double sibling_score = scores.sibling.at(sec, sibling);
    const double combined = parent_score * sibling_score;
    if (combined > best) {
      best = combined;
      best_m = m;
    }
  }
  path[best_m]->children.push_back(TocNode{sec, {}});
}

/// Serial decoding: insert the headings one by one in reading order. The
/// result's pre-order always equals the insertion order, whatever the scores.
inline TocTree build_toc(const std::vector<Id>& headings, const TocScorePair& scores) {
  TocTree t;
  for (Id sec : headings) insert_node(t, sec, scores);
  return t;
}

/// Builds the full structure tree: the heading tree forms the spine, every
/// other region hangs off the nearest preceding heading in the reading
/// sequence (or ROOT before any heading), and regions linked into a
/// graphical group hang off their object instead.
inline HierarchyTree assemble_hierarchy(const std::vector<Region>& regions,
                                        const OrderResult& order, const TocTree& toc,
                                        const Document& doc) {
  const detail::RegionLookup lookup(regions);
  const std::vector<Id> sequence = reading_sequence(order, regions, doc);

  std::unordered_map<Id, Id> toc_parent;
  std::vector<const TocNode*> stack{&toc};
  while (!stack.empty()) {
    const TocNode* node = stack.back();
    stack.pop_back();
    for (const auto& child : node->children) {
      if (!lookup.by_id.count(child.id)) {
        throw validation_error("heading tree references unknown region " +
                               std::to_string(child.id));
      }
      toc_parent[child.id] = node->id;
      stack.push_back(&child);
    }
  }

  std::unordered_map<Id, Id> hub_of;  // linked member -> graphical object
  for (const auto& g : order.groups) {
    if (g.category != GroupCategory::GraphicalRegion) continue;
    for (std::size_t i = 1; i < g.members.size(); ++i) hub_of[g.members[i]] = g.members.front();
  }

  // Arena representation keeps parents addressable while children grow.
  struct TmpNode {
    Id id;
    std::vector<std::size_t> children;
  };
  std::vector<TmpNode> arena{{kRootId, {}}};
  std::unordered_map<Id, std::size_t> node_of{{kRootId, 0}};
  auto attach = [&](Id id, Id parent) {
    const std::size_t idx = arena.size();
    arena.push_back({id, {}});
    arena[node_of.at(parent)].children.push_back(idx);
    node_of[id] = idx;
  };

  Id current_heading = kRootId;
  for (Id id : sequence) {
    lookup.at(id);  // dangling ids surface here
    if (toc_parent.count(id)) {
      Id parent = toc_parent.at(id);
      if (!node_of.count(parent)) parent = current_heading;  // heading ahead of its parent
      attach(id, parent);
      current_heading = id;
      continue;
    }
    auto hub = hub_of.find(id);
    if (hub != hub_of.end() && node_of.count(hub->second)) {
      attach(id, hub->second);
      continue;
    }
    attach(id, current_heading);
  }

  // Materialize the arena into the value tree.
  auto materialize = [&](auto&& self, std::size_t idx) -> HierarchyNode {
    const TmpNode& tmp = arena[idx];
    HierarchyNode node;
    node.id = tmp.id;
    if (tmp.id == kRootId) {
      node.role = LogicalRole::Other;
    } else {
      const Region& region = lookup.at(tmp.id);
      node.role = region.role;
      node.text = region_text(region, doc);
    }
    node.children.reserve(tmp.children.size());
    for (std::size_t child : tmp.children) node.children.push_back(self(self, child));
    return node;
  };
  return materialize(materialize, 0);
}

}  // namespace docstruct
