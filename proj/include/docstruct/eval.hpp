#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "docstruct/geometry.hpp"
#include "docstruct/model.hpp"
#include "docstruct/order.hpp"

namespace docstruct {

// ---------------------------------------------------------------------------
// Token sequences
// ---------------------------------------------------------------------------

/// Basic evaluation unit: a text-line, a graphical object, or the paragraph
/// boundary marker emitted after each text region.
struct Token {
  enum class Type { Line, Object, ParagraphTag };

  Type type = Type::Line;
  Id id = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

using TokenSequence = std::vector<Token>;

inline Token line_token(Id id) { return {Token::Type::Line, id}; }
inline Token object_token(Id id) { return {Token::Type::Object, id}; }
inline Token paragraph_tag() { return {Token::Type::ParagraphTag, kRootId}; }

/// Expands a reading-order group into its token sequence. Text groups emit
/// each region's lines followed by a paragraph tag; graphical groups emit
/// object ids and linked regions' lines, untagged. `object_remap` renames
/// object ids (used to align predicted objects with their ground-truth
/// counterparts before comparison).
inline TokenSequence tokenize_group(const ReadingOrderGroup& group,
                                    const std::vector<Region>& regions,
                                    const std::unordered_map<Id, Id>* object_remap = nullptr) {
  if (group.members.empty()) throw validation_error("tokenize_group: empty group");
  const detail::RegionLookup lookup(regions);
  TokenSequence out;
  for (Id member : group.members) {
    const Region& region = lookup.at(member);
    if (group.category == GroupCategory::TextRegion) {
      if (region.is_graphical()) {
        throw validation_error("text group contains graphical region " + std::to_string(member));
      }
      for (Id lid : region.lines) out.push_back(line_token(lid));
      out.push_back(paragraph_tag());
    } else if (region.is_graphical()) {
      Id oid = *region.graphic;
      if (object_remap) {
        auto it = object_remap->find(oid);
        if (it != object_remap->end()) oid = it->second;
      }
      out.push_back(object_token(oid));
    } else {
      for (Id lid : region.lines) out.push_back(line_token(lid));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Edit distance and assignment kernels
// ---------------------------------------------------------------------------

/// Unit-cost edit distance between two sequences of equality-comparable
/// elements.
template <typename Seq>
inline std::int64_t levenshtein(const Seq& a, const Seq& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::int64_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<std::int64_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<std::int64_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::int64_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

/// Minimum-cost assignment for a rectangular cost matrix.
struct Assignment {
  std::vector<int> col_of_row;  // -1 for rows left unassigned (only when p > g)
  double total = 0.0;
};

/// Hungarian algorithm (potentials formulation, O(n^2 m)). With p <= g every
/// row is assigned; with p > g every column is, and the extra rows stay
/// unmatched at zero cost.
inline Assignment hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t p = cost.size();
  const std::size_t g = p == 0 ? 0 : cost[0].size();
  for (const auto& row : cost) {
    if (row.size() != g) throw validation_error("hungarian: ragged cost matrix");
    for (double c : row) {
      if (!(c == c) || c == std::numeric_limits<double>::infinity() || c < 0.0) {
        throw validation_error("hungarian: costs must be finite and non-negative");
      }
    }
  }
  if (p == 0 || g == 0) return {std::vector<int>(p, -1), 0.0};

  const bool transposed = p > g;
  const std::size_t n = transposed ? g : p;  // rows of the worked matrix
  const std::size_t m = transposed ? p : g;
  auto at = [&](std::size_t i, std::size_t j) { return transposed ? cost[j][i] : cost[i][j]; };

  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> match(m + 1, 0);  // row matched to column j (1-based)
  std::vector<std::size_t> way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment result;
  result.col_of_row.assign(p, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (match[j] == 0) continue;
    const std::size_t row = transposed ? j - 1 : match[j] - 1;
    const std::size_t col = transposed ? match[j] - 1 : j - 1;
    result.col_of_row[row] = static_cast<int>(col);
    result.total += cost[row][col];
  }
  return result;
}

// ---------------------------------------------------------------------------
// REDS
// ---------------------------------------------------------------------------

struct RedsMatch {
  int pred_index = -1;  // -1: unmatched ground-truth group
  int gt_index = -1;    // -1: unmatched predicted group
  std::int64_t distance = 0;
};

struct RedsReport {
  GroupCategory category = GroupCategory::TextRegion;
  std::int64_t D = 0;
  std::int64_t N = 0;
  double score = 1.0;
  std::vector<RedsMatch> matches;
};

struct RedsResult {
  RedsReport text;
  RedsReport graphical;
};

/// Greedy IoU matching of predicted graphical objects onto ground-truth
/// ones; pairs below the threshold stay unmatched and are renamed to fresh
/// ids, so their tokens can never compare equal.
inline std::unordered_map<Id, Id> match_graphics(const std::vector<Region>& pred_regions,
                                                 const std::vector<Region>& gt_regions,
                                                 double iou_threshold = 0.5) {
  struct Candidate {
    double overlap;
    Id pred;
    Id gt;
  };
  std::vector<Candidate> candidates;
  for (const auto& p : pred_regions) {
    if (!p.is_graphical()) continue;
    for (const auto& t : gt_regions) {
      if (!t.is_graphical()) continue;
      const double overlap = iou(p.bbox, t.bbox);
      if (overlap >= iou_threshold) candidates.push_back({overlap, *p.graphic, *t.graphic});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.gt < b.gt;
  });
  std::unordered_map<Id, Id> remap;
  std::unordered_map<Id, Id> taken_gt;
  for (const auto& c : candidates) {
    if (remap.count(c.pred) || taken_gt.count(c.gt)) continue;
    remap[c.pred] = c.gt;
    taken_gt[c.gt] = c.pred;
  }
  Id fresh = -2;
  for (const auto& p : pred_regions) {
    if (!p.is_graphical()) continue;
    if (!remap.count(*p.graphic)) remap[*p.graphic] = fresh--;
  }
  return remap;
}

namespace detail {

inline RedsReport reds_category(GroupCategory category,
                                const std::vector<TokenSequence>& pred,
                                const std::vector<TokenSequence>& gt) {
  RedsReport report;
  report.category = category;
  for (const auto& seq : gt) report.N += static_cast<std::int64_t>(seq.size());

  const std::size_t p = pred.size();
  const std::size_t g = gt.size();
  const std::size_t n = std::max(p, g);
  if (n == 0) {
    report.score = 1.0;
    return report;
  }

  // Square matrix with padding: an unmatched group costs its full length.
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<std::int64_t>> dist(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i < p && j < g) {
        dist[i][j] = levenshtein(pred[i], gt[j]);
      } else if (i < p) {
        dist[i][j] = static_cast<std::int64_t>(pred[i].size());
      } else if (j < g) {
        dist[i][j] = static_cast<std::int64_t>(gt[j].size());
      }
      cost[i][j] = static_cast<double>(dist[i][j]);
    }
  }
  const Assignment assignment = hungarian(cost);
  for (std::size_t i = 0; i < n; ++i) {
    const int j = assignment.col_of_row[i];
    report.D += dist[i][j];
    RedsMatch match;
    match.pred_index = i < p ? static_cast<int>(i) : -1;
    match.gt_index = static_cast<std::size_t>(j) < g ? j : -1;
    match.distance = dist[i][j];
    if (match.pred_index >= 0 || match.gt_index >= 0) report.matches.push_back(match);
  }

  if (report.N == 0) {
    report.score = report.D == 0 ? 1.0 : 0.0;
  } else {
    report.score = std::max(0.0, 1.0 - static_cast<double>(report.D) /
                                           static_cast<double>(report.N));
  }
  return report;
}

}  // namespace detail

/// Reading edit distance score per category: Hungarian-matched Levenshtein
/// distances between predicted and ground-truth groups, normalized by the
/// ground-truth token count and clamped at zero.
inline RedsResult reds(const std::vector<Region>& pred_regions,
                       const std::vector<ReadingOrderGroup>& pred_groups,
                       const std::vector<Region>& gt_regions,
                       const std::vector<ReadingOrderGroup>& gt_groups,
                       double iou_threshold = 0.5) {
  const auto remap = match_graphics(pred_regions, gt_regions, iou_threshold);

  RedsResult result;
  for (GroupCategory category : {GroupCategory::TextRegion, GroupCategory::GraphicalRegion}) {
    std::vector<TokenSequence> pred, gt;
    for (const auto& group : pred_groups) {
      if (group.category == category) {
        pred.push_back(tokenize_group(group, pred_regions, &remap));
      }
    }
    for (const auto& group : gt_groups) {
      if (group.category == category) gt.push_back(tokenize_group(group, gt_regions));
    }
    auto report = detail::reds_category(category, pred, gt);
    (category == GroupCategory::TextRegion ? result.text : result.graphical) = std::move(report);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Ordered-tree edit distance
// ---------------------------------------------------------------------------

namespace detail {

template <typename Node>
struct FlatTree {
  std::vector<const Node*> post;  // postorder
  std::vector<int> lml;           // leftmost leaf of each subtree
  std::vector<int> keyroots;

  explicit FlatTree(const Node& root) {
    walk(root);
    std::unordered_map<int, int> last_with_lml;
    for (int i = 0; i < static_cast<int>(post.size()); ++i) last_with_lml[lml[i]] = i;
    for (const auto& [leaf, idx] : last_with_lml) keyroots.push_back(idx);
    std::sort(keyroots.begin(), keyroots.end());
  }

 private:
  int walk(const Node& n) {
    int first_leaf = -1;
    for (const auto& child : n.children) {
      const int ci = walk(child);
      if (first_leaf < 0) first_leaf = lml[ci];
    }
    post.push_back(&n);
    const int idx = static_cast<int>(post.size()) - 1;
    lml.push_back(n.children.empty() ? idx : first_leaf);
    return idx;
  }
};

}  // namespace detail

/// Exact ordered-tree edit distance (keyroot/forest dynamic program).
/// Insertions and deletions cost 1; substitution cost comes from `node_cost`
/// and is expected to lie in [0, 1].
template <typename Node, typename CostFn>
inline double tree_edit_distance(const Node& a, const Node& b, CostFn node_cost) {
  const detail::FlatTree<Node> ta(a);
  const detail::FlatTree<Node> tb(b);
  const int n1 = static_cast<int>(ta.post.size());
  const int n2 = static_cast<int>(tb.post.size());
  std::vector<std::vector<double>> td(n1, std::vector<double>(n2, 0.0));

  for (int i : ta.keyroots) {
    for (int j : tb.keyroots) {
      const int li = ta.lml[i];
      const int lj = tb.lml[j];
      const int rows = i - li + 2;
      const int cols = j - lj + 2;
      std::vector<std::vector<double>> fd(rows, std::vector<double>(cols, 0.0));
      for (int x = 1; x < rows; ++x) fd[x][0] = fd[x - 1][0] + 1.0;
      for (int y = 1; y < cols; ++y) fd[0][y] = fd[0][y - 1] + 1.0;
      for (int x = li; x <= i; ++x) {
        for (int y = lj; y <= j; ++y) {
          const int X = x - li + 1;
          const int Y = y - lj + 1;
          if (ta.lml[x] == li && tb.lml[y] == lj) {
            fd[X][Y] = std::min({fd[X - 1][Y] + 1.0, fd[X][Y - 1] + 1.0,
                                 fd[X - 1][Y - 1] + node_cost(*ta.post[x], *tb.post[y])});
            td[x][y] = fd[X][Y];
          } else {
            fd[X][Y] = std::min({fd[X - 1][Y] + 1.0, fd[X][Y - 1] + 1.0,
                                 fd[ta.lml[x] - li][tb.lml[y] - lj] + td[x][y]});
          }
        }
      }
    }
  }
  return td[n1 - 1][n2 - 1];
}

// ---------------------------------------------------------------------------
// STEDS
// ---------------------------------------------------------------------------

/// Similarity of two text payloads: 1 minus the normalized character edit
/// distance (1.0 when both are empty).
inline double normalized_text_similarity(const std::string& a, const std::string& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

/// Substitution cost between structure-tree nodes: payload dissimilarity
/// when the roles agree, full cost when they do not.
inline double steds_node_cost(const HierarchyNode& x, const HierarchyNode& y) {
  if (x.id == kRootId && y.id == kRootId) return 0.0;
  if (x.role != y.role) return 1.0;
  return 1.0 - normalized_text_similarity(x.text, y.text);
}

/// Semantic tree edit distance similarity between two structure trees.
inline double steds(const HierarchyNode& pred, const HierarchyNode& gt) {
  const std::size_t np = tree_size(pred);
  const std::size_t ng = tree_size(gt);
  const std::size_t n = std::max(np, ng);
  if (n == 0) return 1.0;
  const double ted = tree_edit_distance(pred, gt, steds_node_cost);
  return std::clamp(1.0 - ted / static_cast<double>(n), 0.0, 1.0);
}

/// Per-document scores with micro (size-weighted) and macro aggregates.
struct StedsReport {
  std::vector<double> per_document;
  std::vector<std::size_t> weights;
  double micro = 1.0;
  double macro = 1.0;

  void add(double score, std::size_t weight) {
    per_document.push_back(score);
    weights.push_back(weight);
  }

  void finalize() {
    if (per_document.empty()) {
      micro = macro = 1.0;
      return;
    }
    double weighted = 0.0, total_weight = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < per_document.size(); ++i) {
      weighted += per_document[i] * static_cast<double>(weights[i]);
      total_weight += static_cast<double>(weights[i]);
      sum += per_document[i];
    }
    micro = total_weight > 0.0 ? weighted / total_weight : 1.0;
    macro = sum / static_cast<double>(per_document.size());
  }
};

/// Pairs a bare heading tree with payloads drawn from the matching
/// structure tree, so it can be scored with the same node costs.
inline HierarchyNode toc_with_payloads(const TocNode& toc, const HierarchyNode& hierarchy) {
  std::unordered_map<Id, const HierarchyNode*> by_id;
  std::vector<const HierarchyNode*> stack{&hierarchy};
  while (!stack.empty()) {
    const HierarchyNode* node = stack.back();
    stack.pop_back();
    by_id[node->id] = node;
    for (const auto& child : node->children) stack.push_back(&child);
  }
  auto convert = [&](auto&& self, const TocNode& node) -> HierarchyNode {
    HierarchyNode out;
    out.id = node.id;
    if (node.id != kRootId) {
      auto it = by_id.find(node.id);
      if (it == by_id.end()) {
        throw validation_error("heading tree references region " + std::to_string(node.id) +
                               " absent from the structure tree");
      }
      out.role = it->second->role;
      out.text = it->second->text;
    }
    out.children.reserve(node.children.size());
    for (const auto& child : node.children) out.children.push_back(self(self, child));
    return out;
  };
  return convert(convert, toc);
}

}  // namespace docstruct
