#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "docstruct/geometry.hpp"
#include "docstruct/model.hpp"

namespace docstruct {

// ---------------------------------------------------------------------------
// Score kinds and softmax
// ---------------------------------------------------------------------------

enum class ScorerKind {
  IntraSucc,
  IntraPred,
  InterSucc,
  InterRelationType,
  TocParent,
  TocSibling,
  Role,
};

inline constexpr std::array<std::string_view, 7> kScorerKindNames = {
    "intra-succ", "intra-pred",  "inter-succ", "inter-relation-type",
    "toc-parent", "toc-sibling", "role"};

inline std::string_view to_string(ScorerKind k) {
  return kScorerKindNames[static_cast<std::size_t>(k)];
}

using Mask = std::vector<std::vector<bool>>;

/// Numerically stable per-row softmax. Masked-out entries are excluded from
/// the normalization and come back as exact zeros. A fully masked row is an
/// error: there is nothing left to normalize.
inline std::vector<std::vector<double>> row_softmax(
    const std::vector<std::vector<double>>& raw, const Mask* mask = nullptr) {
  std::vector<std::vector<double>> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& row = raw[i];
    out[i].assign(row.size(), 0.0);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (mask && !(*mask)[i][j]) continue;
      mx = std::max(mx, row[j]);
    }
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw validation_error("row_softmax: row " + std::to_string(i) + " is fully masked");
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (mask && !(*mask)[i][j]) continue;
      out[i][j] = std::exp(row[j] - mx);
      denom += out[i][j];
    }
    for (std::size_t j = 0; j < row.size(); ++j) out[i][j] /= denom;
  }
  return out;
}

/// Softmax raw logits into a validated ScoreMatrix.
inline ScoreMatrix softmax_scores(std::string kind, std::vector<Id> ids,
                                  const std::vector<std::vector<double>>& raw,
                                  const Mask* mask = nullptr) {
  ScoreMatrix m{std::move(kind), std::move(ids), row_softmax(raw, mask)};
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Per-line role scores
// ---------------------------------------------------------------------------

struct RoleScores {
  std::vector<Id> ids;
  std::vector<std::array<double, kRoleCount>> rows;

  std::optional<std::size_t> index_of(Id id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == id) return i;
    }
    return std::nullopt;
  }

  LogicalRole argmax_role(Id id) const {
    auto i = index_of(id);
    if (!i) throw validation_error("role scores: no entry for element " + std::to_string(id));
    const auto& row = rows[*i];
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (row[j] > row[best]) best = j;
    }
    return static_cast<LogicalRole>(best);
  }

  void validate() const {
    if (rows.size() != ids.size()) {
      throw validation_error("role scores: " + std::to_string(rows.size()) + " rows for " +
                             std::to_string(ids.size()) + " ids");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double sum = 0.0;
      for (double v : rows[i]) {
        if (!(v == v) || v < 0.0) {
          throw validation_error("role scores: bad entry in row " + std::to_string(i));
        }
        sum += v;
      }
      if (sum < 1.0 - 1e-6 || sum > 1.0 + 1e-6) {
        throw validation_error("role scores: row " + std::to_string(i) + " sums to " +
                               std::to_string(sum));
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Relation-type distributions
// ---------------------------------------------------------------------------

enum class RelationTypeClass { TextRegionOrder, GraphicalRegionLink, None };

inline constexpr std::array<std::string_view, 3> kRelationTypeNames = {
    "text-region-order", "graphical-region-link", "none"};

inline std::string_view to_string(RelationTypeClass c) {
  return kRelationTypeNames[static_cast<std::size_t>(c)];
}

inline RelationTypeClass relation_type_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRelationTypeNames.size(); ++i) {
    if (kRelationTypeNames[i] == name) return static_cast<RelationTypeClass>(i);
  }
  throw io_error("unknown relation type: '" + std::string(name) + "'");
}

/// Per ordered pair (from, to): a probability distribution over
/// {text-region-order, graphical-region-link, none}.
struct RelationTypeDistribution {
  std::vector<Id> ids;
  std::vector<std::array<double, 3>> probs;  // row-major over ordered pairs

  std::optional<std::size_t> index_of(Id id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == id) return i;
    }
    return std::nullopt;
  }

  const std::array<double, 3>& pair(Id from, Id to) const {
    auto i = index_of(from);
    auto j = index_of(to);
    if (!i || !j) {
      throw validation_error("relation-type distribution has no entry for pair (" +
                             std::to_string(from) + ", " + std::to_string(to) + ")");
    }
    return probs[*i * ids.size() + *j];
  }

  void validate() const {
    if (probs.size() != ids.size() * ids.size()) {
      throw validation_error("relation-type distribution: wrong number of pairs");
    }
    for (const auto& p : probs) {
      const double sum = p[0] + p[1] + p[2];
      if (sum < 1.0 - 1e-6 || sum > 1.0 + 1e-6) {
        throw validation_error("relation-type distribution: pair does not sum to 1");
      }
    }
  }
};

/// Parent and sibling score matrices for the heading-tree decoder.
/// The parent matrix is square over [ROOT, headings...] with ROOT at index 0
/// (its own row is a self one-hot and is never consulted); the sibling
/// matrix is square over the headings, the self column meaning
/// "no left sibling".
struct TocScorePair {
  ScoreMatrix parent;
  ScoreMatrix sibling;
};

// ---------------------------------------------------------------------------
// Column layout
// ---------------------------------------------------------------------------

/// An element placed on a page; the unit the geometric heuristics reason on.
struct PlacedElement {
  Id id = 0;
  BBox bbox;
  int page = 0;
};

struct HeuristicParams {
  /// Horizontal overlap (relative to the narrower interval) required to put
  /// two elements in the same column.
  double column_overlap_ratio = 0.5;
  /// Maximum vertical gap, in mean line heights, for a same-column successor.
  double succ_gap_ratio = 0.55;
  /// Fraction of the column width an element must span for a chain to
  /// continue across a column or page boundary through it.
  double full_width_ratio = 0.8;
};

/// Per-page column clustering of elements by horizontal-interval overlap.
struct ColumnLayout {
  struct Column {
    int page = 0;
    double x1 = 0.0;
    double x2 = 0.0;
    std::vector<std::size_t> order;  // element indices, top to bottom
  };

  std::vector<Column> columns;       // sorted by (page, x1)
  std::vector<int> column_of;        // element index -> column index
  std::vector<int> rank_in_column;   // element index -> position within column

  double column_width(std::size_t c) const { return columns[c].x2 - columns[c].x1; }
};

inline ColumnLayout detect_columns(const std::vector<PlacedElement>& elems,
                                   double overlap_ratio = 0.5) {
  const std::size_t n = elems.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (elems[i].page != elems[j].page) continue;
      const double overlap = std::min(elems[i].bbox.x2, elems[j].bbox.x2) -
                             std::max(elems[i].bbox.x1, elems[j].bbox.x1);
      const double narrower = std::min(elems[i].bbox.width(), elems[j].bbox.width());
      if (narrower <= 0.0) continue;
      if (overlap / narrower >= overlap_ratio) parent[find(i)] = find(j);
    }
  }

  std::unordered_map<std::size_t, std::size_t> root_to_col;
  ColumnLayout layout;
  layout.column_of.assign(n, -1);
  layout.rank_in_column.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    auto it = root_to_col.find(root);
    if (it == root_to_col.end()) {
      it = root_to_col.emplace(root, layout.columns.size()).first;
      layout.columns.push_back({elems[i].page, elems[i].bbox.x1, elems[i].bbox.x2, {}});
    }
    auto& col = layout.columns[it->second];
    col.x1 = std::min(col.x1, elems[i].bbox.x1);
    col.x2 = std::max(col.x2, elems[i].bbox.x2);
    col.order.push_back(i);
  }

  std::vector<std::size_t> by_pos(layout.columns.size());
  std::iota(by_pos.begin(), by_pos.end(), 0);
  std::sort(by_pos.begin(), by_pos.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = layout.columns[a];
    const auto& cb = layout.columns[b];
    if (ca.page != cb.page) return ca.page < cb.page;
    if (ca.x1 != cb.x1) return ca.x1 < cb.x1;
    return ca.x2 < cb.x2;
  });
  std::vector<ColumnLayout::Column> sorted;
  sorted.reserve(layout.columns.size());
  for (std::size_t c : by_pos) sorted.push_back(std::move(layout.columns[c]));
  layout.columns = std::move(sorted);

  for (std::size_t c = 0; c < layout.columns.size(); ++c) {
    auto& col = layout.columns[c];
    std::sort(col.order.begin(), col.order.end(), [&](std::size_t a, std::size_t b) {
      if (elems[a].bbox.y1 != elems[b].bbox.y1) return elems[a].bbox.y1 < elems[b].bbox.y1;
      if (elems[a].bbox.x1 != elems[b].bbox.x1) return elems[a].bbox.x1 < elems[b].bbox.x1;
      return elems[a].id < elems[b].id;
    });
    for (std::size_t r = 0; r < col.order.size(); ++r) {
      layout.column_of[col.order[r]] = static_cast<int>(c);
      layout.rank_in_column[col.order[r]] = static_cast<int>(r);
    }
  }
  return layout;
}

// ---------------------------------------------------------------------------
// Geometric succession heuristic
// ---------------------------------------------------------------------------

namespace detail {

/// Shared body of the succ/pred heuristics. `forward` scans down the column
/// flow; the pred scorer runs the same rules against the flow reversed.
inline ScoreMatrix directional_flow_scores(const std::vector<PlacedElement>& elems,
                                           const HeuristicParams& params, bool forward,
                                           std::string kind) {
  const std::size_t n = elems.size();
  std::vector<Id> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = elems[i].id;

  const ColumnLayout layout = detect_columns(elems, params.column_overlap_ratio);
  std::vector<std::vector<double>> raw(n, std::vector<double>(n, 0.0));
  Mask mask(n, std::vector<bool>(n, false));

  auto spans_column = [&](std::size_t e) {
    const double cw = layout.column_width(layout.column_of[e]);
    return cw > 0.0 && elems[e].bbox.width() >= params.full_width_ratio * cw;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const int c = layout.column_of[i];
    const auto& col = layout.columns[c].order;
    const int r = layout.rank_in_column[i];
    bool any = false;

    // Same-column neighbours within the gap threshold. Scores decay with the
    // vertical gap and with how many elements sit in between.
    const int step = forward ? 1 : -1;
    for (int k = r + step; k >= 0 && k < static_cast<int>(col.size()); k += step) {
      const std::size_t j = col[k];
      const double gap = forward ? elems[j].bbox.y1 - elems[i].bbox.y2
                                 : elems[i].bbox.y1 - elems[j].bbox.y2;
      const double h = 0.5 * (elems[i].bbox.height() + elems[j].bbox.height());
      if (h <= 0.0) break;
      if (gap > params.succ_gap_ratio * h) break;
      raw[i][j] = 3.0 - std::max(gap, 0.0) / h - 0.5 * std::abs(k - r - step);
      mask[i][j] = true;
      any = true;
    }

    // Column and page transitions only continue a flow that fills both
    // columns at the boundary: narrow endpoints (heading lines, short
    // closing lines) terminate the chain instead.
    const bool at_edge = forward ? r == static_cast<int>(col.size()) - 1 : r == 0;
    if (!any && at_edge && spans_column(i)) {
      const int next_c = c + (forward ? 1 : -1);
      if (next_c >= 0 && next_c < static_cast<int>(layout.columns.size())) {
        const auto& ncol = layout.columns[next_c];
        const bool page_jump = ncol.page != layout.columns[c].page;
        const std::size_t j = forward ? ncol.order.front() : ncol.order.back();
        if (spans_column(j)) {
          raw[i][j] = page_jump ? 0.0 : 1.0;
          mask[i][j] = true;
          any = true;
        }
      }
    }

    if (!any) {
      raw[i][i] = 0.0;
      mask[i][i] = true;
    }
  }
  return softmax_scores(std::move(kind), std::move(ids), raw, &mask);
}

}  // namespace detail

/// Scores each element's likely follower in the column flow:
/// same-column-below, then next-column-top, then next-page-top. The self
/// column takes all the mass when nothing qualifies.
inline ScoreMatrix heuristic_succ_scores(const std::vector<PlacedElement>& elems,
                                         const HeuristicParams& params = {}) {
  return detail::directional_flow_scores(elems, params, true,
                                         std::string(to_string(ScorerKind::IntraSucc)));
}

/// Mirror of heuristic_succ_scores: the likely element each one follows.
inline ScoreMatrix heuristic_pred_scores(const std::vector<PlacedElement>& elems,
                                         const HeuristicParams& params = {}) {
  return detail::directional_flow_scores(elems, params, false,
                                         std::string(to_string(ScorerKind::IntraPred)));
}

// ---------------------------------------------------------------------------
// Heading depth cues and the heading-tree heuristic
// ---------------------------------------------------------------------------

struct HeadingCue {
  Id id = 0;
  std::string text;
  int depth = 1;
};

/// Depth of a section-numbering prefix: "2.1.3 Title" -> 3. Headings
/// without a recognizable numbering fall back to depth 1.
inline int numbering_depth(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  int depth = 0;
  bool expecting_digits = true;
  std::size_t digits = 0;
  while (pos < text.size()) {
    const char ch = text[pos];
    if (expecting_digits && std::isdigit(static_cast<unsigned char>(ch))) {
      ++digits;
      ++pos;
      continue;
    }
    if (digits > 0 && ch == '.') {
      ++depth;
      digits = 0;
      expecting_digits = true;
      ++pos;
      continue;
    }
    break;
  }
  if (digits > 0) ++depth;
  if (depth == 0) return 1;
  // The numbering must be a standalone token followed by heading text.
  if (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) return 1;
  return depth;
}

/// Indicator-style parent/sibling scores from numbering depth cues:
/// the parent of a heading is the nearest preceding heading one level up,
/// its left sibling the nearest preceding heading of equal depth under the
/// same parent.
inline TocScorePair heuristic_toc_scores(const std::vector<HeadingCue>& headings) {
  const std::size_t k = headings.size();

  std::vector<Id> parent_choice(k, kRootId);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j-- > 0;) {
      if (headings[j].depth == headings[i].depth - 1) {
        parent_choice[i] = headings[j].id;
        break;
      }
      // Numbering jumps (e.g. depth 1 -> depth 3) attach to the nearest
      // shallower heading instead of dangling.
      if (headings[j].depth < headings[i].depth) {
        parent_choice[i] = headings[j].id;
        break;
      }
    }
  }
  std::vector<Id> sibling_choice(k);
  for (std::size_t i = 0; i < k; ++i) {
    sibling_choice[i] = headings[i].id;  // self = no left sibling
    for (std::size_t j = i; j-- > 0;) {
      if (headings[j].depth == headings[i].depth && parent_choice[j] == parent_choice[i]) {
        sibling_choice[i] = headings[j].id;
        break;
      }
    }
  }

  TocScorePair out;
  out.parent.kind = std::string(to_string(ScorerKind::TocParent));
  out.parent.ids.push_back(kRootId);
  for (const auto& h : headings) out.parent.ids.push_back(h.id);
  const std::size_t np = k + 1;
  out.parent.rows.assign(np, std::vector<double>(np, 0.0));
  out.parent.rows[0][0] = 1.0;  // ROOT row, never consulted
  for (std::size_t i = 0; i < k; ++i) {
    const auto col = out.parent.index_of(parent_choice[i]);
    out.parent.rows[i + 1][*col] = 1.0;
  }
  out.parent.validate();

  out.sibling.kind = std::string(to_string(ScorerKind::TocSibling));
  for (const auto& h : headings) out.sibling.ids.push_back(h.id);
  out.sibling.rows.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    const auto col = out.sibling.index_of(sibling_choice[i]);
    out.sibling.rows[i][*col] = 1.0;
  }
  out.sibling.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Score-matrix files
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("failed to parse '" + path + "': " + e.what());
  }
  return j;
}

inline void write_json_file(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline void check_matrix_entries(const std::vector<std::vector<double>>& rows,
                                 std::size_t cols, const std::string& path) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw io_error("'" + path + "': row " + std::to_string(i) + " has " +
                     std::to_string(rows[i].size()) + " entries, expected " +
                     std::to_string(cols));
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (!std::isfinite(rows[i][j])) {
        throw io_error("'" + path + "': non-finite entry at (" + std::to_string(i) + ", " +
                       std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace detail

inline void store_scores(const ScoreMatrix& m, const std::string& path) {
  nlohmann::ordered_json j;
  j["kind"] = m.kind;
  j["ids"] = m.ids;
  j["rows"] = m.rows;
  detail::write_json_file(j, path);
}

inline ScoreMatrix load_scores(const std::string& path) {
  const auto j = detail::read_json_file(path);
  ScoreMatrix m;
  try {
    m.kind = j.at("kind").get<std::string>();
    m.ids = j.at("ids").get<std::vector<Id>>();
    m.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw io_error("'" + path + "': " + e.what());
  }
  if (m.rows.size() != m.ids.size()) {
    throw io_error("'" + path + "': " + std::to_string(m.rows.size()) + " rows for " +
                   std::to_string(m.ids.size()) + " ids");
  }
  detail::check_matrix_entries(m.rows, m.ids.size(), path);
  try {
    m.validate();
  } catch (const validation_error& e) {
    throw io_error("'" + path + "': " + e.what());
  }
  return m;
}

inline void store_role_scores(const RoleScores& r, const std::string& path) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(ScorerKind::Role);
  j["ids"] = r.ids;
  j["classes"] = kRoleNames;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) rows.push_back(row);
  j["rows"] = std::move(rows);
  detail::write_json_file(j, path);
}

inline RoleScores load_role_scores(const std::string& path) {
  const auto j = detail::read_json_file(path);
  RoleScores r;
  try {
    r.ids = j.at("ids").get<std::vector<Id>>();
    for (const auto& row : j.at("rows")) {
      if (row.size() != kRoleCount) {
        throw io_error("'" + path + "': role row with " + std::to_string(row.size()) +
                       " entries, expected " + std::to_string(kRoleCount));
      }
      r.rows.push_back(row.get<std::array<double, kRoleCount>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw io_error("'" + path + "': " + e.what());
  }
  try {
    r.validate();
  } catch (const validation_error& e) {
    throw io_error("'" + path + "': " + e.what());
  }
  return r;
}

inline void store_relation_types(const RelationTypeDistribution& d, const std::string& path) {
  const std::size_t n = d.ids.size();
  nlohmann::ordered_json j;
  j["kind"] = to_string(ScorerKind::InterRelationType);
  j["ids"] = d.ids;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  nlohmann::ordered_json labels = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < n; ++i) {
    nlohmann::ordered_json prow = nlohmann::ordered_json::array();
    nlohmann::ordered_json lrow = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = d.probs[i * n + k];
      const std::size_t arg = std::distance(p.begin(), std::max_element(p.begin(), p.end()));
      prow.push_back(p[arg]);
      lrow.push_back(kRelationTypeNames[arg]);
    }
    rows.push_back(std::move(prow));
    labels.push_back(std::move(lrow));
  }
  j["rows"] = std::move(rows);
  j["labels"] = std::move(labels);
  detail::write_json_file(j, path);
}

inline RelationTypeDistribution load_relation_types(const std::string& path) {
  const auto j = detail::read_json_file(path);
  RelationTypeDistribution d;
  try {
    d.ids = j.at("ids").get<std::vector<Id>>();
    const auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
    const auto labels = j.at("labels").get<std::vector<std::vector<std::string>>>();
    const std::size_t n = d.ids.size();
    if (rows.size() != n || labels.size() != n) {
      throw io_error("'" + path + "': rows/labels shape mismatch");
    }
    detail::check_matrix_entries(rows, n, path);
    d.probs.assign(n * n, {0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i].size() != n) throw io_error("'" + path + "': labels shape mismatch");
      for (std::size_t k = 0; k < n; ++k) {
        const auto cls = relation_type_from_name(labels[i][k]);
        const double p = rows[i][k];
        if (p < 0.0 || p > 1.0) {
          throw io_error("'" + path + "': probability out of range at (" + std::to_string(i) +
                         ", " + std::to_string(k) + ")");
        }
        auto& cell = d.probs[i * n + k];
        cell.fill((1.0 - p) / 2.0);
        cell[static_cast<std::size_t>(cls)] = p;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw io_error("'" + path + "': " + e.what());
  }
  d.validate();
  return d;
}

}  // namespace docstruct
