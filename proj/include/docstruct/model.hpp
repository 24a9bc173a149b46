#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace docstruct {

using Id = std::int64_t;

/// Sentinel node id used as the root of TOC and hierarchy trees.
/// Element ids are non-negative, so -1 can never collide.
inline constexpr Id kRootId = -1;

/// Raised for malformed files and schema violations (maps to CLI exit 2).
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised for inputs that parse but violate a documented contract
/// (maps to CLI exit 1).
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Page geometry
// ---------------------------------------------------------------------------

/// Axis-aligned box in page pixels, origin at the top-left corner.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  bool valid() const { return x1 <= x2 && y1 <= y2; }
  bool contains(double px, double py) const {
    return px >= x1 && px <= x2 && py >= y1 && py <= y2;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

// ---------------------------------------------------------------------------
// Atomic page elements
// ---------------------------------------------------------------------------

struct TextLine {
  Id id = 0;
  int page = 0;
  BBox bbox;
  std::string text;

  friend bool operator==(const TextLine&, const TextLine&) = default;
};

enum class GraphicClass { Table, Figure, EquationBlock, Other };

inline constexpr std::array<std::string_view, 4> kGraphicClassNames = {
    "table", "figure", "equation-block", "other"};

inline std::string_view to_string(GraphicClass c) {
  return kGraphicClassNames[static_cast<std::size_t>(c)];
}

inline GraphicClass graphic_class_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kGraphicClassNames.size(); ++i) {
    if (kGraphicClassNames[i] == name) return static_cast<GraphicClass>(i);
  }
  throw io_error("unknown graphic class: '" + std::string(name) + "'");
}

struct GraphicalObject {
  Id id = 0;
  int page = 0;
  BBox bbox;
  GraphicClass cls = GraphicClass::Figure;

  friend bool operator==(const GraphicalObject&, const GraphicalObject&) = default;
};

enum class LogicalRole {
  Title,
  Author,
  Mail,
  Affiliation,
  Section,
  Paragraph,
  Caption,
  Footnote,
  Header,
  Footer,
  Table,
  Figure,
  Equation,
  Other,
};

inline constexpr std::size_t kRoleCount = 14;

inline constexpr std::array<std::string_view, kRoleCount> kRoleNames = {
    "title",  "author",   "mail",   "affiliation", "section",
    "paragraph", "caption", "footnote", "header",   "footer",
    "table",  "figure",   "equation", "other"};

inline std::string_view to_string(LogicalRole r) {
  return kRoleNames[static_cast<std::size_t>(r)];
}

inline LogicalRole role_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == name) return static_cast<LogicalRole>(i);
  }
  throw io_error("unknown logical role: '" + std::string(name) + "'");
}

/// Role a graphical object contributes when it becomes a region of its own.
inline LogicalRole role_for_graphic(GraphicClass c) {
  switch (c) {
    case GraphicClass::Table: return LogicalRole::Table;
    case GraphicClass::Figure: return LogicalRole::Figure;
    case GraphicClass::EquationBlock: return LogicalRole::Equation;
    case GraphicClass::Other: return LogicalRole::Other;
  }
  return LogicalRole::Other;
}

struct Page {
  int index = 0;
  double width = 0.0;
  double height = 0.0;

  friend bool operator==(const Page&, const Page&) = default;
};

// ---------------------------------------------------------------------------
// Regions, groups, trees
// ---------------------------------------------------------------------------

/// A detected region: either an ordered run of text-lines or a single
/// graphical object. Exactly one of `lines` / `graphic` is populated.
struct Region {
  Id id = 0;
  LogicalRole role = LogicalRole::Paragraph;
  std::vector<Id> lines;
  std::optional<Id> graphic;
  BBox bbox;

  bool is_graphical() const { return graphic.has_value(); }

  friend bool operator==(const Region&, const Region&) = default;
};

enum class GroupCategory { TextRegion, GraphicalRegion };

inline constexpr std::array<std::string_view, 2> kGroupCategoryNames = {
    "text-region", "graphical-region"};

inline std::string_view to_string(GroupCategory c) {
  return kGroupCategoryNames[static_cast<std::size_t>(c)];
}

inline GroupCategory group_category_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kGroupCategoryNames.size(); ++i) {
    if (kGroupCategoryNames[i] == name) return static_cast<GroupCategory>(i);
  }
  throw io_error("unknown group category: '" + std::string(name) + "'");
}

/// A maximal ordered chain of regions of one category.
struct ReadingOrderGroup {
  GroupCategory category = GroupCategory::TextRegion;
  std::vector<Id> members;

  friend bool operator==(const ReadingOrderGroup&, const ReadingOrderGroup&) = default;
};

/// Ordered tree over section headings. The root carries kRootId.
struct TocNode {
  Id id = kRootId;
  std::vector<TocNode> children;

  friend bool operator==(const TocNode&, const TocNode&) = default;
};

using TocTree = TocNode;

/// Ordered tree over all regions, with role and text payloads.
struct HierarchyNode {
  Id id = kRootId;
  LogicalRole role = LogicalRole::Other;
  std::string text;
  std::vector<HierarchyNode> children;

  friend bool operator==(const HierarchyNode&, const HierarchyNode&) = default;
};

using HierarchyTree = HierarchyNode;

template <typename Node>
inline void preorder_ids(const Node& node, std::vector<Id>& out) {
  if (node.id != kRootId) out.push_back(node.id);
  for (const auto& child : node.children) preorder_ids(child, out);
}

/// Pre-order traversal of non-root node ids.
template <typename Node>
inline std::vector<Id> preorder(const Node& root) {
  std::vector<Id> out;
  preorder_ids(root, out);
  return out;
}

template <typename Node>
inline std::size_t tree_size(const Node& node) {
  std::size_t n = 1;
  for (const auto& child : node.children) n += tree_size(child);
  return n;
}

// ---------------------------------------------------------------------------
// Relations and scores
// ---------------------------------------------------------------------------

enum class RelationKind { Succ, Pred, Parent, Sibling, RelationType };

struct RelationEdge {
  Id from = 0;
  Id to = 0;
  RelationKind kind = RelationKind::Succ;
  double score = 0.0;
  std::optional<std::string> label;

  bool is_self_loop() const { return from == to; }

  friend bool operator==(const RelationEdge&, const RelationEdge&) = default;
};

/// Row-stochastic relation scores between n elements. rows[i][j] is the
/// score of element ids[j] standing in the matrix's relation to ids[i].
struct ScoreMatrix {
  std::string kind;
  std::vector<Id> ids;
  std::vector<std::vector<double>> rows;

  std::size_t size() const { return ids.size(); }

  std::optional<std::size_t> index_of(Id id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == id) return i;
    }
    return std::nullopt;
  }

  double at(Id from, Id to) const {
    auto i = index_of(from);
    auto j = index_of(to);
    if (!i || !j) {
      throw validation_error("score matrix '" + kind + "' has no entry for pair (" +
                             std::to_string(from) + ", " + std::to_string(to) + ")");
    }
    return rows[*i][*j];
  }

  /// Checks squareness, id uniqueness, finiteness, non-negativity and
  /// row-stochasticity (1e-6). Throws validation_error on the first failure.
  void validate() const;

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;
};

inline void ScoreMatrix::validate() const {
  const std::size_t n = ids.size();
  if (rows.size() != n) {
    throw validation_error("score matrix '" + kind + "': " + std::to_string(rows.size()) +
                           " rows for " + std::to_string(n) + " ids");
  }
  std::unordered_set<Id> seen;
  for (Id id : ids) {
    if (!seen.insert(id).second) {
      throw validation_error("score matrix '" + kind + "': duplicate id " + std::to_string(id));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw validation_error("score matrix '" + kind + "': row " + std::to_string(i) +
                             " has " + std::to_string(rows[i].size()) + " columns, expected " +
                             std::to_string(n));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = rows[i][j];
      if (!(v == v) || v > 1e300 || v < 0.0) {
        throw validation_error("score matrix '" + kind + "': bad entry at (" +
                               std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      sum += v;
    }
    if (sum < 1.0 - 1e-6 || sum > 1.0 + 1e-6) {
      throw validation_error("score matrix '" + kind + "': row " + std::to_string(i) +
                             " sums to " + std::to_string(sum));
    }
  }
}

// ---------------------------------------------------------------------------
// Document
// ---------------------------------------------------------------------------

/// Ground-truth annotations carried alongside a document.
struct GroundTruth {
  std::vector<Region> regions;
  std::vector<ReadingOrderGroup> groups;
  TocTree toc;
  HierarchyTree hierarchy;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Document {
  std::vector<Page> pages;
  std::vector<TextLine> lines;
  std::vector<GraphicalObject> graphics;
  std::optional<GroundTruth> ground_truth;

  int page_count() const { return static_cast<int>(pages.size()); }

  const TextLine* find_line(Id id) const {
    for (const auto& l : lines) {
      if (l.id == id) return &l;
    }
    return nullptr;
  }

  const GraphicalObject* find_graphic(Id id) const {
    for (const auto& g : graphics) {
      if (g.id == id) return &g;
    }
    return nullptr;
  }

  friend bool operator==(const Document&, const Document&) = default;
};

/// Text payload of a region: its line texts joined with single spaces.
inline std::string region_text(const Region& region, const Document& doc) {
  std::string text;
  for (Id lid : region.lines) {
    const TextLine* line = doc.find_line(lid);
    if (!line) {
      throw validation_error("region " + std::to_string(region.id) +
                             " references unknown line " + std::to_string(lid));
    }
    if (!text.empty()) text += ' ';
    text += line->text;
  }
  return text;
}

/// One broken invariant. `id` names the offending element (or page index).
struct Violation {
  Id id = 0;
  std::string rule;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every structural invariant of the document model. Violations are
/// data, not failures: an empty result means the document is well formed.
inline std::vector<Violation> validate_document(const Document& doc) {
  std::vector<Violation> out;
  const int pages = doc.page_count();

  for (std::size_t i = 0; i < doc.pages.size(); ++i) {
    const Page& p = doc.pages[i];
    if (p.index != static_cast<int>(i)) {
      out.push_back({p.index, "page index out of sequence"});
    }
    if (p.width <= 0.0 || p.height <= 0.0) {
      out.push_back({p.index, "non-positive page dimensions"});
    }
  }

  std::unordered_set<Id> ids;
  for (const auto& line : doc.lines) {
    if (!ids.insert(line.id).second) {
      out.push_back({line.id, "duplicate id " + std::to_string(line.id)});
    }
    if (!line.bbox.valid()) out.push_back({line.id, "inverted bbox"});
    if (line.page < 0 || line.page >= pages) {
      out.push_back({line.id, "page index " + std::to_string(line.page) + " out of range"});
    }
  }
  for (const auto& g : doc.graphics) {
    if (!ids.insert(g.id).second) {
      out.push_back({g.id, "duplicate id " + std::to_string(g.id)});
    }
    if (!g.bbox.valid()) out.push_back({g.id, "inverted bbox"});
    if (g.page < 0 || g.page >= pages) {
      out.push_back({g.id, "page index " + std::to_string(g.page) + " out of range"});
    }
  }

  if (doc.ground_truth) {
    const GroundTruth& gt = *doc.ground_truth;
    std::unordered_set<Id> region_ids;
    for (const auto& r : gt.regions) {
      if (!region_ids.insert(r.id).second) {
        out.push_back({r.id, "duplicate region id"});
      }
      const bool has_lines = !r.lines.empty();
      if (has_lines == r.graphic.has_value()) {
        out.push_back({r.id, "region must hold either lines or a graphic"});
      }
      for (Id lid : r.lines) {
        if (!ids.count(lid)) out.push_back({r.id, "region references unknown line " + std::to_string(lid)});
      }
      if (r.graphic && !ids.count(*r.graphic)) {
        out.push_back({r.id, "region references unknown graphic " + std::to_string(*r.graphic)});
      }
    }
    std::unordered_set<Id> text_grouped, graphical_grouped;
    for (const auto& g : gt.groups) {
      if (g.members.empty()) {
        out.push_back({0, "empty reading-order group"});
        continue;
      }
      auto& grouped = g.category == GroupCategory::TextRegion ? text_grouped : graphical_grouped;
      for (Id m : g.members) {
        if (!region_ids.count(m)) out.push_back({m, "group references unknown region"});
        if (!grouped.insert(m).second) {
          out.push_back({m, "region appears in more than one group of its category"});
        }
      }
    }
  }
  return out;
}

}  // namespace docstruct
