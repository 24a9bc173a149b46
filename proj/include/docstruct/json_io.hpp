#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "docstruct/model.hpp"

namespace docstruct {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Building blocks
// ---------------------------------------------------------------------------

inline ojson to_json(const BBox& b) { return ojson::array({b.x1, b.y1, b.x2, b.y2}); }

inline BBox bbox_from_json(const ojson& j) {
  if (!j.is_array() || j.size() != 4) throw io_error("bbox must be a 4-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline ojson to_json(const Region& r) {
  ojson j;
  j["id"] = r.id;
  j["role"] = to_string(r.role);
  j["lines"] = r.lines;
  if (r.graphic) j["graphic"] = *r.graphic;
  j["bbox"] = to_json(r.bbox);
  return j;
}

inline Region region_from_json(const ojson& j) {
  Region r;
  r.id = j.at("id").get<Id>();
  r.role = role_from_name(j.at("role").get<std::string>());
  if (j.contains("lines")) r.lines = j.at("lines").get<std::vector<Id>>();
  if (j.contains("graphic")) r.graphic = j.at("graphic").get<Id>();
  r.bbox = bbox_from_json(j.at("bbox"));
  return r;
}

inline ojson to_json(const ReadingOrderGroup& g) {
  ojson j;
  j["category"] = to_string(g.category);
  j["members"] = g.members;
  return j;
}

inline ReadingOrderGroup group_from_json(const ojson& j) {
  ReadingOrderGroup g;
  g.category = group_category_from_name(j.at("category").get<std::string>());
  g.members = j.at("members").get<std::vector<Id>>();
  return g;
}

inline ojson to_json(const TocNode& node) {
  ojson j;
  j["id"] = node.id;
  ojson children = ojson::array();
  for (const auto& child : node.children) children.push_back(to_json(child));
  j["children"] = std::move(children);
  return j;
}

inline TocNode toc_from_json(const ojson& j) {
  TocNode node;
  node.id = j.at("id").get<Id>();
  if (j.contains("children")) {
    for (const auto& child : j.at("children")) node.children.push_back(toc_from_json(child));
  }
  return node;
}

inline ojson to_json(const HierarchyNode& node) {
  ojson j;
  j["id"] = node.id;
  j["role"] = to_string(node.role);
  j["text"] = node.text;
  ojson children = ojson::array();
  for (const auto& child : node.children) children.push_back(to_json(child));
  j["children"] = std::move(children);
  return j;
}

inline HierarchyNode hierarchy_from_json(const ojson& j) {
  HierarchyNode node;
  node.id = j.at("id").get<Id>();
  node.role = role_from_name(j.at("role").get<std::string>());
  node.text = j.at("text").get<std::string>();
  if (j.contains("children")) {
    for (const auto& child : j.at("children")) {
      node.children.push_back(hierarchy_from_json(child));
    }
  }
  return node;
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

inline ojson to_json(const GroundTruth& gt) {
  ojson j;
  ojson regions = ojson::array();
  for (const auto& r : gt.regions) regions.push_back(to_json(r));
  j["regions"] = std::move(regions);
  ojson groups = ojson::array();
  for (const auto& g : gt.groups) groups.push_back(to_json(g));
  j["groups"] = std::move(groups);
  j["toc"] = to_json(gt.toc);
  j["hierarchy"] = to_json(gt.hierarchy);
  return j;
}

inline GroundTruth ground_truth_from_json(const ojson& j) {
  GroundTruth gt;
  if (j.contains("regions")) {
    for (const auto& r : j.at("regions")) gt.regions.push_back(region_from_json(r));
  }
  if (j.contains("groups")) {
    for (const auto& g : j.at("groups")) gt.groups.push_back(group_from_json(g));
  }
  if (j.contains("toc")) gt.toc = toc_from_json(j.at("toc"));
  if (j.contains("hierarchy")) gt.hierarchy = hierarchy_from_json(j.at("hierarchy"));
  return gt;
}

inline ojson to_json(const Document& doc) {
  ojson j;
  ojson pages = ojson::array();
  for (const auto& p : doc.pages) {
    pages.push_back({{"index", p.index}, {"width", p.width}, {"height", p.height}});
  }
  j["pages"] = std::move(pages);
  ojson lines = ojson::array();
  for (const auto& l : doc.lines) {
    ojson line;
    line["id"] = l.id;
    line["page"] = l.page;
    line["bbox"] = to_json(l.bbox);
    line["text"] = l.text;
    lines.push_back(std::move(line));
  }
  j["lines"] = std::move(lines);
  ojson graphics = ojson::array();
  for (const auto& g : doc.graphics) {
    ojson obj;
    obj["id"] = g.id;
    obj["page"] = g.page;
    obj["bbox"] = to_json(g.bbox);
    obj["class"] = to_string(g.cls);
    graphics.push_back(std::move(obj));
  }
  j["graphics"] = std::move(graphics);
  if (doc.ground_truth) j["ground_truth"] = to_json(*doc.ground_truth);
  return j;
}

inline Document document_from_json(const ojson& j) {
  Document doc;
  for (const auto& p : j.at("pages")) {
    doc.pages.push_back({p.at("index").get<int>(), p.at("width").get<double>(),
                         p.at("height").get<double>()});
  }
  if (j.contains("lines")) {
    for (const auto& l : j.at("lines")) {
      doc.lines.push_back({l.at("id").get<Id>(), l.at("page").get<int>(),
                           bbox_from_json(l.at("bbox")), l.at("text").get<std::string>()});
    }
  }
  if (j.contains("graphics")) {
    for (const auto& g : j.at("graphics")) {
      doc.graphics.push_back({g.at("id").get<Id>(), g.at("page").get<int>(),
                              bbox_from_json(g.at("bbox")),
                              graphic_class_from_name(g.at("class").get<std::string>())});
    }
  }
  if (j.contains("ground_truth")) {
    doc.ground_truth = ground_truth_from_json(j.at("ground_truth"));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline ojson read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  ojson j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("failed to parse '" + path + "': " + e.what());
  }
  return j;
}

inline void write_json(const ojson& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline Document read_document(const std::string& path) {
  const ojson j = read_json(path);
  try {
    return document_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw io_error("'" + path + "': " + e.what());
  }
}

inline void write_document(const Document& doc, const std::string& path) {
  write_json(to_json(doc), path);
}

}  // namespace docstruct
