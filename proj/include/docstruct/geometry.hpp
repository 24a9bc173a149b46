#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "docstruct/model.hpp"

namespace docstruct {

/// The 6-d offset vector between two boxes: normalized center deltas in both
/// reference frames plus log width/height ratios.
struct BoxDelta {
  double dx_ctr_ij = 0.0;
  double dy_ctr_ij = 0.0;
  double dw_ij = 0.0;
  double dh_ij = 0.0;
  double dx_ctr_ji = 0.0;
  double dy_ctr_ji = 0.0;

  std::array<double, 6> to_array() const {
    return {dx_ctr_ij, dy_ctr_ij, dw_ij, dh_ij, dx_ctr_ji, dy_ctr_ji};
  }

  friend bool operator==(const BoxDelta&, const BoxDelta&) = default;
};

/// Spatial compatibility between two boxes: the deltas of the pair and of
/// each box against their union, concatenated (18 components).
struct SpatialFeature {
  std::array<double, 18> v{};

  friend bool operator==(const SpatialFeature&, const SpatialFeature&) = default;
};

/// Smallest box enclosing both inputs. Commutative, associative, idempotent.
inline BBox union_bbox(const BBox& a, const BBox& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1),
          std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

/// Intersection over union; 0 for disjoint or degenerate boxes.
inline double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.width() * a.height() + b.width() * b.height() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace detail {
inline std::string describe_box(const BBox& b) {
  return "(" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + ", " +
         std::to_string(b.x2) + ", " + std::to_string(b.y2) + ")";
}
}  // namespace detail

/// Box delta of `a` against `b`. Both boxes must have positive extent:
/// the log ratios and center normalizations are undefined otherwise.
inline BoxDelta box_delta(const BBox& a, const BBox& b) {
  if (a.width() <= 0.0 || a.height() <= 0.0) {
    throw validation_error("box_delta: degenerate box " + detail::describe_box(a));
  }
  if (b.width() <= 0.0 || b.height() <= 0.0) {
    throw validation_error("box_delta: degenerate box " + detail::describe_box(b));
  }
  BoxDelta d;
  d.dx_ctr_ij = (a.center_x() - b.center_x()) / a.width();
  d.dy_ctr_ij = (a.center_y() - b.center_y()) / a.height();
  d.dw_ij = std::log(a.width() / b.width());
  d.dh_ij = std::log(a.height() / b.height());
  d.dx_ctr_ji = (b.center_x() - a.center_x()) / b.width();
  d.dy_ctr_ji = (b.center_y() - a.center_y()) / b.height();
  return d;
}

/// Concatenation of box_delta(a, b), box_delta(a, a∪b), box_delta(b, a∪b).
inline SpatialFeature spatial_compatibility(const BBox& a, const BBox& b) {
  const BBox u = union_bbox(a, b);
  const std::array<BoxDelta, 3> parts = {box_delta(a, b), box_delta(a, u), box_delta(b, u)};
  SpatialFeature f;
  std::size_t k = 0;
  for (const auto& part : parts) {
    for (double c : part.to_array()) f.v[k++] = c;
  }
  return f;
}

}  // namespace docstruct
