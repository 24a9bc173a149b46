#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "docstruct/geometry.hpp"

using namespace docstruct;

namespace {

BBox random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 900.0);
  std::uniform_real_distribution<double> extent(1.0, 300.0);
  const double x1 = pos(rng);
  const double y1 = pos(rng);
  return {x1, y1, x1 + extent(rng), y1 + extent(rng)};
}

}  // namespace

TEST_CASE("union_bbox basics") {
  const BBox a{0, 0, 1, 1};
  CHECK(union_bbox(a, a) == a);
  CHECK(union_bbox({0, 0, 1, 1}, {2, 3, 4, 5}) == BBox{0, 0, 4, 5});
}

TEST_CASE("union_bbox is a commutative idempotent fold") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<BBox> boxes;
    const int k = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < k; ++i) boxes.push_back(random_box(rng));

    BBox forward = boxes.front();
    for (std::size_t i = 1; i < boxes.size(); ++i) forward = union_bbox(forward, boxes[i]);
    BBox backward = boxes.back();
    for (std::size_t i = boxes.size() - 1; i-- > 0;) backward = union_bbox(backward, boxes[i]);
    CHECK(forward == backward);

    const BBox x = boxes[rng() % boxes.size()];
    const BBox y = boxes[rng() % boxes.size()];
    CHECK(union_bbox(x, y) == union_bbox(y, x));
    CHECK(union_bbox(x, x) == x);
    // Associativity on a random triple.
    const BBox z = boxes[rng() % boxes.size()];
    CHECK(union_bbox(union_bbox(x, y), z) == union_bbox(x, union_bbox(y, z)));
  }
}

TEST_CASE("box_delta of identical boxes is zero") {
  const BBox b{3, 4, 10, 20};
  const BoxDelta d = box_delta(b, b);
  for (double c : d.to_array()) CHECK(c == 0.0);
}

TEST_CASE("box_delta worked example") {
  // a = (0,0,10,10), b = (10,0,30,10): centers (5,5) and (20,5),
  // widths 10 and 20, heights equal.
  const BoxDelta d = box_delta({0, 0, 10, 10}, {10, 0, 30, 10});
  CHECK(d.dx_ctr_ij == Catch::Approx(-1.5).epsilon(1e-12));
  CHECK(d.dy_ctr_ij == 0.0);
  CHECK(d.dw_ij == Catch::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(d.dh_ij == 0.0);
  CHECK(d.dx_ctr_ji == Catch::Approx(0.75).epsilon(1e-12));
  CHECK(d.dy_ctr_ji == 0.0);
}

TEST_CASE("box_delta antisymmetry permutation") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const BBox a = random_box(rng);
    const BBox b = random_box(rng);
    const auto ab = box_delta(a, b).to_array();
    const auto ba = box_delta(b, a).to_array();
    CHECK(ba[0] == ab[4]);
    CHECK(ba[1] == ab[5]);
    CHECK(ba[2] == -ab[2]);
    CHECK(ba[3] == -ab[3]);
    CHECK(ba[4] == ab[0]);
    CHECK(ba[5] == ab[1]);
  }
}

TEST_CASE("box_delta rejects degenerate boxes") {
  CHECK_THROWS_AS(box_delta({0, 0, 0, 10}, {0, 0, 1, 1}), validation_error);
  CHECK_THROWS_AS(box_delta({0, 0, 10, 10}, {5, 5, 5, 9}), validation_error);
}

TEST_CASE("spatial_compatibility of a box with itself is the zero vector") {
  const BBox b{1, 2, 30, 40};
  const SpatialFeature f = spatial_compatibility(b, b);
  for (double c : f.v) CHECK(c == 0.0);
}

TEST_CASE("spatial_compatibility concatenates the three deltas in order") {
  const BBox a{0, 0, 10, 10};
  const BBox b{10, 0, 30, 10};
  const BBox u = union_bbox(a, b);
  CHECK(u == BBox{0, 0, 30, 10});
  const SpatialFeature f = spatial_compatibility(a, b);
  const auto ab = box_delta(a, b).to_array();
  const auto au = box_delta(a, u).to_array();
  const auto bu = box_delta(b, u).to_array();
  for (int i = 0; i < 6; ++i) {
    CHECK(f.v[i] == ab[i]);
    CHECK(f.v[6 + i] == au[i]);
    CHECK(f.v[12 + i] == bu[i]);
  }
}

TEST_CASE("iou") {
  CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
  CHECK(iou({0, 0, 10, 10}, {20, 20, 30, 30}) == 0.0);
  CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) == Catch::Approx(50.0 / 150.0));
}
