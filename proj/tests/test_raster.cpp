#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "puma/error.hpp"
#include "puma/raster.hpp"
#include "puma/rng.hpp"

using namespace puma;

namespace {

Annotation polygon(std::initializer_list<Point> vertices, int class_index,
                   AnnotationLayer layer = AnnotationLayer::tissue) {
  Annotation annotation;
  annotation.layer = layer;
  annotation.class_index = class_index;
  annotation.rings.push_back(Ring(vertices));
  return annotation;
}

AnnotationSet make_set(int w, int h) {
  AnnotationSet set;
  set.case_id = "t";
  set.width = w;
  set.height = h;
  return set;
}

// regular-ish convex polygon sampled on a circle
Ring random_convex(SplitMix64& rng, double cx, double cy, double radius, int vertices) {
  std::vector<double> angles;
  for (int i = 0; i < vertices; ++i) angles.push_back(rng.unit() * 6.283185307179586);
  std::sort(angles.begin(), angles.end());
  Ring ring;
  for (double a : angles) ring.push_back(Point{cx + radius * std::cos(a), cy + radius * std::sin(a)});
  return ring;
}

// star-shaped simple polygon (sorted angles, varying radii)
Ring random_star(SplitMix64& rng, double cx, double cy, double max_radius, int vertices) {
  std::vector<double> angles;
  for (int i = 0; i < vertices; ++i) angles.push_back(rng.unit() * 6.283185307179586);
  std::sort(angles.begin(), angles.end());
  Ring ring;
  for (double a : angles) {
    const double r = max_radius * (0.3 + 0.7 * rng.unit());
    ring.push_back(Point{cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return ring;
}

}  // namespace

TEST_CASE("empty set rasterizes to an all-zero mask") {
  const LabelMask mask = rasterize(make_set(8, 8), tissue_taxonomy());
  for (std::uint8_t v : mask.data) CHECK(v == 0);
}

TEST_CASE("axis-aligned 4x4 square covers exactly the 16 pixels with inside centers") {
  auto set = make_set(8, 8);
  set.annotations.push_back(polygon({{0, 0}, {4, 0}, {4, 4}, {0, 4}}, 1));
  const LabelMask mask = rasterize(set, tissue_taxonomy());

  int count = 0;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const bool expect = x < 4 && y < 4;  // centers 0.5..3.5 fall inside
      CHECK(mask.at(x, y) == (expect ? 1 : 0));
      count += mask.at(x, y) != 0;
    }
  }
  CHECK(count == 16);
}

TEST_CASE("later annotations overwrite earlier ones") {
  auto set = make_set(16, 16);
  set.annotations.push_back(polygon({{0, 0}, {8, 0}, {8, 8}, {0, 8}}, 1));
  set.annotations.push_back(polygon({{4, 4}, {12, 4}, {12, 12}, {4, 12}}, 2));
  const LabelMask mask = rasterize(set, tissue_taxonomy());
  CHECK(mask.at(2, 2) == 1);
  CHECK(mask.at(6, 6) == 2);  // the overlap belongs to the later annotation
  CHECK(mask.at(10, 10) == 2);
  CHECK(mask.at(14, 14) == 0);
}

TEST_CASE("inner rings subtract under the even-odd rule") {
  auto set = make_set(16, 16);
  Annotation ring = polygon({{0, 0}, {12, 0}, {12, 12}, {0, 12}}, 1);
  ring.rings.push_back(Ring{{4, 4}, {8, 4}, {8, 8}, {4, 8}});
  set.annotations.push_back(ring);
  const LabelMask mask = rasterize(set, tissue_taxonomy());
  CHECK(mask.at(2, 2) == 1);
  CHECK(mask.at(6, 6) == 0);  // inside the hole
  CHECK(mask.at(10, 10) == 1);
}

TEST_CASE("point annotations cover no pixels") {
  auto set = make_set(8, 8);
  Annotation point;
  point.layer = AnnotationLayer::nuclei;
  point.class_index = 1;
  point.point = Point{4.0, 4.0};
  set.annotations.push_back(point);
  const LabelMask mask = rasterize(set, track1_taxonomy());
  for (std::uint8_t v : mask.data) CHECK(v == 0);
}

TEST_CASE("rasterization agrees with a per-center point-in-polygon oracle") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto set = make_set(48, 48);
    Annotation annotation;
    annotation.layer = AnnotationLayer::tissue;
    annotation.class_index = 1;
    annotation.rings.push_back(
        random_star(rng, 12.0 + 24.0 * rng.unit(), 12.0 + 24.0 * rng.unit(), 11.0, 7));
    set.annotations.push_back(annotation);

    const LabelMask mask = rasterize(set, tissue_taxonomy());
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x) {
        const bool inside =
            oracle::point_in_rings(set.annotations[0].rings, x + 0.5, y + 0.5);
        REQUIRE(mask.at(x, y) == (inside ? 1 : 0));
      }
  }
}

TEST_CASE("translation equivariance for integer offsets") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Ring base = random_convex(rng, 20.0 + 8.0 * rng.unit(), 20.0 + 8.0 * rng.unit(),
                                    4.0 + 8.0 * rng.unit(), 6);
    const int dx = static_cast<int>(rng.below(12));
    const int dy = static_cast<int>(rng.below(12));

    auto set_a = make_set(64, 64);
    auto set_b = make_set(64, 64);
    Annotation a;
    a.layer = AnnotationLayer::tissue;
    a.class_index = 1;
    a.rings.push_back(base);
    set_a.annotations.push_back(a);
    Ring shifted = base;
    for (Point& p : shifted) {
      p.x += dx;
      p.y += dy;
    }
    a.rings[0] = shifted;
    set_b.annotations.push_back(a);

    const LabelMask mask_a = rasterize(set_a, tissue_taxonomy());
    const LabelMask mask_b = rasterize(set_b, tissue_taxonomy());
    for (int y = 0; y < 64 - dy; ++y)
      for (int x = 0; x < 64 - dx; ++x)
        REQUIRE(mask_a.at(x, y) == mask_b.at(x + dx, y + dy));
  }
}

TEST_CASE("pixel count of a convex polygon stays within the perimeter band of its area") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const Ring ring = random_convex(rng, 32.0, 32.0, 4.0 + 16.0 * rng.unit(), 8);
    auto set = make_set(64, 64);
    Annotation a;
    a.layer = AnnotationLayer::tissue;
    a.class_index = 1;
    a.rings.push_back(ring);
    set.annotations.push_back(a);

    const LabelMask mask = rasterize(set, tissue_taxonomy());
    std::uint64_t count = 0;
    for (std::uint8_t v : mask.data) count += v != 0;

    const double area = std::abs(oracle::polygon_area(ring));
    const double perimeter = oracle::polygon_perimeter(ring);
    CHECK(std::abs(static_cast<double>(count) - area) <= perimeter);
  }
}

TEST_CASE("connected components: single blob, diagonal pair, empty mask") {
  LabelMask blob(8, 8);
  for (int y = 2; y < 5; ++y)
    for (int x = 2; x < 5; ++x) blob.at(x, y) = 1;
  CHECK(connected_components(blob, Connectivity::eight).instance_count() == 1);
  CHECK(connected_components(blob, Connectivity::four).instance_count() == 1);

  // two pixels touching only diagonally
  LabelMask diagonal(4, 4);
  diagonal.at(1, 1) = 1;
  diagonal.at(2, 2) = 1;
  CHECK(connected_components(diagonal, Connectivity::eight).instance_count() == 1);
  CHECK(connected_components(diagonal, Connectivity::four).instance_count() == 2);

  CHECK(connected_components(LabelMask(6, 6)).instance_count() == 0);
}

TEST_CASE("components split along class boundaries and ids follow raster order") {
  LabelMask mask(6, 1);
  mask.at(0, 0) = 1;
  mask.at(1, 0) = 1;
  mask.at(2, 0) = 2;  // same blob position, different class
  mask.at(4, 0) = 1;

  const InstanceMask inst = connected_components(mask, Connectivity::eight);
  REQUIRE(inst.instance_count() == 3);
  CHECK(inst.data[0] == 1);
  CHECK(inst.data[1] == 1);
  CHECK(inst.data[2] == 2);
  CHECK(inst.data[4] == 3);
  CHECK(inst.labels[0] == 1);
  CHECK(inst.labels[1] == 2);
  CHECK(inst.labels[2] == 1);
}

TEST_CASE("component structure is invariant under transposition") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const int w = 3 + static_cast<int>(rng.below(14));
    const int h = 3 + static_cast<int>(rng.below(14));
    LabelMask mask(w, h);
    for (auto& v : mask.data) v = static_cast<std::uint8_t>(rng.below(3));

    LabelMask transposed(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) transposed.at(y, x) = mask.at(x, y);

    for (const Connectivity conn : {Connectivity::four, Connectivity::eight}) {
      const InstanceMask a = connected_components(mask, conn);
      const InstanceMask b = connected_components(transposed, conn);
      REQUIRE(a.instance_count() == b.instance_count());

      // compare the partition itself through the transposed relabeling
      std::vector<std::uint32_t> relabel(a.instance_count() + 1, 0);
      bool consistent = true;
      for (int y = 0; y < h && consistent; ++y)
        for (int x = 0; x < w; ++x) {
          const std::uint32_t ia = a.data[static_cast<std::size_t>(y) * w + x];
          const std::uint32_t ib = b.data[static_cast<std::size_t>(x) * h + y];
          if ((ia == 0) != (ib == 0)) {
            consistent = false;
            break;
          }
          if (ia == 0) continue;
          if (relabel[ia] == 0) relabel[ia] = ib;
          if (relabel[ia] != ib) {
            consistent = false;
            break;
          }
        }
      CHECK(consistent);
    }
  }
}

TEST_CASE("centroids use the pixel-center convention") {
  LabelMask single(8, 8);
  single.at(2, 5) = 1;
  const NucleiSet one = centroids(connected_components(single));
  REQUIRE(one.nuclei.size() == 1);
  CHECK(one.nuclei[0].centroid == Point{2.5, 5.5});
  CHECK(one.nuclei[0].class_index == 1);

  LabelMask block(8, 8);
  block.at(0, 0) = 2;
  block.at(1, 0) = 2;
  block.at(0, 1) = 2;
  block.at(1, 1) = 2;
  const NucleiSet four = centroids(connected_components(block));
  REQUIRE(four.nuclei.size() == 1);
  CHECK(four.nuclei[0].centroid == Point{1.0, 1.0});

  CHECK(centroids(connected_components(LabelMask(4, 4))).nuclei.empty());
}

TEST_CASE("each disjoint rasterized polygon yields one centroid inside its bounding box") {
  SplitMix64 rng(17);
  auto set = make_set(128, 128);
  std::vector<Box> boxes;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double cx = 20.0 + 40.0 * i + 4.0 * rng.unit();
      const double cy = 20.0 + 40.0 * j + 4.0 * rng.unit();
      Annotation a;
      a.layer = AnnotationLayer::nuclei;
      a.class_index = 1 + static_cast<int>(rng.below(3));
      a.rings.push_back(random_convex(rng, cx, cy, 5.0 + 4.0 * rng.unit(), 7));
      boxes.push_back(ring_bbox(a.rings[0]));
      set.annotations.push_back(a);
    }
  }

  const NucleiSet nuclei = centroids(connected_components(rasterize(set, track1_taxonomy())));
  REQUIRE(nuclei.nuclei.size() == boxes.size());
  for (const Nucleus& nucleus : nuclei.nuclei) {
    bool in_some_box = false;
    for (const Box& box : boxes)
      in_some_box |= nucleus.centroid.x >= box.min_x && nucleus.centroid.x <= box.max_x &&
                     nucleus.centroid.y >= box.min_y && nucleus.centroid.y <= box.max_y;
    CHECK(in_some_box);
  }
}

TEST_CASE("extract_nuclei combines mask-derived centroids with point features") {
  auto set = make_set(64, 64);
  set.annotations.push_back(
      polygon({{10, 10}, {14, 10}, {14, 14}, {10, 14}}, 1, AnnotationLayer::nuclei));
  Annotation point;
  point.layer = AnnotationLayer::nuclei;
  point.class_index = 2;
  point.point = Point{40.25, 41.5};
  set.annotations.push_back(point);

  const NucleiSet nuclei = extract_nuclei(set, track1_taxonomy());
  REQUIRE(nuclei.nuclei.size() == 2);
  CHECK(nuclei.nuclei[0].centroid == Point{12.0, 12.0});  // square center, mask path
  CHECK(nuclei.nuclei[0].class_index == 1);
  CHECK(nuclei.nuclei[1].centroid == Point{40.25, 41.5});  // point passes through
  CHECK(nuclei.nuclei[1].class_index == 2);
}
