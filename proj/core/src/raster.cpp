#include "puma/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "puma/error.hpp"

namespace puma {

namespace {

// Crossing x-coordinates of all ring edges with the horizontal line y = yc.
// Edges are half-open in y ([min, max)), so vertices on the line are counted
// exactly once and horizontal edges never contribute; the count is always
// even for closed rings.
void scanline_crossings(const std::vector<Ring>& rings, double yc, std::vector<double>& xs) {
  xs.clear();
  for (const Ring& ring : rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = ring[i];
      const Point& b = ring[(i + 1) % n];
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) {
        xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
  }
  std::sort(xs.begin(), xs.end());
}

// First pixel whose center x + 0.5 is >= value.
int first_center_at_or_after(double value) {
  return static_cast<int>(std::ceil(value - 0.5));
}

struct DisjointSet {
  std::vector<std::uint32_t> parent;

  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];  // path halving
      x = parent[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

LabelMask rasterize(const AnnotationSet& set, const Taxonomy& taxonomy) {
  if (set.width <= 0 || set.height <= 0)
    fail(errc::missing_dimensions, "rasterize: case '" + set.case_id + "' has no dimensions");

  LabelMask mask(set.width, set.height);
  std::vector<double> xs;

  for (const Annotation& annotation : set.annotations) {
    if (annotation.is_point()) continue;
    if (!taxonomy.valid_index(annotation.class_index))
      fail(errc::index_out_of_range, "rasterize: class index " +
                                         std::to_string(annotation.class_index) +
                                         " outside taxonomy '" + taxonomy.name() + "'");
    const auto value = static_cast<std::uint8_t>(annotation.class_index);

    Box box = ring_bbox(annotation.rings[0]);
    for (std::size_t r = 1; r < annotation.rings.size(); ++r) {
      const Box rb = ring_bbox(annotation.rings[r]);
      box.min_x = std::min(box.min_x, rb.min_x);
      box.max_x = std::max(box.max_x, rb.max_x);
      box.min_y = std::min(box.min_y, rb.min_y);
      box.max_y = std::max(box.max_y, rb.max_y);
    }
    const int y_begin = std::max(0, first_center_at_or_after(box.min_y));
    const int y_end = std::min(set.height, first_center_at_or_after(box.max_y));

    for (int y = y_begin; y < y_end; ++y) {
      const double yc = y + 0.5;
      scanline_crossings(annotation.rings, yc, xs);
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        int x = std::max(0, first_center_at_or_after(xs[k]));
        const int x_end = std::min(set.width, first_center_at_or_after(xs[k + 1]));
        for (; x < x_end; ++x) mask.at(x, y) = value;
      }
    }
  }
  return mask;
}

InstanceMask connected_components(const LabelMask& mask, Connectivity connectivity) {
  InstanceMask out;
  out.width = mask.width;
  out.height = mask.height;
  out.data.assign(mask.data.size(), 0);
  if (mask.data.empty()) return out;

  // first pass: provisional labels, merging across left/up (and the two
  // diagonals for eight-connectivity) when the class matches
  std::vector<std::uint32_t> provisional(mask.data.size(), 0);
  DisjointSet sets(1);  // index 0 stays "no label"
  std::uint32_t next = 1;

  const int w = mask.width;
  const int h = mask.height;
  const bool diagonal = connectivity == Connectivity::eight;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t value = mask.at(x, y);
      if (value == 0) continue;
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;

      std::uint32_t label = 0;
      auto adopt = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
        if (mask.at(nx, ny) != value) return;
        const std::uint32_t neighbor = provisional[static_cast<std::size_t>(ny) * w + nx];
        if (neighbor == 0) return;
        if (label == 0) {
          label = neighbor;
        } else if (neighbor != label) {
          sets.unite(label, neighbor);
        }
      };

      adopt(x - 1, y);
      adopt(x, y - 1);
      if (diagonal) {
        adopt(x - 1, y - 1);
        adopt(x + 1, y - 1);
      }

      if (label == 0) {
        label = next++;
        sets.parent.push_back(label);
      }
      provisional[idx] = label;
    }
  }

  // second pass: roots renumbered in raster-scan order of first appearance
  std::vector<std::uint32_t> final_id(next, 0);
  for (std::size_t idx = 0; idx < provisional.size(); ++idx) {
    if (provisional[idx] == 0) continue;
    const std::uint32_t root = sets.find(provisional[idx]);
    if (final_id[root] == 0) {
      final_id[root] = static_cast<std::uint32_t>(out.labels.size()) + 1;
      out.labels.push_back(mask.data[idx]);
    }
    out.data[idx] = final_id[root];
  }
  return out;
}

NucleiSet centroids(const InstanceMask& instances) {
  NucleiSet out;
  const std::uint32_t count = instances.instance_count();
  if (count == 0) return out;

  std::vector<double> sum_x(count, 0.0);
  std::vector<double> sum_y(count, 0.0);
  std::vector<std::uint64_t> sizes(count, 0);

  for (int y = 0; y < instances.height; ++y) {
    for (int x = 0; x < instances.width; ++x) {
      const std::uint32_t id = instances.data[static_cast<std::size_t>(y) * instances.width + x];
      if (id == 0) continue;
      sum_x[id - 1] += x + 0.5;
      sum_y[id - 1] += y + 0.5;
      ++sizes[id - 1];
    }
  }

  out.nuclei.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (sizes[i] == 0) continue;  // cannot happen for masks built here
    out.nuclei.push_back(Nucleus{
        Point{sum_x[i] / static_cast<double>(sizes[i]), sum_y[i] / static_cast<double>(sizes[i])},
        static_cast<int>(instances.labels[i])});
  }
  return out;
}

NucleiSet extract_nuclei(const AnnotationSet& set, const Taxonomy& taxonomy,
                         Connectivity connectivity) {
  AnnotationSet polygons;
  polygons.case_id = set.case_id;
  polygons.width = set.width;
  polygons.height = set.height;
  for (const Annotation& annotation : set.annotations)
    if (!annotation.is_point()) polygons.annotations.push_back(annotation);

  NucleiSet out;
  out.case_id = set.case_id;
  if (!polygons.annotations.empty()) {
    const LabelMask mask = rasterize(polygons, taxonomy);
    out = centroids(connected_components(mask, connectivity));
    out.case_id = set.case_id;
  }
  for (const Annotation& annotation : set.annotations) {
    if (!annotation.is_point()) continue;
    if (!taxonomy.valid_index(annotation.class_index))
      fail(errc::index_out_of_range, "extract_nuclei: class index " +
                                         std::to_string(annotation.class_index) +
                                         " outside taxonomy '" + taxonomy.name() + "'");
    out.nuclei.push_back(Nucleus{annotation.point, annotation.class_index});
  }
  return out;
}

}  // namespace puma
