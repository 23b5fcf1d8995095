#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "puma/annotations.hpp"

namespace puma {

/// Dense per-pixel class indices, row-major. 0 is background. Values are
/// capped at 255 by the taxonomy so masks always fit an 8-bit palette.
struct LabelMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  LabelMask() = default;
  LabelMask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const LabelMask& a, const LabelMask& b) {
    return a.width == b.width && a.height == b.height && a.data == b.data;
  }
};

/// Per-pixel instance identifiers (0 = none), ids contiguous from 1 in
/// raster-scan order of each component's first pixel. labels[id - 1] is the
/// class index of that instance.
struct InstanceMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> data;
  std::vector<std::uint8_t> labels;

  std::uint32_t instance_count() const { return static_cast<std::uint32_t>(labels.size()); }
};

struct Nucleus {
  Point centroid;
  int class_index = 0;
};

struct NucleiSet {
  std::string case_id;
  std::vector<Nucleus> nuclei;
};

enum class Connectivity { four, eight };

/// Paint polygon annotations into a label mask. A pixel (x, y) belongs to a
/// polygon iff its center (x + 0.5, y + 0.5) is inside under the even-odd
/// rule; inner rings subtract. Annotations are painted in file order, later
/// ones overwriting earlier ones. Point annotations cover no pixels.
LabelMask rasterize(const AnnotationSet& set, const Taxonomy& taxonomy);

/// Maximal same-class connected regions of nonzero pixels. Two-pass
/// union-find; ids are assigned in raster-scan order of first pixels.
InstanceMask connected_components(const LabelMask& mask,
                                  Connectivity connectivity = Connectivity::eight);

/// One nucleus per instance, centroid = arithmetic mean of member pixel
/// centers, ordered by instance id.
NucleiSet centroids(const InstanceMask& instances);

/// Detection points from a mixed annotation set: polygon features are
/// rasterized together and reduced to component centroids (mask-derived
/// nuclei first, by instance id), then point features are appended in file
/// order.
NucleiSet extract_nuclei(const AnnotationSet& set, const Taxonomy& taxonomy,
                         Connectivity connectivity = Connectivity::eight);

}  // namespace puma
