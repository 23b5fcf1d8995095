#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "puma/geometry.hpp"
#include "puma/taxonomy.hpp"

namespace puma {

enum class AnnotationLayer { nuclei, tissue };

const char* layer_name(AnnotationLayer layer);

/// One labeled feature: either a polygon with optional holes (rings[0] is the
/// outer ring, the rest subtract under the even-odd rule) or a bare point.
/// Rings are stored open with >= 3 vertices each.
struct Annotation {
  std::vector<Ring> rings;  // empty for point annotations
  Point point{};            // meaningful only when rings is empty
  int class_index = 0;
  AnnotationLayer layer = AnnotationLayer::nuclei;

  bool is_point() const { return rings.empty(); }
};

/// Per-case annotation list. Order is preserved exactly as read from the
/// file: at rasterization later annotations overwrite earlier ones.
struct AnnotationSet {
  std::string case_id;
  int width = 0;
  int height = 0;
  std::vector<Annotation> annotations;
};

/// Parse the annotation JSON (FeatureCollection of Polygon/Point features with
/// properties.classification.name, see docs/formats.md). Class names resolve
/// case-insensitively against the taxonomy. Dimensions come from the caller,
/// never from the file.
///
/// Throws: malformed_json, unknown_class_name, degenerate_ring,
/// missing_dimensions.
AnnotationSet parse_annotation_file(const std::string& content, const Taxonomy& taxonomy,
                                    AnnotationLayer layer, const std::string& case_id,
                                    int width, int height);

/// Inverse of parse_annotation_file: emits the same schema with closed rings.
/// Vertex coordinates round-trip bit-exactly.
std::string write_annotation_file(const AnnotationSet& set, const Taxonomy& taxonomy);

/// Re-labels every annotation through the mapping; geometry and order are
/// untouched. The set must be typed against mapping.source().
AnnotationSet map_taxonomy(const AnnotationSet& set, const TaxonomyMapping& mapping);

enum class IssueKind { out_of_bounds, self_intersection, zero_area };

struct Issue {
  IssueKind kind;
  std::size_t annotation_ordinal;
  std::string detail;
};

/// Diagnostics only: out-of-bounds vertices, self-intersecting rings and
/// zero-area rings are reported, never rejected.
std::vector<Issue> validate(const AnnotationSet& set, const Taxonomy& taxonomy);

}  // namespace puma
