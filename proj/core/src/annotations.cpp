#include "puma/annotations.hpp"

#include <cmath>
#include <utility>

#include <nlohmann/json.hpp>

#include "puma/error.hpp"

namespace puma {

const char* layer_name(AnnotationLayer layer) {
  return layer == AnnotationLayer::nuclei ? "nuclei" : "tissue";
}

namespace {

using nlohmann::json;

Point parse_position(const json& coords, std::size_t ordinal) {
  if (!coords.is_array() || coords.size() < 2 || !coords[0].is_number() ||
      !coords[1].is_number())
    fail(errc::malformed_json,
         "feature " + std::to_string(ordinal) + ": position must be an [x, y] array");
  return Point{coords[0].get<double>(), coords[1].get<double>()};
}

Ring parse_ring(const json& ring_json, std::size_t ordinal) {
  if (!ring_json.is_array())
    fail(errc::malformed_json, "feature " + std::to_string(ordinal) + ": ring must be an array");
  Ring ring;
  ring.reserve(ring_json.size());
  for (const auto& pos : ring_json) ring.push_back(parse_position(pos, ordinal));
  // GeoJSON closes rings by repeating the first vertex; store them open
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3)
    fail(errc::degenerate_ring, "feature " + std::to_string(ordinal) + ": ring with " +
                                    std::to_string(ring.size()) + " vertices");
  return ring;
}

int resolve_class(const json& feature, const Taxonomy& taxonomy, std::size_t ordinal) {
  if (!feature.contains("properties") || !feature["properties"].is_object() ||
      !feature["properties"].contains("classification") ||
      !feature["properties"]["classification"].is_object() ||
      !feature["properties"]["classification"].contains("name") ||
      !feature["properties"]["classification"]["name"].is_string())
    fail(errc::malformed_json, "feature " + std::to_string(ordinal) +
                                   ": missing properties.classification.name");
  const std::string name = feature["properties"]["classification"]["name"].get<std::string>();
  const auto index = taxonomy.find(name);
  if (!index)
    fail(errc::unknown_class_name,
         "'" + name + "' (feature " + std::to_string(ordinal) + ") not in taxonomy '" +
             taxonomy.name() + "'");
  return *index;
}

json position_json(const Point& p) { return json::array({p.x, p.y}); }

}  // namespace

AnnotationSet parse_annotation_file(const std::string& content, const Taxonomy& taxonomy,
                                    AnnotationLayer layer, const std::string& case_id,
                                    int width, int height) {
  if (width <= 0 || height <= 0)
    fail(errc::missing_dimensions,
         "case '" + case_id + "': dimensions must be positive (got " + std::to_string(width) +
             "x" + std::to_string(height) + ")");

  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    fail(errc::malformed_json, "case '" + case_id + "': " + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array())
    fail(errc::malformed_json,
         "case '" + case_id + "': expected a FeatureCollection with a features array");

  AnnotationSet set;
  set.case_id = case_id;
  set.width = width;
  set.height = height;

  std::size_t ordinal = 0;
  for (const auto& feature : doc["features"]) {
    if (!feature.is_object() || !feature.contains("geometry") || !feature["geometry"].is_object())
      fail(errc::malformed_json, "feature " + std::to_string(ordinal) + ": missing geometry");
    const json& geometry = feature["geometry"];
    const std::string geom_type = geometry.value("type", "");

    Annotation annotation;
    annotation.layer = layer;
    annotation.class_index = resolve_class(feature, taxonomy, ordinal);

    if (geom_type == "Polygon") {
      if (!geometry.contains("coordinates") || !geometry["coordinates"].is_array() ||
          geometry["coordinates"].empty())
        fail(errc::malformed_json,
             "feature " + std::to_string(ordinal) + ": Polygon without coordinates");
      for (const auto& ring_json : geometry["coordinates"])
        annotation.rings.push_back(parse_ring(ring_json, ordinal));
    } else if (geom_type == "Point") {
      if (!geometry.contains("coordinates"))
        fail(errc::malformed_json,
             "feature " + std::to_string(ordinal) + ": Point without coordinates");
      annotation.point = parse_position(geometry["coordinates"], ordinal);
    } else {
      fail(errc::malformed_json, "feature " + std::to_string(ordinal) +
                                     ": unsupported geometry type '" + geom_type + "'");
    }

    set.annotations.push_back(std::move(annotation));
    ++ordinal;
  }
  return set;
}

std::string write_annotation_file(const AnnotationSet& set, const Taxonomy& taxonomy) {
  json features = json::array();
  for (const Annotation& annotation : set.annotations) {
    json geometry;
    if (annotation.is_point()) {
      geometry["type"] = "Point";
      geometry["coordinates"] = position_json(annotation.point);
    } else {
      geometry["type"] = "Polygon";
      json rings = json::array();
      for (const Ring& ring : annotation.rings) {
        json ring_json = json::array();
        for (const Point& p : ring) ring_json.push_back(position_json(p));
        ring_json.push_back(position_json(ring.front()));  // GeoJSON closing vertex
        rings.push_back(std::move(ring_json));
      }
      geometry["coordinates"] = std::move(rings);
    }

    json feature;
    feature["type"] = "Feature";
    feature["geometry"] = std::move(geometry);
    feature["properties"]["classification"]["name"] = taxonomy.class_name(annotation.class_index);
    features.push_back(std::move(feature));
  }

  json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = std::move(features);
  return doc.dump(2) + "\n";
}

AnnotationSet map_taxonomy(const AnnotationSet& set, const TaxonomyMapping& mapping) {
  AnnotationSet out = set;
  for (Annotation& annotation : out.annotations)
    annotation.class_index = mapping.map_index(annotation.class_index);
  return out;
}

std::vector<Issue> validate(const AnnotationSet& set, const Taxonomy& taxonomy) {
  (void)taxonomy;  // class validity is enforced at parse time
  std::vector<Issue> issues;
  const double w = static_cast<double>(set.width);
  const double h = static_cast<double>(set.height);

  for (std::size_t ordinal = 0; ordinal < set.annotations.size(); ++ordinal) {
    const Annotation& annotation = set.annotations[ordinal];

    auto check_bounds = [&](const Point& p) -> bool {
      return p.x >= 0.0 && p.x <= w && p.y >= 0.0 && p.y <= h;
    };

    if (annotation.is_point()) {
      if (!check_bounds(annotation.point))
        issues.push_back({IssueKind::out_of_bounds, ordinal,
                          "point (" + std::to_string(annotation.point.x) + ", " +
                              std::to_string(annotation.point.y) + ") outside case bounds"});
      continue;
    }

    for (std::size_t r = 0; r < annotation.rings.size(); ++r) {
      const Ring& ring = annotation.rings[r];
      for (const Point& p : ring) {
        if (!check_bounds(p)) {
          issues.push_back({IssueKind::out_of_bounds, ordinal,
                            "ring " + std::to_string(r) + " vertex (" + std::to_string(p.x) +
                                ", " + std::to_string(p.y) + ") outside case bounds"});
          break;
        }
      }
      if (std::abs(ring_area(ring)) < 1e-12)
        issues.push_back(
            {IssueKind::zero_area, ordinal, "ring " + std::to_string(r) + " has zero area"});
      if (ring_self_intersects(ring))
        issues.push_back({IssueKind::self_intersection, ordinal,
                          "ring " + std::to_string(r) + " self-intersects"});
    }
  }
  return issues;
}

}  // namespace puma
