#pragma once

#include <vector>

namespace puma {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
};

/// Open vertex list: the closing edge back to the first vertex is implicit.
using Ring = std::vector<Point>;

struct Box {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;
};

/// Signed shoelace area (positive for counter-clockwise vertex order).
double ring_area(const Ring& ring);

Box ring_bbox(const Ring& ring);

/// Whether any two non-adjacent edges of the ring properly intersect or
/// overlap. O(n^2) segment pairs; used for diagnostics only.
bool ring_self_intersects(const Ring& ring);

}  // namespace puma
