#pragma once

#include <cstddef>
#include <vector>

#include "floodplan/grid.hpp"

namespace floodplan {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

using Ring = std::vector<Point>;

/// A polygon as a set of rings evaluated with the even-odd rule, so holes
/// and multipolygon parts can share one representation. Rings may or may not
/// repeat the first vertex at the end.
struct Polygon {
  std::vector<Ring> rings;

  bool empty() const noexcept;
  /// Net area (outer rings minus holes) for well-formed input.
  double area() const noexcept;
};

struct BoundingBox {
  double min_x, min_y, max_x, max_y;
};

BoundingBox bounding_box(const Polygon& polygon);

/// Even-odd crossing test. Points exactly on an edge resolve by the
/// half-open rule (left/bottom edges inside, right/top outside), which makes
/// two polygons sharing an edge claim each boundary cell exactly once.
bool point_in_polygon(const Polygon& polygon, Point p) noexcept;

/// Row-major indices of the cells whose centers fall inside the polygon.
std::vector<std::size_t> cells_in_polygon(const Polygon& polygon, const GridGeometry& geo);

Polygon rectangle(double min_x, double min_y, double max_x, double max_y);

}  // namespace floodplan
