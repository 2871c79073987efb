#include "floodplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace floodplan {

bool Polygon::empty() const noexcept {
  return std::all_of(rings.begin(), rings.end(), [](const Ring& r) { return r.size() < 3; });
}

namespace {

double signed_ring_area(const Ring& ring) noexcept {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

}  // namespace

double Polygon::area() const noexcept {
  if (rings.empty()) return 0.0;
  // Largest ring is the shell; the others are treated as holes when they lie
  // inside it and as extra parts otherwise.
  std::size_t shell = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < rings.size(); ++i) {
    const double a = std::abs(signed_ring_area(rings[i]));
    if (a > best) best = a, shell = i;
  }
  Polygon outer{{rings[shell]}};
  double total = best;
  for (std::size_t i = 0; i < rings.size(); ++i) {
    if (i == shell || rings[i].empty()) continue;
    const double a = std::abs(signed_ring_area(rings[i]));
    total += point_in_polygon(outer, rings[i].front()) ? -a : a;
  }
  return total;
}

BoundingBox bounding_box(const Polygon& polygon) {
  BoundingBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  for (const auto& ring : polygon.rings)
    for (const auto& p : ring) {
      b.min_x = std::min(b.min_x, p.x);
      b.min_y = std::min(b.min_y, p.y);
      b.max_x = std::max(b.max_x, p.x);
      b.max_y = std::max(b.max_y, p.y);
    }
  return b;
}

bool point_in_polygon(const Polygon& polygon, Point p) noexcept {
  bool inside = false;
  for (const auto& ring : polygon.rings) {
    const std::size_t n = ring.size();
    if (n < 3) continue;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = ring[i];
      const Point& b = ring[j];
      // Half-open in y; the x comparison is strict so the right edge is out.
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x_cross) inside = !inside;
      }
    }
  }
  return inside;
}

std::vector<std::size_t> cells_in_polygon(const Polygon& polygon, const GridGeometry& geo) {
  std::vector<std::size_t> cells;
  if (polygon.empty() || geo.cell_count() == 0) return cells;
  const BoundingBox bb = bounding_box(polygon);
  const double cs = geo.cell_size;
  const double top = geo.origin_y + geo.height();

  auto clamp_index = [](double v, std::size_t n) -> std::ptrdiff_t {
    if (v < 0) return 0;
    if (v > static_cast<double>(n)) return static_cast<std::ptrdiff_t>(n);
    return static_cast<std::ptrdiff_t>(v);
  };
  const auto c0 = clamp_index(std::floor((bb.min_x - geo.origin_x) / cs - 0.5), geo.n_cols);
  const auto c1 = clamp_index(std::ceil((bb.max_x - geo.origin_x) / cs + 0.5), geo.n_cols);
  const auto r0 = clamp_index(std::floor((top - bb.max_y) / cs - 0.5), geo.n_rows);
  const auto r1 = clamp_index(std::ceil((top - bb.min_y) / cs + 0.5), geo.n_rows);

  for (auto r = r0; r < r1; ++r) {
    const double y = geo.center_y(static_cast<std::size_t>(r));
    for (auto c = c0; c < c1; ++c) {
      const double x = geo.center_x(static_cast<std::size_t>(c));
      if (point_in_polygon(polygon, {x, y}))
        cells.push_back(geo.index(static_cast<std::size_t>(r), static_cast<std::size_t>(c)));
    }
  }
  return cells;
}

Polygon rectangle(double min_x, double min_y, double max_x, double max_y) {
  return Polygon{{{{min_x, min_y}, {max_x, min_y}, {max_x, max_y}, {min_x, max_y}}}};
}

}  // namespace floodplan
