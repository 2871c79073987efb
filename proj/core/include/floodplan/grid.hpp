#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace floodplan {

/// Georeferencing of a uniform raster. Row 0 is the northernmost row (the
/// ESRI ASCII / GeoTIFF storage order); `origin_x/origin_y` is the lower-left
/// corner of the lower-left cell.
struct GridGeometry {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1.0;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;

  std::size_t cell_count() const noexcept { return n_rows * n_cols; }
  double cell_area() const noexcept { return cell_size * cell_size; }
  double width() const noexcept { return static_cast<double>(n_cols) * cell_size; }
  double height() const noexcept { return static_cast<double>(n_rows) * cell_size; }

  std::size_t index(std::size_t row, std::size_t col) const noexcept {
    return row * n_cols + col;
  }
  std::size_t row_of(std::size_t cell) const noexcept { return cell / n_cols; }
  std::size_t col_of(std::size_t cell) const noexcept { return cell % n_cols; }

  double center_x(std::size_t col) const noexcept {
    return origin_x + (static_cast<double>(col) + 0.5) * cell_size;
  }
  double center_y(std::size_t row) const noexcept {
    return origin_y + (static_cast<double>(n_rows - row) - 0.5) * cell_size;
  }

  bool operator==(const GridGeometry&) const = default;
};

/// Ground elevation raster plus the computational mask. Inactive cells are
/// nodata cells and building holes; they carry no water.
struct TerrainGrid {
  GridGeometry geo;
  std::vector<double> elevation;
  std::vector<std::uint8_t> active;

  std::size_t active_count() const noexcept;

  /// Throws DomainError when the invariants (positive cell size, matching
  /// array sizes, finite elevation on active cells) do not hold.
  void validate() const;
};

}  // namespace floodplan
