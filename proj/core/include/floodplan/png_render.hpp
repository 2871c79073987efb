#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "floodplan/grid.hpp"

namespace floodplan {

struct DepthRamp {
  double min_depth = 0.01;  // m; shallower cells are transparent
  double max_depth = 1.0;   // m; deeper cells take the last colour
  std::uint8_t alpha = 210;
};

/// RGBA colour of a depth on a perceptually uniform ramp whose thirds are
/// pinned to the exposure thresholds 0.10 m and 0.30 m.
std::array<std::uint8_t, 4> depth_colour(double depth, const DepthRamp& ramp = {});

/// Encodes a depth raster as an RGBA PNG (row 0 north) with a tEXt chunk
/// "georef" holding {origin_x, origin_y, cell_size, n_rows, n_cols} as JSON.
std::string render_depth_png(const GridGeometry& geo, std::span<const double> depth,
                             const DepthRamp& ramp = {});

}  // namespace floodplan
