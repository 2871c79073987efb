#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "floodplan/grid.hpp"

namespace floodplan {

enum class TerrainFormat { esri_ascii, geotiff };

TerrainFormat parse_terrain_format(const std::string& name);

/// A single-band raster as read from disk; `nodata` cells keep the header
/// sentinel value.
struct RasterBand {
  GridGeometry geo;
  std::vector<double> values;
  double nodata = -9999.0;
};

RasterBand read_esri_ascii(std::istream& in);
RasterBand read_esri_ascii(const std::filesystem::path& path);
void write_esri_ascii(std::ostream& out, const GridGeometry& geo,
                      std::span<const double> values, double nodata = -9999.0);

/// Minimal baseline-TIFF reader: one band, uncompressed, strips or tiles,
/// integer or IEEE float samples, georeferenced through the
/// ModelPixelScale/ModelTiepoint tags and GDAL_NODATA.
RasterBand read_geotiff(const std::filesystem::path& path);
void write_geotiff(const std::filesystem::path& path, const RasterBand& band);

/// Loads a DEM; nodata cells become inactive.
TerrainGrid load_terrain(const std::filesystem::path& path, TerrainFormat format);
TerrainGrid terrain_from_band(const RasterBand& band);

/// Compact binary grid: 8-byte magic "FPGRID01", uint32 rows, uint32 cols,
/// float64 origin_x, origin_y, cell_size, nodata, then rows*cols float64
/// values in row-major order (row 0 north). Little-endian.
void write_binary_raster(std::ostream& out, const GridGeometry& geo,
                         std::span<const double> values, double nodata = -9999.0);
std::string encode_binary_raster(const GridGeometry& geo, std::span<const double> values,
                                 double nodata = -9999.0);
RasterBand read_binary_raster(std::istream& in);

}  // namespace floodplan
