#include "floodplan/raster_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "floodplan/error.hpp"

namespace floodplan {

std::size_t TerrainGrid::active_count() const noexcept {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), 1));
}

void TerrainGrid::validate() const {
  if (!(geo.cell_size > 0.0)) throw DomainError("cell_size must be positive");
  if (geo.cell_count() == 0) throw DomainError("grid has no cells");
  if (elevation.size() != geo.cell_count() || active.size() != geo.cell_count())
    throw DomainError("terrain arrays do not match grid dimensions");
  for (std::size_t i = 0; i < elevation.size(); ++i) {
    if (active[i] && !std::isfinite(elevation[i]))
      throw DomainError("active cell " + std::to_string(i) + " has non-finite elevation");
  }
}

TerrainFormat parse_terrain_format(const std::string& name) {
  if (name == "esri_ascii" || name == "asc") return TerrainFormat::esri_ascii;
  if (name == "geotiff" || name == "tif" || name == "tiff") return TerrainFormat::geotiff;
  throw UnsupportedFormat("unknown terrain format '" + name + "'");
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_number(const std::string& token, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": expected a number, got '" + token + "'",
                     line);
  }
}

}  // namespace

RasterBand read_esri_ascii(std::istream& in) {
  std::map<std::string, std::pair<double, std::size_t>> header;
  std::string line;
  std::size_t line_no = 0;
  std::streampos data_start = in.tellg();

  static const char* known[] = {"ncols",     "nrows",     "xllcorner", "yllcorner",
                                "xllcenter", "yllcenter", "cellsize",  "nodata_value",
                                "dx",        "dy"};
  while (true) {
    data_start = in.tellg();
    if (!std::getline(in, line)) break;
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    const std::string k = lower(key);
    if (std::find(std::begin(known), std::end(known), k) == std::end(known)) {
      // First non-header line: must be data, which starts with a number.
      const char c = key.front();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
        in.clear();
        in.seekg(data_start);
        --line_no;
        break;
      }
      throw ParseError("line " + std::to_string(line_no) + ": unknown header key '" + key + "'",
                       line_no);
    }
    std::string value, extra;
    if (!(ls >> value) || (ls >> extra))
      throw ParseError("line " + std::to_string(line_no) + ": malformed header entry '" + line +
                           "'",
                       line_no);
    header[k] = {parse_number(value, line_no), line_no};
  }

  auto need = [&](const char* key) -> double {
    auto it = header.find(key);
    if (it == header.end())
      throw ParseError(std::string("missing header key '") + key + "'", line_no);
    return it->second.first;
  };

  RasterBand band;
  const double ncols = need("ncols");
  const double nrows = need("nrows");
  if (ncols < 1 || nrows < 1 || ncols != std::floor(ncols) || nrows != std::floor(nrows))
    throw ParseError("line " + std::to_string(header["ncols"].second) +
                         ": ncols/nrows must be positive integers",
                     header["ncols"].second);
  band.geo.n_cols = static_cast<std::size_t>(ncols);
  band.geo.n_rows = static_cast<std::size_t>(nrows);

  if (header.count("cellsize")) {
    band.geo.cell_size = header["cellsize"].first;
  } else if (header.count("dx") && header.count("dy")) {
    if (header["dx"].first != header["dy"].first)
      throw UnsupportedFormat("non-uniform cell size (dx != dy) is not supported");
    band.geo.cell_size = header["dx"].first;
  } else {
    throw ParseError("missing header key 'cellsize'", line_no);
  }
  if (!(band.geo.cell_size > 0))
    throw ParseError("line " + std::to_string(header["cellsize"].second) +
                         ": cellsize must be positive",
                     header["cellsize"].second);

  const double half = 0.5 * band.geo.cell_size;
  if (header.count("xllcorner"))
    band.geo.origin_x = header["xllcorner"].first;
  else
    band.geo.origin_x = need("xllcenter") - half;
  if (header.count("yllcorner"))
    band.geo.origin_y = header["yllcorner"].first;
  else
    band.geo.origin_y = need("yllcenter") - half;
  band.nodata = need("nodata_value");

  const std::size_t n = band.geo.cell_count();
  band.values.reserve(n);
  std::string token;
  std::size_t row_line = line_no;
  while (std::getline(in, line)) {
    ++row_line;
    std::istringstream ls(line);
    while (ls >> token) {
      if (band.values.size() == n)
        throw ParseError("line " + std::to_string(row_line) + ": more values than ncols*nrows",
                         row_line);
      band.values.push_back(parse_number(token, row_line));
    }
  }
  if (band.values.size() != n)
    throw ParseError("expected " + std::to_string(n) + " values, found " +
                         std::to_string(band.values.size()),
                     row_line);
  return band;
}

RasterBand read_esri_ascii(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open raster '" + path.string() + "'", path.string());
  return read_esri_ascii(in);
}

void write_esri_ascii(std::ostream& out, const GridGeometry& geo, std::span<const double> values,
                      double nodata) {
  out << "ncols " << geo.n_cols << "\n"
      << "nrows " << geo.n_rows << "\n"
      << std::setprecision(17) << "xllcorner " << geo.origin_x << "\n"
      << "yllcorner " << geo.origin_y << "\n"
      << "cellsize " << geo.cell_size << "\n"
      << "NODATA_value " << nodata << "\n";
  for (std::size_t r = 0; r < geo.n_rows; ++r) {
    for (std::size_t c = 0; c < geo.n_cols; ++c) {
      if (c) out << ' ';
      out << values[geo.index(r, c)];
    }
    out << '\n';
  }
}

TerrainGrid terrain_from_band(const RasterBand& band) {
  TerrainGrid grid;
  grid.geo = band.geo;
  grid.elevation = band.values;
  grid.active.assign(band.values.size(), 0);
  for (std::size_t i = 0; i < band.values.size(); ++i) {
    const double v = band.values[i];
    const bool is_nodata = v == band.nodata || !std::isfinite(v);
    grid.active[i] = is_nodata ? 0 : 1;
  }
  grid.validate();
  return grid;
}

TerrainGrid load_terrain(const std::filesystem::path& path, TerrainFormat format) {
  if (!std::filesystem::exists(path))
    throw ConfigError("terrain file not found: " + path.string(), path.string());
  switch (format) {
    case TerrainFormat::esri_ascii:
      return terrain_from_band(read_esri_ascii(path));
    case TerrainFormat::geotiff:
      return terrain_from_band(read_geotiff(path));
  }
  throw UnsupportedFormat("unknown terrain format");
}

namespace {

constexpr char kMagic[8] = {'F', 'P', 'G', 'R', 'I', 'D', '0', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ParseError("truncated binary raster");
  return value;
}

}  // namespace

void write_binary_raster(std::ostream& out, const GridGeometry& geo,
                         std::span<const double> values, double nodata) {
  out.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(geo.n_rows));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(geo.n_cols));
  put_le<double>(out, geo.origin_x);
  put_le<double>(out, geo.origin_y);
  put_le<double>(out, geo.cell_size);
  put_le<double>(out, nodata);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::string encode_binary_raster(const GridGeometry& geo, std::span<const double> values,
                                 double nodata) {
  std::ostringstream out(std::ios::binary);
  write_binary_raster(out, geo, values, nodata);
  return std::move(out).str();
}

RasterBand read_binary_raster(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw ParseError("not a binary floodplan raster (bad magic)");
  RasterBand band;
  band.geo.n_rows = get_le<std::uint32_t>(in);
  band.geo.n_cols = get_le<std::uint32_t>(in);
  band.geo.origin_x = get_le<double>(in);
  band.geo.origin_y = get_le<double>(in);
  band.geo.cell_size = get_le<double>(in);
  band.nodata = get_le<double>(in);
  band.values.resize(band.geo.cell_count());
  in.read(reinterpret_cast<char*>(band.values.data()),
          static_cast<std::streamsize>(band.values.size() * sizeof(double)));
  if (!in) throw ParseError("truncated binary raster payload");
  return band;
}

}  // namespace floodplan
