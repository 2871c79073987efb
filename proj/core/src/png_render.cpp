#include "floodplan/png_render.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>
#include <png.h>

#include "floodplan/error.hpp"

namespace floodplan {

namespace {

// Viridis samples at t = 0, 1/6, ..., 1.
constexpr std::array<std::array<double, 3>, 7> kStops{{{68, 1, 84},
                                                       {68, 57, 131},
                                                       {49, 104, 142},
                                                       {33, 145, 140},
                                                       {53, 183, 121},
                                                       {144, 215, 67},
                                                       {253, 231, 37}}};

double ramp_position(double d, const DepthRamp& r) {
  const double t1 = 0.10, t2 = 0.30;
  if (d <= t1) return (d - r.min_depth) / (t1 - r.min_depth) / 3.0;
  if (d <= t2) return 1.0 / 3.0 + (d - t1) / (t2 - t1) / 3.0;
  if (r.max_depth <= t2) return 1.0;
  return 2.0 / 3.0 + std::min(1.0, (d - t2) / (r.max_depth - t2)) / 3.0;
}

void write_to_string(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

void flush_noop(png_structp) {}

}  // namespace

std::array<std::uint8_t, 4> depth_colour(double depth, const DepthRamp& ramp) {
  if (!(depth >= ramp.min_depth)) return {0, 0, 0, 0};
  const double t = std::clamp(ramp_position(depth, ramp), 0.0, 1.0) * (kStops.size() - 1);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), kStops.size() - 2);
  const double f = t - static_cast<double>(k);
  std::array<std::uint8_t, 4> rgba{};
  for (int c = 0; c < 3; ++c)
    rgba[c] = static_cast<std::uint8_t>(
        std::lround(kStops[k][c] + f * (kStops[k + 1][c] - kStops[k][c])));
  rgba[3] = ramp.alpha;
  return rgba;
}

std::string render_depth_png(const GridGeometry& geo, std::span<const double> depth,
                             const DepthRamp& ramp) {
  if (depth.size() != geo.cell_count()) throw DomainError("depth raster does not match the grid");
  if (geo.cell_count() == 0) throw DomainError("cannot render an empty raster");

  std::vector<std::uint8_t> pixels(geo.cell_count() * 4);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const auto c = depth_colour(depth[i], ramp);
    std::copy(c.begin(), c.end(), pixels.begin() + static_cast<std::ptrdiff_t>(4 * i));
  }

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("cannot create PNG writer");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("cannot create PNG info");
  }
  std::string out;
  const std::string georef = nlohmann::json{{"origin_x", geo.origin_x},
                                            {"origin_y", geo.origin_y},
                                            {"cell_size", geo.cell_size},
                                            {"n_rows", geo.n_rows},
                                            {"n_cols", geo.n_cols}}
                                 .dump();
  std::vector<png_bytep> rows(geo.n_rows);
  for (std::size_t r = 0; r < geo.n_rows; ++r) rows[r] = pixels.data() + r * geo.n_cols * 4;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encoding failed");
  }
  png_set_write_fn(png, &out, write_to_string, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(geo.n_cols),
               static_cast<png_uint_32>(geo.n_rows), 8, PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_text text{};
  text.compression = PNG_TEXT_COMPRESSION_NONE;
  text.key = const_cast<char*>("georef");
  text.text = const_cast<char*>(georef.c_str());
  text.text_length = georef.size();
  png_set_text(png, info, &text, 1);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace floodplan
