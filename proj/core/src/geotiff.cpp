// Baseline TIFF subset sufficient for single-band DEMs: classic (non-Big)
// TIFF, either byte order, uncompressed strips or tiles, chunky planar
// config, 8/16/32/64-bit integer or float samples.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "floodplan/error.hpp"
#include "floodplan/raster_io.hpp"

namespace floodplan {
namespace {

enum Tag : std::uint16_t {
  kImageWidth = 256,
  kImageLength = 257,
  kBitsPerSample = 258,
  kCompression = 259,
  kPhotometric = 262,
  kStripOffsets = 273,
  kSamplesPerPixel = 277,
  kRowsPerStrip = 278,
  kStripByteCounts = 279,
  kPlanarConfig = 284,
  kTileWidth = 322,
  kTileLength = 323,
  kTileOffsets = 324,
  kTileByteCounts = 325,
  kSampleFormat = 339,
  kModelPixelScale = 33550,
  kModelTiepoint = 33922,
  kGdalNodata = 42113,
};

std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case 1: case 2: case 6: case 7: return 1;
    case 3: case 8: return 2;
    case 4: case 9: case 11: return 4;
    case 5: case 10: case 12: return 8;
    default: return 0;
  }
}

class Reader {
 public:
  explicit Reader(std::vector<unsigned char> bytes) : data_(std::move(bytes)) {
    if (data_.size() < 8) throw ParseError("file too small to be a TIFF");
    if (data_[0] == 'I' && data_[1] == 'I')
      big_endian_ = false;
    else if (data_[0] == 'M' && data_[1] == 'M')
      big_endian_ = true;
    else
      throw ParseError("missing TIFF byte-order mark");
    const auto magic = u16(2);
    if (magic == 43) throw UnsupportedFormat("BigTIFF is not supported");
    if (magic != 42) throw ParseError("bad TIFF magic number");
  }

  std::uint64_t uint(std::size_t off, std::size_t n) const {
    check(off, n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = big_endian_ ? i : n - 1 - i;
      v = (v << 8) | data_[off + k];
    }
    return v;
  }
  std::uint16_t u16(std::size_t off) const { return static_cast<std::uint16_t>(uint(off, 2)); }
  std::uint32_t u32(std::size_t off) const { return static_cast<std::uint32_t>(uint(off, 4)); }

  double value(std::uint16_t type, std::size_t off) const {
    switch (type) {
      case 1: case 7: return static_cast<double>(uint(off, 1));
      case 6: return static_cast<double>(static_cast<std::int8_t>(uint(off, 1)));
      case 3: return static_cast<double>(uint(off, 2));
      case 8: return static_cast<double>(static_cast<std::int16_t>(uint(off, 2)));
      case 4: return static_cast<double>(uint(off, 4));
      case 9: return static_cast<double>(static_cast<std::int32_t>(uint(off, 4)));
      case 5: return static_cast<double>(uint(off, 4)) / static_cast<double>(uint(off + 4, 4));
      case 10:
        return static_cast<double>(static_cast<std::int32_t>(uint(off, 4))) /
               static_cast<double>(static_cast<std::int32_t>(uint(off + 4, 4)));
      case 11: return std::bit_cast<float>(static_cast<std::uint32_t>(uint(off, 4)));
      case 12: return std::bit_cast<double>(uint(off, 8));
      default: throw ParseError("unsupported TIFF field type " + std::to_string(type));
    }
  }

  struct Entry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::size_t offset = 0;  // where the values live
  };

  std::map<std::uint16_t, Entry> read_ifd() const {
    const std::size_t ifd = u32(4);
    const std::size_t n = u16(ifd);
    std::map<std::uint16_t, Entry> entries;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t e = ifd + 2 + 12 * i;
      Entry entry;
      const auto tag = u16(e);
      entry.type = u16(e + 2);
      entry.count = u32(e + 4);
      const std::size_t bytes = type_size(entry.type) * entry.count;
      entry.offset = bytes <= 4 ? e + 8 : u32(e + 8);
      entries[tag] = entry;
    }
    return entries;
  }

  std::vector<double> values(const Entry& e) const {
    std::vector<double> out;
    const std::size_t sz = type_size(e.type);
    for (std::size_t i = 0; i < e.count; ++i) out.push_back(value(e.type, e.offset + i * sz));
    return out;
  }

  std::string ascii(const Entry& e) const {
    check(e.offset, e.count);
    std::string s(reinterpret_cast<const char*>(&data_[e.offset]), e.count);
    while (!s.empty() && (s.back() == '\0' || s.back() == ' ')) s.pop_back();
    return s;
  }

  void check(std::size_t off, std::size_t n) const {
    if (off + n > data_.size() || off + n < off) throw ParseError("TIFF offset out of range");
  }

 private:
  std::vector<unsigned char> data_;
  bool big_endian_ = false;
};

double sample_value(const Reader& r, std::size_t off, int bits, int format) {
  const std::size_t n = static_cast<std::size_t>(bits / 8);
  const std::uint64_t raw = r.uint(off, n);
  if (format == 3) {
    if (bits == 32) return std::bit_cast<float>(static_cast<std::uint32_t>(raw));
    if (bits == 64) return std::bit_cast<double>(raw);
  } else if (format == 2) {
    switch (bits) {
      case 8: return static_cast<std::int8_t>(raw);
      case 16: return static_cast<std::int16_t>(raw);
      case 32: return static_cast<std::int32_t>(raw);
      case 64: return static_cast<double>(static_cast<std::int64_t>(raw));
    }
  } else if (format == 1) {
    return static_cast<double>(raw);
  }
  throw UnsupportedFormat("unsupported TIFF sample format " + std::to_string(format) + "/" +
                          std::to_string(bits));
}

}  // namespace

RasterBand read_geotiff(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open GeoTIFF '" + path.string() + "'", path.string());
  Reader r(std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {}));
  const auto ifd = r.read_ifd();

  auto scalar = [&](std::uint16_t tag, double fallback, bool required) {
    auto it = ifd.find(tag);
    if (it == ifd.end()) {
      if (required) throw ParseError("GeoTIFF missing required tag " + std::to_string(tag));
      return fallback;
    }
    return r.values(it->second).at(0);
  };

  const auto width = static_cast<std::size_t>(scalar(kImageWidth, 0, true));
  const auto height = static_cast<std::size_t>(scalar(kImageLength, 0, true));
  const int bits = static_cast<int>(scalar(kBitsPerSample, 1, false));
  const int compression = static_cast<int>(scalar(kCompression, 1, false));
  const int spp = static_cast<int>(scalar(kSamplesPerPixel, 1, false));
  const int format = static_cast<int>(scalar(kSampleFormat, 1, false));
  if (compression != 1)
    throw UnsupportedFormat("compressed GeoTIFF (compression=" + std::to_string(compression) +
                            ") is not supported");
  if (spp != 1) throw UnsupportedFormat("only single-band GeoTIFF is supported");
  if (bits % 8 != 0 || bits == 0 || bits > 64)
    throw UnsupportedFormat("unsupported bits per sample " + std::to_string(bits));

  RasterBand band;
  band.geo.n_cols = width;
  band.geo.n_rows = height;
  band.nodata = -9999.0;

  auto scale_it = ifd.find(kModelPixelScale);
  auto tie_it = ifd.find(kModelTiepoint);
  if (scale_it == ifd.end() || tie_it == ifd.end())
    throw ParseError("GeoTIFF lacks ModelPixelScale/ModelTiepoint georeferencing");
  const auto scale = r.values(scale_it->second);
  const auto tie = r.values(tie_it->second);
  if (scale.size() < 2 || tie.size() < 6) throw ParseError("malformed GeoTIFF georeferencing");
  if (std::abs(scale[0] - std::abs(scale[1])) > 1e-9 * std::abs(scale[0]))
    throw UnsupportedFormat("non-uniform cell size is not supported");
  band.geo.cell_size = scale[0];
  const double top_left_x = tie[3] - tie[0] * scale[0];
  const double top_left_y = tie[4] + tie[1] * std::abs(scale[1]);
  band.geo.origin_x = top_left_x;
  band.geo.origin_y = top_left_y - static_cast<double>(height) * band.geo.cell_size;

  if (auto it = ifd.find(kGdalNodata); it != ifd.end()) {
    const std::string s = r.ascii(it->second);
    try {
      band.nodata = std::stod(s);
    } catch (const std::exception&) {
      throw ParseError("GDAL_NODATA tag is not numeric: '" + s + "'");
    }
  }

  band.values.assign(width * height, band.nodata);
  const std::size_t bytes_per = static_cast<std::size_t>(bits / 8);

  if (ifd.count(kTileOffsets)) {
    const auto tw = static_cast<std::size_t>(scalar(kTileWidth, 0, true));
    const auto th = static_cast<std::size_t>(scalar(kTileLength, 0, true));
    const auto offsets = r.values(ifd.at(kTileOffsets));
    const std::size_t across = (width + tw - 1) / tw;
    for (std::size_t t = 0; t < offsets.size(); ++t) {
      const std::size_t tr = t / across, tc = t % across;
      const auto base = static_cast<std::size_t>(offsets[t]);
      for (std::size_t y = 0; y < th; ++y) {
        const std::size_t row = tr * th + y;
        if (row >= height) break;
        for (std::size_t x = 0; x < tw; ++x) {
          const std::size_t col = tc * tw + x;
          if (col >= width) continue;
          band.values[row * width + col] =
              sample_value(r, base + (y * tw + x) * bytes_per, bits, format);
        }
      }
    }
  } else {
    auto off_it = ifd.find(kStripOffsets);
    if (off_it == ifd.end()) throw ParseError("GeoTIFF has neither strips nor tiles");
    const auto offsets = r.values(off_it->second);
    const auto rows_per_strip =
        static_cast<std::size_t>(scalar(kRowsPerStrip, static_cast<double>(height), false));
    for (std::size_t s = 0; s < offsets.size(); ++s) {
      const auto base = static_cast<std::size_t>(offsets[s]);
      for (std::size_t y = 0; y < rows_per_strip; ++y) {
        const std::size_t row = s * rows_per_strip + y;
        if (row >= height) break;
        for (std::size_t col = 0; col < width; ++col)
          band.values[row * width + col] =
              sample_value(r, base + (y * width + col) * bytes_per, bits, format);
      }
    }
  }
  return band;
}

namespace {

struct IfdEntry {
  std::uint16_t tag;
  std::uint16_t type;
  std::uint32_t count;
  std::vector<unsigned char> payload;
};

template <typename T>
void append_le(std::vector<unsigned char>& buf, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

IfdEntry short_entry(std::uint16_t tag, std::uint16_t v) {
  IfdEntry e{tag, 3, 1, {}};
  append_le(e.payload, v);
  return e;
}
IfdEntry long_entry(std::uint16_t tag, std::uint32_t v) {
  IfdEntry e{tag, 4, 1, {}};
  append_le(e.payload, v);
  return e;
}
IfdEntry double_entry(std::uint16_t tag, const std::vector<double>& v) {
  IfdEntry e{tag, 12, static_cast<std::uint32_t>(v.size()), {}};
  for (double d : v) append_le(e.payload, d);
  return e;
}

}  // namespace

void write_geotiff(const std::filesystem::path& path, const RasterBand& band) {
  const std::size_t rows = band.geo.n_rows, cols = band.geo.n_cols;
  std::vector<unsigned char> out = {'I', 'I', 42, 0, 0, 0, 0, 0};
  const auto image_offset = static_cast<std::uint32_t>(out.size());
  for (double v : band.values) append_le(out, v);

  std::string nodata = std::to_string(band.nodata);
  IfdEntry nodata_entry{kGdalNodata, 2, static_cast<std::uint32_t>(nodata.size() + 1), {}};
  nodata_entry.payload.assign(nodata.begin(), nodata.end());
  nodata_entry.payload.push_back(0);

  const double top = band.geo.origin_y + band.geo.height();
  std::vector<IfdEntry> entries = {
      long_entry(kImageWidth, static_cast<std::uint32_t>(cols)),
      long_entry(kImageLength, static_cast<std::uint32_t>(rows)),
      short_entry(kBitsPerSample, 64),
      short_entry(kCompression, 1),
      short_entry(kPhotometric, 1),
      long_entry(kStripOffsets, image_offset),
      short_entry(kSamplesPerPixel, 1),
      long_entry(kRowsPerStrip, static_cast<std::uint32_t>(rows)),
      long_entry(kStripByteCounts, static_cast<std::uint32_t>(rows * cols * 8)),
      short_entry(kPlanarConfig, 1),
      short_entry(kSampleFormat, 3),
      double_entry(kModelPixelScale, {band.geo.cell_size, band.geo.cell_size, 0.0}),
      double_entry(kModelTiepoint, {0, 0, 0, band.geo.origin_x, top, 0}),
      nodata_entry,
  };

  if (out.size() % 2) out.push_back(0);
  const auto ifd_offset = static_cast<std::uint32_t>(out.size());
  std::memcpy(&out[4], &ifd_offset, 4);

  std::size_t extra = ifd_offset + 2 + entries.size() * 12 + 4;
  std::vector<unsigned char> ifd, tail;
  append_le(ifd, static_cast<std::uint16_t>(entries.size()));
  for (const auto& e : entries) {
    append_le(ifd, e.tag);
    append_le(ifd, e.type);
    append_le(ifd, e.count);
    if (e.payload.size() <= 4) {
      auto p = e.payload;
      p.resize(4, 0);
      ifd.insert(ifd.end(), p.begin(), p.end());
    } else {
      append_le(ifd, static_cast<std::uint32_t>(extra + tail.size()));
      tail.insert(tail.end(), e.payload.begin(), e.payload.end());
      if (tail.size() % 2) tail.push_back(0);
    }
  }
  append_le(ifd, std::uint32_t{0});
  out.insert(out.end(), ifd.begin(), ifd.end());
  out.insert(out.end(), tail.begin(), tail.end());

  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write GeoTIFF '" + path.string() + "'", path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

}  // namespace floodplan
