#include "floodplan/exposure.hpp"

#include <algorithm>
#include <cmath>

#include "floodplan/error.hpp"

namespace floodplan::exposure {

const char* to_string(ExposureClass c) noexcept {
  switch (c) {
    case ExposureClass::low: return "low";
    case ExposureClass::medium: return "medium";
    case ExposureClass::high: return "high";
  }
  return "?";
}

BufferStats buffer_stats(std::span<const double> depths) {
  BufferStats s;
  const std::size_t k = depths.size();
  if (k == 0) {
    s.empty_buffer = true;
    return s;
  }
  double sum = 0.0;
  for (double d : depths) sum += d;
  s.mean = sum / static_cast<double>(k);
  const std::size_t rank = (9 * k + 9) / 10;  // ceil(0.9 k), 1-based
  std::vector<double> sorted(depths.begin(), depths.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   sorted.end());
  s.p90 = sorted[rank - 1];
  return s;
}

BufferStats buffer_stats(std::span<const double> max_depth,
                         const geo::BuildingFootprint& building) {
  std::vector<double> depths;
  depths.reserve(building.buffer_cells.size());
  for (std::size_t c : building.buffer_cells) depths.push_back(max_depth[c]);
  return buffer_stats(depths);
}

ExposureClass classify(double mean, double p90) {
  if (!(mean >= 0.0) || !(p90 >= 0.0) || !std::isfinite(mean) || !std::isfinite(p90))
    throw DomainError("exposure statistics must be finite and non-negative");
  const bool deep_mean = mean >= kMeanThreshold;
  const bool deep_p90 = p90 >= kP90Threshold;
  if (deep_mean && deep_p90) return ExposureClass::high;
  if (!deep_mean && !deep_p90) return ExposureClass::low;
  if (!deep_mean) return ExposureClass::medium;
  return mean < kP90Threshold ? ExposureClass::medium : ExposureClass::high;
}

bool is_unlisted(double mean, double p90) noexcept {
  return mean >= kP90Threshold && p90 < kP90Threshold;
}

std::vector<ExposureRecord> classify_all(std::span<const double> max_depth,
                                         std::span<const geo::BuildingFootprint> buildings) {
  std::vector<ExposureRecord> out;
  out.reserve(buildings.size());
  for (const auto& b : buildings) {
    const BufferStats s = buffer_stats(max_depth, b);
    ExposureRecord r;
    r.building_id = b.id;
    r.use_class = b.use_class;
    r.mean_depth = s.mean;
    r.p90_depth = s.p90;
    r.empty_buffer = s.empty_buffer;
    r.exposure_class = s.empty_buffer ? ExposureClass::low : classify(s.mean, s.p90);
    r.unlisted_combination = !s.empty_buffer && is_unlisted(s.mean, s.p90);
    out.push_back(std::move(r));
  }
  return out;
}

ExposureCounts count_classes(std::span<const ExposureRecord> records) {
  ExposureCounts c;
  for (const auto& r : records) {
    switch (r.exposure_class) {
      case ExposureClass::low: ++c.low; break;
      case ExposureClass::medium: ++c.medium; break;
      case ExposureClass::high: ++c.high; break;
    }
  }
  return c;
}

}  // namespace floodplan::exposure
