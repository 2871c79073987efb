#pragma once

#include <span>
#include <string>
#include <vector>

#include "floodplan/geodata.hpp"

namespace floodplan::exposure {

enum class ExposureClass : int { low = 0, medium = 1, high = 2 };

const char* to_string(ExposureClass c) noexcept;

/// Thresholds of the exposure decision table (metres).
inline constexpr double kMeanThreshold = 0.10;
inline constexpr double kP90Threshold = 0.30;

struct BufferStats {
  double mean = 0.0;
  double p90 = 0.0;
  bool empty_buffer = false;
};

/// Mean and nearest-rank 90th percentile (1-based rank ceil(0.9 k)).
BufferStats buffer_stats(std::span<const double> depths);
BufferStats buffer_stats(std::span<const double> max_depth, const geo::BuildingFootprint& building);

/// Decision table:
///   mean < 0.10, p90 < 0.30            -> low
///   mean < 0.10, p90 >= 0.30           -> medium
///   0.10 <= mean < 0.30, p90 < 0.30    -> medium
///   mean >= 0.10, p90 >= 0.30          -> high
///   mean >= 0.30, p90 < 0.30           -> high (combination the table leaves
///                                         blank; flagged by is_unlisted)
/// Throws DomainError on negative or non-finite input.
ExposureClass classify(double mean, double p90);
bool is_unlisted(double mean, double p90) noexcept;

struct ExposureRecord {
  std::string building_id;
  geo::UseClass use_class = geo::UseClass::residential;
  double mean_depth = 0.0;
  double p90_depth = 0.0;
  ExposureClass exposure_class = ExposureClass::low;
  bool empty_buffer = false;
  bool unlisted_combination = false;
};

std::vector<ExposureRecord> classify_all(std::span<const double> max_depth,
                                         std::span<const geo::BuildingFootprint> buildings);

struct ExposureCounts {
  std::size_t low = 0;
  std::size_t medium = 0;
  std::size_t high = 0;

  std::size_t inundated() const noexcept { return medium + high; }
};

ExposureCounts count_classes(std::span<const ExposureRecord> records);

}  // namespace floodplan::exposure
