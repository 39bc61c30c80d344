#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "occuplan/raster.hpp"

namespace occuplan {

/// Sentinel for "no occupancy / no departure within the horizon". Ordered
/// above every finite frame index, so plain integer comparisons work.
inline constexpr std::uint32_t kTimeInfinity =
    std::numeric_limits<std::uint32_t>::max();

/// H x W array of frame-indexed times; entries are frame indices or
/// kTimeInfinity.
class TimeField {
 public:
  TimeField() : height_(0), width_(0) {}
  TimeField(int height, int width, std::uint32_t fill = kTimeInfinity);

  int height() const { return height_; }
  int width() const { return width_; }

  std::uint32_t at(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  void set(int row, int col, std::uint32_t v) {
    values_[static_cast<std::size_t>(row) * width_ + col] = v;
  }

  std::span<const std::uint32_t> values() const { return values_; }
  std::span<std::uint32_t> values() { return values_; }

  friend bool operator==(const TimeField& a, const TimeField& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           a.values_ == b.values_;
  }

 private:
  int height_;
  int width_;
  std::vector<std::uint32_t> values_;
};

/// Per-pixel list of up to n_L alternating occupancy/departure frame
/// indices; unused slots hold kTimeInfinity and finite entries are
/// prefix-contiguous.
class OccupancyList {
 public:
  OccupancyList(int height, int width, int capacity);

  int height() const { return height_; }
  int width() const { return width_; }
  int capacity() const { return capacity_; }

  std::uint32_t at(int row, int col, int slot) const {
    return values_[index(row, col, slot)];
  }
  void set(int row, int col, int slot, std::uint32_t v) {
    values_[index(row, col, slot)] = v;
  }

  std::span<const std::uint32_t> values() const { return values_; }

  friend bool operator==(const OccupancyList& a, const OccupancyList& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           a.capacity_ == b.capacity_ && a.values_ == b.values_;
  }

 private:
  std::size_t index(int row, int col, int slot) const {
    return (static_cast<std::size_t>(row) * width_ + col) * capacity_ + slot;
  }

  int height_;
  int width_;
  int capacity_;
  std::vector<std::uint32_t> values_;
};

/// Channel-difference thresholds on the L1-over-RGB scale (0..765).
struct Thresholds {
  int tau_occupancy = 90;
  int tau_departure = 45;

  void validate() const;
};

/// L1 distance between two RGB triples, range 0..765.
int pixel_difference(Rgb a, Rgb b);

/// Scans a predicted frame sequence (I_0..I_T) against a background image.
/// Per pixel, the first field holds the smallest t whose difference reaches
/// tau_occupancy; the second holds the smallest t at or after it whose
/// difference falls to tau_departure or below. Pixels that never trigger
/// hold kTimeInfinity.
std::pair<TimeField, TimeField> compute_t2no_t2nd(
    std::span<const Frame> prediction, const Frame& background,
    const Thresholds& thresholds);

/// Repeats the occupancy/departure scan until the horizon is exhausted or
/// capacity slots are filled. capacity must be even and >= 2; the first two
/// slots per pixel match compute_t2no_t2nd.
OccupancyList compute_occupancy_list(std::span<const Frame> prediction,
                                     const Frame& background,
                                     const Thresholds& thresholds,
                                     int capacity);

/// Weighted squared error between two field pairs with infinity entries
/// mapped to horizon_cap before differencing:
/// alpha*sum((O_a-O_b)^2) + beta*sum((D_a-D_b)^2).
double prediction_error(const TimeField& o_true, const TimeField& d_true,
                        const TimeField& o_pred, const TimeField& d_pred,
                        double alpha, double beta, int horizon_cap);

// Text serialization: CSV of integers with "inf" for the sentinel.
void write_time_field_csv(std::ostream& out, const TimeField& field);
TimeField read_time_field_csv(std::istream& in);

// Binary serialization: magic "T2NF", u32 height, u32 width, then row-major
// u32 values, all little-endian; 0xFFFFFFFF encodes the sentinel. Occupancy
// lists add u32 capacity after the width.
void write_time_field(std::ostream& out, const TimeField& field);
TimeField read_time_field(std::istream& in);
void write_time_field_file(const std::filesystem::path& path,
                           const TimeField& field);
TimeField read_time_field_file(const std::filesystem::path& path);

void write_occupancy_list(std::ostream& out, const OccupancyList& list);
OccupancyList read_occupancy_list(std::istream& in);
void write_occupancy_list_file(const std::filesystem::path& path,
                               const OccupancyList& list);
OccupancyList read_occupancy_list_file(const std::filesystem::path& path);

}  // namespace occuplan
