#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "occuplan/grid_geometry.hpp"

namespace occuplan {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(Rgb a, Rgb b) {
    return a.r == b.r && a.g == b.g && a.b == b.b;
  }
};

/// H x W x 3 raster image with 8-bit channels, row-major storage.
class Frame {
 public:
  Frame(int height, int width, Rgb fill = {0, 0, 0}, int timestamp = 0);

  int height() const { return height_; }
  int width() const { return width_; }
  int timestamp() const { return timestamp_; }
  void set_timestamp(int t) { timestamp_ = t; }

  Rgb at(int row, int col) const {
    const std::size_t k = offset(row, col);
    return {data_[k], data_[k + 1], data_[k + 2]};
  }
  void set(int row, int col, Rgb v) {
    const std::size_t k = offset(row, col);
    data_[k] = v.r;
    data_[k + 1] = v.g;
    data_[k + 2] = v.b;
  }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  friend bool operator==(const Frame& a, const Frame& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           a.data_ == b.data_;
  }

 private:
  std::size_t offset(int row, int col) const {
    return (static_cast<std::size_t>(row) * width_ + col) * 3u;
  }

  int height_;
  int width_;
  int timestamp_;
  std::vector<std::uint8_t> data_;
};

/// H x W boolean array.
class PixelMask {
 public:
  PixelMask() : height_(0), width_(0) {}
  PixelMask(int height, int width, bool fill = false);

  int height() const { return height_; }
  int width() const { return width_; }

  bool at(int row, int col) const {
    return bits_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  void set(int row, int col, bool v) {
    bits_[static_cast<std::size_t>(row) * width_ + col] = v ? 1 : 0;
  }

  std::size_t count() const;
  bool any() const;

  /// Per-pixel OR of two equally sized masks.
  PixelMask operator|(const PixelMask& other) const;
  /// True where this mask is false.
  PixelMask complement() const;
  bool overlaps(const PixelMask& other) const;

  friend bool operator==(const PixelMask& a, const PixelMask& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           a.bits_ == b.bits_;
  }

 private:
  int height_;
  int width_;
  std::vector<std::uint8_t> bits_;
};

/// Per-pixel, per-channel arithmetic mean of the input frames, rounded half
/// up. All frames must share dimensions; the result carries timestamp 0.
Frame estimate_background(std::span<const Frame> frames);

/// Rasterizes a simple polygon given in continuous pixel coordinates
/// (x = column, y = row). A pixel is set exactly when its center lies inside
/// the polygon under the even-odd rule or exactly on its boundary. Vertices
/// may fall outside the grid; the mask is clipped to it. Fewer than three
/// vertices is an error.
PixelMask fill_polygon(const GridGeometry& geometry,
                       std::span<const Vec2> vertices);

// Binary PPM (P6, maxval 255) for frames and PGM (P5, 0/255) for masks.
void write_ppm(std::ostream& out, const Frame& frame);
Frame read_ppm(std::istream& in);
void write_ppm_file(const std::filesystem::path& path, const Frame& frame);
Frame read_ppm_file(const std::filesystem::path& path);

void write_pgm(std::ostream& out, const PixelMask& mask);
PixelMask read_pgm(std::istream& in);
void write_pgm_file(const std::filesystem::path& path, const PixelMask& mask);
PixelMask read_pgm_file(const std::filesystem::path& path);

}  // namespace occuplan
