#include "occuplan/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace occuplan {

Frame::Frame(int height, int width, Rgb fill, int timestamp)
    : height_(height), width_(width), timestamp_(timestamp) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("Frame: dimensions must be >= 1");
  }
  data_.resize(static_cast<std::size_t>(height) * width * 3u);
  for (std::size_t k = 0; k < data_.size(); k += 3) {
    data_[k] = fill.r;
    data_[k + 1] = fill.g;
    data_[k + 2] = fill.b;
  }
}

PixelMask::PixelMask(int height, int width, bool fill)
    : height_(height), width_(width) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("PixelMask: dimensions must be >= 1");
  }
  bits_.assign(static_cast<std::size_t>(height) * width, fill ? 1 : 0);
}

std::size_t PixelMask::count() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

bool PixelMask::any() const {
  return std::any_of(bits_.begin(), bits_.end(), [](auto b) { return b != 0; });
}

PixelMask PixelMask::operator|(const PixelMask& other) const {
  if (height_ != other.height_ || width_ != other.width_) {
    throw std::invalid_argument("PixelMask: dimension mismatch in OR");
  }
  PixelMask out = *this;
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    out.bits_[k] = bits_[k] | other.bits_[k];
  }
  return out;
}

PixelMask PixelMask::complement() const {
  PixelMask out = *this;
  for (auto& b : out.bits_) b = b ? 0 : 1;
  return out;
}

bool PixelMask::overlaps(const PixelMask& other) const {
  if (height_ != other.height_ || width_ != other.width_) {
    throw std::invalid_argument("PixelMask: dimension mismatch in overlap");
  }
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    if (bits_[k] && other.bits_[k]) return true;
  }
  return false;
}

Frame estimate_background(std::span<const Frame> frames) {
  if (frames.empty()) {
    throw std::invalid_argument("estimate_background: empty frame sequence");
  }
  const int h = frames[0].height();
  const int w = frames[0].width();
  for (const Frame& f : frames) {
    if (f.height() != h || f.width() != w) {
      throw std::invalid_argument("estimate_background: dimension mismatch");
    }
  }
  std::vector<std::uint64_t> sums(static_cast<std::size_t>(h) * w * 3u, 0);
  for (const Frame& f : frames) {
    const auto d = f.data();
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += d[k];
  }
  Frame out(h, w, {0, 0, 0}, 0);
  const std::uint64_t n = frames.size();
  auto d = out.data();
  for (std::size_t k = 0; k < sums.size(); ++k) {
    // round half up: floor(s/n + 1/2) = (2s + n) / 2n in integers
    const std::uint64_t mean = (2 * sums[k] + n) / (2 * n);
    d[k] = static_cast<std::uint8_t>(std::min<std::uint64_t>(mean, 255));
  }
  return out;
}

namespace {

// Exact test for a pixel center lying on the closed segment [a, b].
bool on_segment(double px, double py, Vec2 a, Vec2 b) {
  const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
  if (cross != 0.0) return false;
  return std::min(a.x, b.x) <= px && px <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= py && py <= std::max(a.y, b.y);
}

}  // namespace

PixelMask fill_polygon(const GridGeometry& geometry,
                       std::span<const Vec2> vertices) {
  if (vertices.size() < 3) {
    throw std::invalid_argument("fill_polygon: need at least 3 vertices");
  }
  const int h = geometry.height();
  const int w = geometry.width();
  PixelMask mask(h, w);

  double min_x = vertices[0].x, max_x = vertices[0].x;
  double min_y = vertices[0].y, max_y = vertices[0].y;
  for (Vec2 v : vertices) {
    min_x = std::min(min_x, v.x);
    max_x = std::max(max_x, v.x);
    min_y = std::min(min_y, v.y);
    max_y = std::max(max_y, v.y);
  }
  const int row_lo = std::max(0, static_cast<int>(std::ceil(min_y)));
  const int row_hi = std::min(h - 1, static_cast<int>(std::floor(max_y)));
  const int col_lo = std::max(0, static_cast<int>(std::ceil(min_x)));
  const int col_hi = std::min(w - 1, static_cast<int>(std::floor(max_x)));
  if (row_lo > row_hi || col_lo > col_hi) return mask;

  const std::size_t n = vertices.size();
  std::vector<double> crossings;
  crossings.reserve(n);

  for (int i = row_lo; i <= row_hi; ++i) {
    const double y = i;
    crossings.clear();
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 a = vertices[k];
      const Vec2 b = vertices[(k + 1) % n];
      if ((a.y > y) != (b.y > y)) {
        crossings.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());

    // Even-odd interior: center (j, i) is inside iff an odd number of edge
    // crossings lie strictly to its right.
    std::size_t ptr = 0;
    for (int j = col_lo; j <= col_hi; ++j) {
      while (ptr < crossings.size() && crossings[ptr] <= j) ++ptr;
      if ((crossings.size() - ptr) % 2 == 1) mask.set(i, j, true);
    }

    // Boundary-inclusive: centers exactly on an edge are part of the mask.
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 a = vertices[k];
      const Vec2 b = vertices[(k + 1) % n];
      if (std::min(a.y, b.y) > y || std::max(a.y, b.y) < y) continue;
      const int jlo =
          std::max(col_lo, static_cast<int>(std::ceil(std::min(a.x, b.x))));
      const int jhi =
          std::min(col_hi, static_cast<int>(std::floor(std::max(a.x, b.x))));
      for (int j = jlo; j <= jhi; ++j) {
        if (!mask.at(i, j) && on_segment(j, y, a, b)) mask.set(i, j, true);
      }
    }
  }
  return mask;
}

namespace {

int pnm_next_int(std::istream& in) {
  // Skips whitespace and '#' comments, then reads a decimal value.
  int c = in.peek();
  while (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') {
    if (c == '#') {
      while (in.good() && in.get() != '\n') {
      }
    } else {
      in.get();
    }
    c = in.peek();
  }
  int value = 0;
  if (!(in >> value)) {
    throw std::invalid_argument("PNM: malformed header");
  }
  return value;
}

void pnm_expect_magic(std::istream& in, char digit) {
  char p = 0, d = 0;
  in.get(p);
  in.get(d);
  if (!in.good() || p != 'P' || d != digit) {
    throw std::invalid_argument(std::string("PNM: expected magic P") + digit);
  }
}

}  // namespace

void write_ppm(std::ostream& out, const Frame& frame) {
  out << "P6\n" << frame.width() << " " << frame.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.data().data()),
            static_cast<std::streamsize>(frame.data().size()));
}

Frame read_ppm(std::istream& in) {
  pnm_expect_magic(in, '6');
  const int w = pnm_next_int(in);
  const int h = pnm_next_int(in);
  const int maxval = pnm_next_int(in);
  if (maxval != 255) {
    throw std::invalid_argument("PPM: only maxval 255 supported");
  }
  in.get();  // single whitespace byte before raster data
  Frame frame(h, w);
  in.read(reinterpret_cast<char*>(frame.data().data()),
          static_cast<std::streamsize>(frame.data().size()));
  if (in.gcount() != static_cast<std::streamsize>(frame.data().size())) {
    throw std::invalid_argument("PPM: truncated pixel data");
  }
  return frame;
}

void write_pgm(std::ostream& out, const PixelMask& mask) {
  out << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      out.put(mask.at(i, j) ? static_cast<char>(255) : static_cast<char>(0));
    }
  }
}

PixelMask read_pgm(std::istream& in) {
  pnm_expect_magic(in, '5');
  const int w = pnm_next_int(in);
  const int h = pnm_next_int(in);
  const int maxval = pnm_next_int(in);
  if (maxval != 255) {
    throw std::invalid_argument("PGM: only maxval 255 supported");
  }
  in.get();
  PixelMask mask(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const int c = in.get();
      if (c == std::char_traits<char>::eof()) {
        throw std::invalid_argument("PGM: truncated pixel data");
      }
      mask.set(i, j, c != 0);
    }
  }
  return mask;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot open for writing: " + path.string());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot open for reading: " + path.string());
  }
  return in;
}

}  // namespace

void write_ppm_file(const std::filesystem::path& path, const Frame& frame) {
  auto out = open_out(path);
  write_ppm(out, frame);
}

Frame read_ppm_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_ppm(in);
}

void write_pgm_file(const std::filesystem::path& path, const PixelMask& mask) {
  auto out = open_out(path);
  write_pgm(out, mask);
}

PixelMask read_pgm_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_pgm(in);
}

}  // namespace occuplan
