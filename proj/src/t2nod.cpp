#include "occuplan/t2nod.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace occuplan {

TimeField::TimeField(int height, int width, std::uint32_t fill)
    : height_(height), width_(width) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("TimeField: dimensions must be >= 1");
  }
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

OccupancyList::OccupancyList(int height, int width, int capacity)
    : height_(height), width_(width), capacity_(capacity) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("OccupancyList: dimensions must be >= 1");
  }
  if (capacity < 2 || capacity % 2 != 0) {
    throw std::invalid_argument("OccupancyList: capacity must be even, >= 2");
  }
  values_.assign(static_cast<std::size_t>(height) * width * capacity,
                 kTimeInfinity);
}

void Thresholds::validate() const {
  if (tau_departure <= 0 || tau_departure > tau_occupancy ||
      tau_occupancy > 765) {
    throw std::invalid_argument(
        "Thresholds: require 0 < tau_departure <= tau_occupancy <= 765");
  }
}

int pixel_difference(Rgb a, Rgb b) {
  return std::abs(int(a.r) - int(b.r)) + std::abs(int(a.g) - int(b.g)) +
         std::abs(int(a.b) - int(b.b));
}

namespace {

void check_sequence(std::span<const Frame> prediction, const Frame& background,
                    const Thresholds& thresholds) {
  thresholds.validate();
  if (prediction.empty()) {
    throw std::invalid_argument("t2nod: prediction sequence is empty");
  }
  for (const Frame& f : prediction) {
    if (f.height() != background.height() ||
        f.width() != background.width()) {
      throw std::invalid_argument("t2nod: frame/background dimension mismatch");
    }
  }
}

}  // namespace

std::pair<TimeField, TimeField> compute_t2no_t2nd(
    std::span<const Frame> prediction, const Frame& background,
    const Thresholds& thresholds) {
  check_sequence(prediction, background, thresholds);
  const int h = background.height();
  const int w = background.width();
  TimeField occupancy(h, w);
  TimeField departure(h, w);

  // Frame-major sweep with a per-pixel phase: 0 = awaiting occupancy,
  // 1 = awaiting departure, 2 = resolved. A pixel that becomes occupied can
  // satisfy the departure test in the same frame only when the thresholds
  // coincide.
  std::vector<std::uint8_t> phase(static_cast<std::size_t>(h) * w, 0);
  std::size_t unresolved = phase.size();

  const int frames = static_cast<int>(prediction.size());
  for (int t = 0; t < frames && unresolved > 0; ++t) {
    const Frame& img = prediction[t];
    std::size_t k = 0;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j, ++k) {
        if (phase[k] == 2) continue;
        const int delta = pixel_difference(img.at(i, j), background.at(i, j));
        if (phase[k] == 0 && delta >= thresholds.tau_occupancy) {
          occupancy.set(i, j, static_cast<std::uint32_t>(t));
          phase[k] = 1;
        }
        if (phase[k] == 1 && delta <= thresholds.tau_departure) {
          departure.set(i, j, static_cast<std::uint32_t>(t));
          phase[k] = 2;
          --unresolved;
        }
      }
    }
  }
  return {std::move(occupancy), std::move(departure)};
}

OccupancyList compute_occupancy_list(std::span<const Frame> prediction,
                                     const Frame& background,
                                     const Thresholds& thresholds,
                                     int capacity) {
  check_sequence(prediction, background, thresholds);
  const int h = background.height();
  const int w = background.width();
  OccupancyList list(h, w, capacity);

  // Per-pixel cursor: next slot to fill. Even slots await an occupancy,
  // odd slots a departure. After a departure the next occupancy scan starts
  // at the following frame, which keeps entries strictly increasing.
  std::vector<int> slot(static_cast<std::size_t>(h) * w, 0);

  const int frames = static_cast<int>(prediction.size());
  for (int t = 0; t < frames; ++t) {
    const Frame& img = prediction[t];
    std::size_t k = 0;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j, ++k) {
        if (slot[k] >= capacity) continue;
        const int delta = pixel_difference(img.at(i, j), background.at(i, j));
        if (slot[k] % 2 == 0 && delta >= thresholds.tau_occupancy) {
          list.set(i, j, slot[k]++, static_cast<std::uint32_t>(t));
        }
        if (slot[k] % 2 == 1 && delta <= thresholds.tau_departure) {
          list.set(i, j, slot[k]++, static_cast<std::uint32_t>(t));
        }
      }
    }
  }
  return list;
}

double prediction_error(const TimeField& o_true, const TimeField& d_true,
                        const TimeField& o_pred, const TimeField& d_pred,
                        double alpha, double beta, int horizon_cap) {
  const int h = o_true.height();
  const int w = o_true.width();
  if (d_true.height() != h || d_true.width() != w || o_pred.height() != h ||
      o_pred.width() != w || d_pred.height() != h || d_pred.width() != w) {
    throw std::invalid_argument("prediction_error: dimension mismatch");
  }
  auto capped = [horizon_cap](std::uint32_t v) {
    return v == kTimeInfinity ? static_cast<double>(horizon_cap)
                              : static_cast<double>(v);
  };
  double occ = 0.0, dep = 0.0;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double od = capped(o_true.at(i, j)) - capped(o_pred.at(i, j));
      const double dd = capped(d_true.at(i, j)) - capped(d_pred.at(i, j));
      occ += od * od;
      dep += dd * dd;
    }
  }
  return alpha * occ + beta * dep;
}

void write_time_field_csv(std::ostream& out, const TimeField& field) {
  for (int i = 0; i < field.height(); ++i) {
    for (int j = 0; j < field.width(); ++j) {
      if (j > 0) out << ',';
      const std::uint32_t v = field.at(i, j);
      if (v == kTimeInfinity) {
        out << "inf";
      } else {
        out << v;
      }
    }
    out << '\n';
  }
}

TimeField read_time_field_csv(std::istream& in) {
  std::vector<std::vector<std::uint32_t>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::uint32_t> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell == "inf") {
        row.push_back(kTimeInfinity);
      } else {
        row.push_back(static_cast<std::uint32_t>(std::stoul(cell)));
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::invalid_argument("TimeField CSV: no rows");
  }
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows[0].size());
  TimeField field(h, w);
  for (int i = 0; i < h; ++i) {
    if (static_cast<int>(rows[i].size()) != w) {
      throw std::invalid_argument("TimeField CSV: ragged rows");
    }
    for (int j = 0; j < w; ++j) field.set(i, j, rows[i][j]);
  }
  return field;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4] = {static_cast<char>(v & 0xFF),
                   static_cast<char>((v >> 8) & 0xFF),
                   static_cast<char>((v >> 16) & 0xFF),
                   static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (in.gcount() != 4) {
    throw std::invalid_argument("T2NF: truncated stream");
  }
  return std::uint32_t(bytes[0]) | (std::uint32_t(bytes[1]) << 8) |
         (std::uint32_t(bytes[2]) << 16) | (std::uint32_t(bytes[3]) << 24);
}

void expect_magic(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || magic[0] != 'T' || magic[1] != '2' ||
      magic[2] != 'N' || magic[3] != 'F') {
    throw std::invalid_argument("T2NF: bad magic");
  }
}

}  // namespace

void write_time_field(std::ostream& out, const TimeField& field) {
  out.write("T2NF", 4);
  put_u32(out, static_cast<std::uint32_t>(field.height()));
  put_u32(out, static_cast<std::uint32_t>(field.width()));
  for (std::uint32_t v : field.values()) put_u32(out, v);
}

TimeField read_time_field(std::istream& in) {
  expect_magic(in);
  const auto h = static_cast<int>(get_u32(in));
  const auto w = static_cast<int>(get_u32(in));
  TimeField field(h, w);
  for (auto& v : field.values()) v = get_u32(in);
  return field;
}

void write_occupancy_list(std::ostream& out, const OccupancyList& list) {
  out.write("T2NF", 4);
  put_u32(out, static_cast<std::uint32_t>(list.height()));
  put_u32(out, static_cast<std::uint32_t>(list.width()));
  put_u32(out, static_cast<std::uint32_t>(list.capacity()));
  for (std::uint32_t v : list.values()) put_u32(out, v);
}

OccupancyList read_occupancy_list(std::istream& in) {
  expect_magic(in);
  const auto h = static_cast<int>(get_u32(in));
  const auto w = static_cast<int>(get_u32(in));
  const auto capacity = static_cast<int>(get_u32(in));
  OccupancyList list(h, w, capacity);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int s = 0; s < capacity; ++s) list.set(i, j, s, get_u32(in));
    }
  }
  return list;
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

void write_time_field_file(const std::filesystem::path& path,
                           const TimeField& field) {
  auto out = open_out(path);
  write_time_field(out, field);
}

TimeField read_time_field_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_time_field(in);
}

void write_occupancy_list_file(const std::filesystem::path& path,
                               const OccupancyList& list) {
  auto out = open_out(path);
  write_occupancy_list(out, list);
}

OccupancyList read_occupancy_list_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_occupancy_list(in);
}

}  // namespace occuplan
