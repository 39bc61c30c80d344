#include "occuplan/multi_view.hpp"

#include <cmath>
#include <stdexcept>

namespace occuplan {

ViewLayout::ViewLayout(GridGeometry canvas, std::vector<ViewPlacement> views)
    : canvas_(std::move(canvas)), views_(std::move(views)) {
  for (const ViewPlacement& v : views_) {
    if (v.geometry.resolution() != canvas_.resolution() ||
        v.geometry.frame_period() != canvas_.frame_period()) {
      throw std::invalid_argument(
          "ViewLayout: views must share the canvas resolution and frame "
          "period");
    }
    if (v.row_offset < 0 || v.col_offset < 0 ||
        v.row_offset + v.geometry.height() > canvas_.height() ||
        v.col_offset + v.geometry.width() > canvas_.width()) {
      throw std::invalid_argument("ViewLayout: view exceeds canvas bounds");
    }
  }
}

ViewLayout make_layout(const GridGeometry& canvas,
                       std::span<const GridGeometry> views) {
  std::vector<ViewPlacement> placements;
  placements.reserve(views.size());
  for (const GridGeometry& g : views) {
    const double row_f =
        (g.origin().y - canvas.origin().y) / canvas.resolution();
    const double col_f =
        (g.origin().x - canvas.origin().x) / canvas.resolution();
    const double row_r = std::floor(row_f + 0.5);
    const double col_r = std::floor(col_f + 0.5);
    if (std::abs(row_f - row_r) > 1e-9 || std::abs(col_f - col_r) > 1e-9) {
      throw std::invalid_argument(
          "make_layout: view origin not aligned to canvas pixel centers");
    }
    placements.push_back(
        {g, static_cast<int>(row_r), static_cast<int>(col_r)});
  }
  return ViewLayout(canvas, std::move(placements));
}

StitchedFields stitch_fields(
    const ViewLayout& layout,
    std::span<const std::pair<TimeField, TimeField>> fields) {
  const auto views = layout.views();
  if (fields.size() != views.size()) {
    throw std::invalid_argument(
        "stitch_fields: one field pair required per view");
  }
  const int h = layout.canvas().height();
  const int w = layout.canvas().width();
  StitchedFields out{TimeField(h, w), TimeField(h, w), PixelMask(h, w)};

  for (std::size_t v = 0; v < views.size(); ++v) {
    const ViewPlacement& place = views[v];
    const auto& [occ, dep] = fields[v];
    if (occ.height() != place.geometry.height() ||
        occ.width() != place.geometry.width() ||
        dep.height() != place.geometry.height() ||
        dep.width() != place.geometry.width()) {
      throw std::invalid_argument("stitch_fields: field/view size mismatch");
    }
    for (int i = 0; i < occ.height(); ++i) {
      for (int j = 0; j < occ.width(); ++j) {
        const int ci = place.row_offset + i;
        const int cj = place.col_offset + j;
        out.observed.set(ci, cj, true);
        const std::uint32_t o = occ.at(i, j);
        if (o == kTimeInfinity) continue;
        const std::uint32_t d = dep.at(i, j);
        // Hull of the contributing windows: earliest occupancy, latest
        // departure. An open-ended departure stays open.
        if (out.occupancy.at(ci, cj) == kTimeInfinity) {
          out.occupancy.set(ci, cj, o);
          out.departure.set(ci, cj, d);
        } else {
          out.occupancy.set(ci, cj, std::min(out.occupancy.at(ci, cj), o));
          out.departure.set(ci, cj, std::max(out.departure.at(ci, cj), d));
        }
      }
    }
  }
  return out;
}

StitchedList stitch_occupancy_lists(const ViewLayout& layout,
                                    std::span<const OccupancyList> lists) {
  if (lists.size() != layout.views().size()) {
    throw std::invalid_argument(
        "stitch_occupancy_lists: one list required per view");
  }
  std::vector<std::pair<TimeField, TimeField>> fields;
  fields.reserve(lists.size());
  for (const OccupancyList& l : lists) {
    if (l.capacity() != 2) {
      throw std::invalid_argument(
          "stitch_occupancy_lists: only capacity 2 is fusable");
    }
    TimeField occ(l.height(), l.width());
    TimeField dep(l.height(), l.width());
    for (int i = 0; i < l.height(); ++i) {
      for (int j = 0; j < l.width(); ++j) {
        occ.set(i, j, l.at(i, j, 0));
        dep.set(i, j, l.at(i, j, 1));
      }
    }
    fields.emplace_back(std::move(occ), std::move(dep));
  }
  StitchedFields stitched = stitch_fields(layout, fields);
  StitchedList out{
      OccupancyList(layout.canvas().height(), layout.canvas().width(), 2),
      std::move(stitched.observed)};
  for (int i = 0; i < out.list.height(); ++i) {
    for (int j = 0; j < out.list.width(); ++j) {
      out.list.set(i, j, 0, stitched.occupancy.at(i, j));
      out.list.set(i, j, 1, stitched.departure.at(i, j));
    }
  }
  return out;
}

}  // namespace occuplan
