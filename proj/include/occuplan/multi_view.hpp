#pragma once

#include <span>
#include <utility>
#include <vector>

#include "occuplan/grid_geometry.hpp"
#include "occuplan/raster.hpp"
#include "occuplan/t2nod.hpp"

namespace occuplan {

/// One camera view placed on the planning canvas. Offsets are in canvas
/// pixels; views share the canvas resolution and frame period.
struct ViewPlacement {
  GridGeometry geometry;
  int row_offset = 0;
  int col_offset = 0;
};

/// Several views composed onto one canvas grid. Views must fit inside the
/// canvas; overlaps are allowed and fused conservatively when stitching.
class ViewLayout {
 public:
  ViewLayout(GridGeometry canvas, std::vector<ViewPlacement> views);

  const GridGeometry& canvas() const { return canvas_; }
  std::span<const ViewPlacement> views() const { return views_; }

 private:
  GridGeometry canvas_;
  std::vector<ViewPlacement> views_;
};

/// Derives pixel offsets from the views' world origins; each view origin
/// must land on a canvas pixel center.
ViewLayout make_layout(const GridGeometry& canvas,
                       std::span<const GridGeometry> views);

struct StitchedFields {
  TimeField occupancy;
  TimeField departure;
  /// True where at least one view covers the canvas pixel. Uncovered
  /// pixels carry infinite occupancy and departure.
  PixelMask observed;
};

/// Fuses per-view field pairs onto the canvas. Where views overlap the
/// stitched window is the hull of the views' windows (earliest occupancy,
/// latest departure), so any collision visible in a single view stays
/// visible in the stitched fields.
StitchedFields stitch_fields(
    const ViewLayout& layout,
    std::span<const std::pair<TimeField, TimeField>> fields);

struct StitchedList {
  OccupancyList list;
  PixelMask observed;
};

/// Occupancy-list stitching for capacity 2 only: a single window per pixel
/// fuses exactly like a field pair. Larger capacities cannot be fused into
/// one window and are rejected.
StitchedList stitch_occupancy_lists(const ViewLayout& layout,
                                    std::span<const OccupancyList> lists);

}  // namespace occuplan
