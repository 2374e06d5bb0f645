#pragma once

// Placing masked objects in the room.
//
// Wall objects: the mask outline is projected onto its majority wall and
// bounded by a rectangle. Cuboids: the boundary line resting on a wall fixes
// the object's top and back, the line resting on the floor fixes the front
// footprint edge and the width.

#include "panoscene/core.hpp"
#include "panoscene/layout.hpp"
#include "panoscene/lines.hpp"
#include "panoscene/object.hpp"
#include "panoscene/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

namespace panoscene {

/// Boundary samples and fitted lines of one object mask.
struct ObjectEvidence {
  std::vector<BoundarySample> samples;
  std::vector<FittedLine> lines;
};

struct LineContact {
  std::size_t floor = 0;
  std::size_t ceiling = 0;
  int wall = kPlaneNone;  // wall with most contacts
  std::size_t wall_count = 0;
  std::size_t total = 0;

  double floor_fraction() const { return total ? double(floor) / double(total) : 0.0; }
  double wall_fraction() const { return total ? double(wall_count) / double(total) : 0.0; }
};

/// Counts which planes lie just outside a line's inlier samples.
inline LineContact line_contact(const FittedLine& line, const std::vector<BoundarySample>& samples,
                                const PlaneMap& pm) {
  LineContact lc;
  std::map<int, std::size_t> walls;
  for (std::size_t i : line.inliers) {
    const int plane = pm(samples[i].outside_row, samples[i].outside_col);
    ++lc.total;
    if (plane == kPlaneFloor) ++lc.floor;
    else if (plane == kPlaneCeiling) ++lc.ceiling;
    else if (is_wall(plane)) ++walls[plane];
  }
  for (const auto& [plane, count] : walls)
    if (count > lc.wall_count) {
      lc.wall = plane;
      lc.wall_count = count;
    }
  return lc;
}

/// Most frequent plane of the given kind under the mask (kPlaneNone if none).
inline int majority_plane(const BinaryMask& mask, const PlaneMap& pm, bool walls_only) {
  std::map<int, std::size_t> hist;
  for (std::size_t k = 0; k < mask.data().size(); ++k)
    if (mask.data()[k] && (!walls_only || is_wall(pm.data()[k]))) ++hist[pm.data()[k]];
  int best = kPlaneNone;
  std::size_t best_count = 0;
  for (const auto& [plane, count] : hist)
    if (count > best_count) {
      best = plane;
      best_count = count;
    }
  return best;
}

namespace detail {

struct Extent {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
  double mid() const { return 0.5 * (lo + hi); }
  double size() const { return hi - lo; }
};

}  // namespace detail

/// Projects the mask outline onto its majority wall. Throws
/// NoWallIntersection for empty masks or masks that never meet a wall.
inline Object3D place_wall_object(const BinaryMask& mask, const ObjectEvidence& ev, const PlaneMap& pm,
                                  const LayoutModel& layout, int class_id) {
  if (count_nonzero(mask) == 0) throw Error(ErrorCode::NoWallIntersection, "empty mask");
  const int plane = majority_plane(mask, pm, true);
  if (plane == kPlaneNone) throw Error(ErrorCode::NoWallIntersection, "mask does not cover any wall");
  const Wall& wall = layout.walls()[wall_index(plane)];
  const auto& samples = ev.samples.empty() ? extract_boundary(mask) : ev.samples;

  detail::Extent along, up;
  for (const BoundarySample& s : samples) {
    const auto hit = intersect_axis_plane(layout.frame().to_room(s.dir), wall.axis, wall.offset);
    if (!hit) continue;
    along.add((*hit)[wall.along()]);
    up.add(hit->z());
  }
  if (!along.valid()) throw Error(ErrorCode::NoWallIntersection, "no outline ray meets the wall");

  Object3D obj;
  obj.kind = ObjectKind::WallRect;
  obj.class_id = class_id;
  obj.plane = plane;
  obj.center[wall.axis] = wall.offset;
  obj.center[wall.along()] = along.mid();
  obj.center.z() = up.mid();
  obj.dims[wall.axis] = 0.0;
  obj.dims[wall.along()] = along.size();
  obj.dims.z() = up.size();
  return obj;
}

/// Projects the mask outline onto the ceiling.
inline Object3D place_ceiling_object(const BinaryMask& mask, const ObjectEvidence& ev,
                                     const LayoutModel& layout, int class_id) {
  if (count_nonzero(mask) == 0) throw Error(ErrorCode::NoWallIntersection, "empty mask");
  const auto& samples = ev.samples.empty() ? extract_boundary(mask) : ev.samples;
  detail::Extent ex, ey;
  for (const BoundarySample& s : samples) {
    const auto hit = intersect_axis_plane(layout.frame().to_room(s.dir), 2, layout.ceiling_z());
    if (!hit) continue;
    ex.add(hit->x());
    ey.add(hit->y());
  }
  if (!ex.valid()) throw Error(ErrorCode::NoWallIntersection, "no outline ray meets the ceiling");
  Object3D obj;
  obj.kind = ObjectKind::CeilingRect;
  obj.class_id = class_id;
  obj.plane = kPlaneCeiling;
  obj.center = {ex.mid(), ey.mid(), layout.ceiling_z()};
  obj.dims = {ex.size(), ey.size(), 0.0};
  return obj;
}

struct CuboidParams {
  double contact_fraction = 0.3;
  int refine_steps = 8;  // halvings of the face search step; 0 disables the IoU fit
};

namespace detail {

/// Cuboid standing on the floor against `wall_plane_id`, with its top-back
/// edge on `wall_line` and a footprint edge on `floor_line`. Empty when the
/// lines do not give a proper box.
inline std::optional<Object3D> cuboid_from_lines(const ObjectEvidence& ev, const PlaneMap& pm,
                                                 const LayoutModel& layout, const FittedLine& wall_line,
                                                 int wall_plane_id, const FittedLine& floor_line) {
  const ManhattanFrame& frame = layout.frame();
  const Wall& wall = layout.walls()[wall_index(wall_plane_id)];
  const int a = wall.axis;
  const int b = wall.along();
  const double fz = layout.floor_z();

  // Wall-contact line: top edge on the wall plane.
  Extent wall_span;
  for (std::size_t i : wall_line.inliers) {
    const BoundarySample& s = ev.samples[i];
    if (pm(s.outside_row, s.outside_col) != wall_plane_id) continue;
    if (const auto hit = intersect_axis_plane(frame.to_room(s.dir), a, wall.offset)) wall_span.add((*hit)[b]);
  }
  const Vec3 nw = frame.to_room(wall_line.normal);
  if (!wall_span.valid() || std::abs(nw.z()) < 1e-12) return std::nullopt;
  const double top_z = -(nw[a] * wall.offset + nw[b] * wall_span.mid()) / nw.z();

  // Floor-contact line: footprint edge on the floor plane.
  Extent floor_a, floor_b;
  for (std::size_t i : floor_line.inliers) {
    const BoundarySample& s = ev.samples[i];
    if (pm(s.outside_row, s.outside_col) != kPlaneFloor) continue;
    if (const auto hit = intersect_axis_plane(frame.to_room(s.dir), 2, fz)) {
      floor_a.add((*hit)[a]);
      floor_b.add((*hit)[b]);
    }
  }
  if (!floor_a.valid()) return std::nullopt;
  const Vec3 nf = frame.to_room(floor_line.normal);

  double front = 0.0;
  double lat_lo = 0.0, lat_hi = 0.0;
  if (static_cast<int>(floor_line.label) == b && std::abs(nf[a]) > 1e-12) {
    // Front edge parallel to the wall: evaluate the great circle on the floor.
    front = -(nf.z() * fz + nf[b] * floor_b.mid()) / nf[a];
    lat_lo = floor_b.lo;
    lat_hi = floor_b.hi;
  } else {
    // Side edge running away from the wall: its far end is the front.
    front = std::abs(floor_a.lo - wall.offset) > std::abs(floor_a.hi - wall.offset) ? floor_a.lo : floor_a.hi;
    lat_lo = wall_span.lo;
    lat_hi = wall_span.hi;
  }
  Object3D obj;
  obj.kind = ObjectKind::Cuboid;
  obj.plane = kPlaneFloor;
  obj.center[a] = 0.5 * (wall.offset + front);
  obj.dims[a] = std::abs(wall.offset - front);
  obj.center[b] = 0.5 * (lat_lo + lat_hi);
  obj.dims[b] = lat_hi - lat_lo;
  obj.center.z() = 0.5 * (fz + top_z);
  obj.dims.z() = top_z - fz;
  if (!(obj.dims.minCoeff() > 0) || top_z > layout.ceiling_z()) return std::nullopt;
  return obj;
}

}  // namespace detail

namespace detail {

/// Moves the free faces of a wall-backed cuboid (front, both sides, top) to
/// maximise the IoU of its rendering with the mask. Pattern search starting
/// at 10% of each extent.
inline Object3D refine_cuboid(Object3D obj, const BinaryMask& mask, std::size_t area,
                              const LayoutModel& layout, const CuboidParams& params) {
  const ManhattanFrame& frame = layout.frame();
  Vec3 lo = obj.min_corner(), hi = obj.max_corner();
  // Free faces as (axis, is_upper); a face flush with a wall stays put.
  std::vector<std::pair<int, bool>> faces{{2, true}};
  for (int axis : {0, 1})
    for (bool upper : {false, true}) {
      const double face = upper ? hi[axis] : lo[axis];
      const bool flush = std::ranges::any_of(layout.walls(), [&](const Wall& w) {
        return w.axis == axis && std::abs(face - w.offset) < 1e-9;
      });
      if (!flush) faces.emplace_back(axis, upper);
    }
  auto build = [&](const Vec3& l, const Vec3& h) {
    Object3D o = obj;
    o.center = (l + h) / 2;
    o.dims = h - l;
    return o;
  };
  double best = render_iou(obj, frame, mask, area);
  double step_scale = 0.1;
  for (int level = 0; level < params.refine_steps; ++level, step_scale /= 2) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (const auto& [axis, upper] : faces)
        for (double sign : {-1.0, 1.0}) {
          Vec3 l = lo, h = hi;
          double& face = upper ? h[axis] : l[axis];
          face += sign * step_scale * (hi[axis] - lo[axis]);
          if (!(h[axis] - l[axis] > 0) || h.z() > layout.ceiling_z()) continue;
          const Object3D cand = build(l, h);
          const double iou = render_iou(cand, frame, mask, area);
          if (iou > best + 1e-12) {
            best = iou;
            lo = l;
            hi = h;
            moved = true;
          }
        }
    }
  }
  return build(lo, hi);
}

}  // namespace detail

/// Cuboid from the wall-contact and floor-contact boundary lines. Every pair
/// of a wall-contact line (running along its wall) and a floor-contact line
/// gives a candidate; the candidate whose rendering best overlaps the mask
/// wins. Throws UnderconstrainedCuboid when no pair gives a box.
inline Object3D place_cuboid(const BinaryMask& mask, const ObjectEvidence& ev, const PlaneMap& pm,
                             const LayoutModel& layout, int class_id, const CuboidParams& params = {}) {
  std::vector<std::pair<const FittedLine*, int>> wall_lines;
  std::vector<const FittedLine*> floor_lines;
  for (const FittedLine& line : ev.lines) {
    if (line.label != LineAxis::X && line.label != LineAxis::Y) continue;
    const LineContact lc = line_contact(line, ev.samples, pm);
    if (lc.wall != kPlaneNone && lc.wall_fraction() >= params.contact_fraction &&
        static_cast<int>(line.label) == layout.walls()[wall_index(lc.wall)].along())
      wall_lines.emplace_back(&line, lc.wall);
    if (lc.floor_fraction() >= params.contact_fraction) floor_lines.push_back(&line);
  }
  if (wall_lines.empty() || floor_lines.empty())
    throw Error(ErrorCode::UnderconstrainedCuboid, "needs one line on a wall and one on the floor");

  const std::size_t area = count_nonzero(mask);
  std::optional<Object3D> best;
  double best_iou = -1.0;
  for (const auto& [wl, plane] : wall_lines)
    for (const FittedLine* fl : floor_lines) {
      if (wl == fl) continue;
      auto cand = detail::cuboid_from_lines(ev, pm, layout, *wl, plane, *fl);
      if (!cand) continue;
      const double iou = render_iou(*cand, layout.frame(), mask, area);
      if (iou > best_iou) {
        best_iou = iou;
        best = cand;
      }
    }
  if (!best) throw Error(ErrorCode::UnderconstrainedCuboid, "contact lines give no proper box");
  best->class_id = class_id;
  if (params.refine_steps > 0) *best = detail::refine_cuboid(*best, mask, area, layout, params);
  return *best;
}

/// Rough cuboid from the floor footprint of the outline, then fitted to the
/// mask; used when the contact lines are missing. The result is flagged
/// approximate.
inline Object3D place_cuboid_footprint(const BinaryMask& mask, const ObjectEvidence& ev, const PlaneMap& pm,
                                       const LayoutModel& layout, int class_id,
                                       const CuboidParams& params = {}) {
  const ManhattanFrame& frame = layout.frame();
  detail::Extent ex, ey;
  double far = 0.0;
  for (const BoundarySample& s : ev.samples) {
    if (pm(s.outside_row, s.outside_col) != kPlaneFloor) continue;
    if (const auto hit = intersect_axis_plane(frame.to_room(s.dir), 2, layout.floor_z())) {
      ex.add(hit->x());
      ey.add(hit->y());
      far = std::max(far, std::hypot(hit->x(), hit->y()));
    }
  }
  if (!ex.valid()) throw Error(ErrorCode::UnderconstrainedCuboid, "no outline sample rests on the floor");
  double top = layout.floor_z();
  for (const BoundarySample& s : ev.samples) {
    const Vec3 d = frame.to_room(s.dir);
    const double horiz = std::hypot(d.x(), d.y());
    if (horiz > 1e-12) top = std::max(top, far * d.z() / horiz);
  }
  top = std::min(top, layout.ceiling_z());
  Object3D obj;
  obj.kind = ObjectKind::Cuboid;
  obj.class_id = class_id;
  obj.plane = kPlaneFloor;
  obj.approximate = true;
  obj.center = {ex.mid(), ey.mid(), 0.5 * (layout.floor_z() + top)};
  obj.dims = {ex.size(), ey.size(), top - layout.floor_z()};
  if (params.refine_steps > 0 && obj.dims.minCoeff() > 0)
    obj = detail::refine_cuboid(obj, mask, count_nonzero(mask), layout, params);
  return obj;
}

}  // namespace panoscene
