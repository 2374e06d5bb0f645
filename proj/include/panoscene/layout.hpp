#pragma once

// Manhattan room layout: frame, wall/floor/ceiling planes recovered from
// corner pixels, ray casting and the per-pixel plane map.
//
// Room coordinates are expressed in the Manhattan frame with the camera at the
// origin and the floor at z = -1 (camera height is the unit of length).

#include "panoscene/core.hpp"
#include "panoscene/sphere.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace panoscene {

/// Three orthonormal scene directions in camera coordinates; vp_z is up.
struct ManhattanFrame {
  Vec3 vp_x = Vec3::UnitX();
  Vec3 vp_y = Vec3::UnitY();
  Vec3 vp_z = Vec3::UnitZ();

  static ManhattanFrame from_yaw(double yaw) {
    return {Vec3(std::cos(yaw), std::sin(yaw), 0.0), Vec3(-std::sin(yaw), std::cos(yaw), 0.0),
            Vec3::UnitZ()};
  }

  const Vec3& axis(int k) const { return k == 0 ? vp_x : (k == 1 ? vp_y : vp_z); }

  /// Columns are the axes: camera = R * room.
  Mat3 rotation() const {
    Mat3 r;
    r.col(0) = vp_x;
    r.col(1) = vp_y;
    r.col(2) = vp_z;
    return r;
  }

  Vec3 to_room(const Vec3& cam) const { return {vp_x.dot(cam), vp_y.dot(cam), vp_z.dot(cam)}; }
  Vec3 to_camera(const Vec3& room) const { return room.x() * vp_x + room.y() * vp_y + room.z() * vp_z; }

  double yaw() const { return std::atan2(vp_x.y(), vp_x.x()); }

  void validate() const {
    const double tol = 1e-6;
    if (std::abs(vp_x.norm() - 1) > tol || std::abs(vp_y.norm() - 1) > tol || std::abs(vp_z.norm() - 1) > tol)
      throw Error(ErrorCode::InvalidArgument, "Manhattan axes must be unit vectors");
    if (std::abs(vp_x.dot(vp_y)) > tol || std::abs(vp_x.dot(vp_z)) > tol || std::abs(vp_y.dot(vp_z)) > tol)
      throw Error(ErrorCode::InvalidArgument, "Manhattan axes must be orthogonal");
    if (vp_z.z() < 1.0 - tol)
      throw Error(ErrorCode::InvalidArgument, "vp_z must point up along gravity");
  }
};

enum PlaneId : std::uint8_t {
  kPlaneNone = 0,
  kPlaneFloor = 1,
  kPlaneCeiling = 2,
  kPlaneFirstWall = 3,
};

inline bool is_wall(int plane) { return plane >= kPlaneFirstWall; }
inline int wall_index(int plane) { return plane - kPlaneFirstWall; }
inline int wall_plane(int index) { return kPlaneFirstWall + index; }

using PlaneMap = EquirectGrid<std::uint8_t>;

/// Vertical wall: the plane room[axis] = offset, bounded between two corners.
struct Wall {
  int axis = 0;        // 0: normal along x, 1: normal along y
  double offset = 0.0;
  double lo = 0.0;     // extent along the in-plane horizontal axis
  double hi = 0.0;

  int along() const noexcept { return 1 - axis; }
  /// Unit normal pointing towards the camera, in room coordinates.
  Vec3 inward_normal() const {
    Vec3 n = Vec3::Zero();
    n[axis] = offset > 0 ? -1.0 : 1.0;
    return n;
  }
};

struct RayHit {
  int plane = kPlaneNone;
  double t = std::numeric_limits<double>::infinity();
  Vec3 point = Vec3::Zero();
};

class LayoutModel {
 public:
  LayoutModel() = default;

  /// Builds the room from paired ceiling/floor corner pixels (same order,
  /// consecutive corners share a wall). Throws OpenLayout when the corners do
  /// not describe a closed Manhattan polygon around the camera.
  static LayoutModel from_corners(std::vector<PixelCoord> ceiling, std::vector<PixelCoord> floor,
                                  const ManhattanFrame& frame, int width, int height) {
    frame.validate();
    if (floor.size() < 4 || floor.size() != ceiling.size())
      throw Error(ErrorCode::OpenLayout, "layout needs at least 4 paired ceiling/floor corners");
    if (floor.size() % 2 != 0)
      throw Error(ErrorCode::OpenLayout, "a Manhattan room has an even number of corners");

    LayoutModel m;
    m.frame_ = frame;
    m.width_ = width;
    m.height_ = height;
    m.ceiling_px_ = std::move(ceiling);
    m.floor_px_ = std::move(floor);

    const std::size_t n = m.floor_px_.size();
    std::vector<Eigen::Vector2d> pts(n);
    double ceil_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 df = frame.to_room(pixel_to_dir(m.floor_px_[i], width, height));
      if (df.z() >= -1e-9) throw Error(ErrorCode::OpenLayout, "floor corner above the horizon");
      const double t = m.floor_z_ / df.z();
      pts[i] = {t * df.x(), t * df.y()};
      const Vec3 dc = frame.to_room(pixel_to_dir(m.ceiling_px_[i], width, height));
      const double horiz = std::hypot(dc.x(), dc.y());
      if (dc.z() <= 1e-9 || horiz < 1e-12)
        throw Error(ErrorCode::OpenLayout, "ceiling corner below the horizon");
      ceil_sum += pts[i].norm() * dc.z() / horiz;
    }
    m.ceiling_z_ = ceil_sum / static_cast<double>(n);

    m.walls_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d& a = pts[i];
      const Eigen::Vector2d& b = pts[(i + 1) % n];
      Wall& w = m.walls_[i];
      w.axis = std::abs(b.x() - a.x()) < std::abs(b.y() - a.y()) ? 0 : 1;
      w.offset = 0.5 * (a[w.axis] + b[w.axis]);
    }
    for (std::size_t i = 0; i < n; ++i)
      if (m.walls_[i].axis == m.walls_[(i + 1) % n].axis)
        throw Error(ErrorCode::OpenLayout, "adjacent walls are not orthogonal");

    // Snapped corner i joins wall i-1 and wall i.
    m.corners_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Wall& prev = m.walls_[(i + n - 1) % n];
      const Wall& cur = m.walls_[i];
      Eigen::Vector2d c;
      c[prev.axis] = prev.offset;
      c[cur.axis] = cur.offset;
      m.corners_[i] = c;
    }
    for (std::size_t i = 0; i < n; ++i) {
      Wall& w = m.walls_[i];
      const double s0 = m.corners_[i][w.along()];
      const double s1 = m.corners_[(i + 1) % n][w.along()];
      w.lo = std::min(s0, s1);
      w.hi = std::max(s0, s1);
    }
    if (!m.contains_xy(0.0, 0.0))
      throw Error(ErrorCode::OpenLayout, "camera is outside the room polygon");
    return m;
  }

  const ManhattanFrame& frame() const noexcept { return frame_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double floor_z() const noexcept { return floor_z_; }
  double ceiling_z() const noexcept { return ceiling_z_; }
  const std::vector<Wall>& walls() const noexcept { return walls_; }
  const std::vector<Eigen::Vector2d>& corners() const noexcept { return corners_; }
  const std::vector<PixelCoord>& ceiling_pixels() const noexcept { return ceiling_px_; }
  const std::vector<PixelCoord>& floor_pixels() const noexcept { return floor_px_; }

  /// Point-in-polygon for the floor outline (room coordinates).
  bool contains_xy(double x, double y) const {
    bool inside = false;
    const std::size_t n = corners_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const auto& a = corners_[i];
      const auto& b = corners_[j];
      if ((a.y() > y) != (b.y() > y) && x < (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y()) + a.x())
        inside = !inside;
    }
    return inside;
  }

  /// Nearest wall hit (within the wall's horizontal extent) of a room-frame ray.
  std::optional<RayHit> cast_walls(const Vec3& d) const {
    std::optional<RayHit> best;
    for (std::size_t i = 0; i < walls_.size(); ++i) {
      const Wall& w = walls_[i];
      if (std::abs(d[w.axis]) < 1e-15) continue;
      const double t = w.offset / d[w.axis];
      if (t <= 0) continue;
      const double s = t * d[w.along()];
      const double eps = 1e-9 * (1.0 + std::abs(s));
      if (s < w.lo - eps || s > w.hi + eps) continue;
      if (!best || t < best->t) best = RayHit{wall_plane(static_cast<int>(i)), t, t * d};
    }
    return best;
  }

  /// Plane seen along a room-frame ray.
  RayHit cast(const Vec3& d) const {
    const auto wall = cast_walls(d);
    if (wall) {
      const double z = wall->point.z();
      if (z >= floor_z_ && z <= ceiling_z_) return *wall;
    }
    if (d.z() < 0) {
      const double t = floor_z_ / d.z();
      return {kPlaneFloor, t, t * d};
    }
    if (d.z() > 0) {
      const double t = ceiling_z_ / d.z();
      return {kPlaneCeiling, t, t * d};
    }
    return wall ? *wall : RayHit{};
  }

  /// Plane map label of a pixel centre.
  int plane_at(int row, int col) const {
    return cast(frame_.to_room(pixel_center_dir(row, col, width_, height_))).plane;
  }

  /// Number of planes including floor and ceiling.
  int plane_count() const noexcept { return kPlaneFirstWall + static_cast<int>(walls_.size()); }

  /// The axis-aligned plane (axis, offset) of a plane id.
  std::pair<int, double> plane_equation(int plane) const {
    if (plane == kPlaneFloor) return {2, floor_z_};
    if (plane == kPlaneCeiling) return {2, ceiling_z_};
    if (is_wall(plane) && wall_index(plane) < static_cast<int>(walls_.size())) {
      const Wall& w = walls_[wall_index(plane)];
      return {w.axis, w.offset};
    }
    throw Error(ErrorCode::InvalidArgument, "unknown plane id " + std::to_string(plane));
  }

 private:
  ManhattanFrame frame_;
  int width_ = 0;
  int height_ = 0;
  double floor_z_ = -1.0;
  double ceiling_z_ = 1.0;
  std::vector<PixelCoord> ceiling_px_;
  std::vector<PixelCoord> floor_px_;
  std::vector<Wall> walls_;
  std::vector<Eigen::Vector2d> corners_;
};

/// Labels every pixel with the plane its centre ray meets first.
inline PlaneMap build_plane_map(const LayoutModel& layout) {
  PlaneMap pm(layout.width(), layout.height());
  for (int r = 0; r < pm.height(); ++r)
    for (int c = 0; c < pm.width(); ++c) pm(r, c) = static_cast<std::uint8_t>(layout.plane_at(r, c));
  return pm;
}

/// Corner pixels of a room given as a floor polygon (room coordinates, in
/// order) and ceiling height, as seen from the origin.
inline std::pair<std::vector<PixelCoord>, std::vector<PixelCoord>> project_room_corners(
    const std::vector<Eigen::Vector2d>& polygon, double ceiling_z, const ManhattanFrame& frame,
    int width, int height, double floor_z = -1.0) {
  std::vector<PixelCoord> ceil, flo;
  for (const auto& p : polygon) {
    ceil.push_back(dir_to_pixel(frame.to_camera(Vec3(p.x(), p.y(), ceiling_z)).normalized(), width, height));
    flo.push_back(dir_to_pixel(frame.to_camera(Vec3(p.x(), p.y(), floor_z)).normalized(), width, height));
  }
  return {ceil, flo};
}

/// Intersection of a ray with an axis-aligned plane room[axis] = offset.
inline std::optional<Vec3> intersect_axis_plane(const Vec3& d, int axis, double offset) {
  if (std::abs(d[axis]) < 1e-15) return std::nullopt;
  const double t = offset / d[axis];
  if (t <= 0) return std::nullopt;
  return t * d;
}

}  // namespace panoscene
