#pragma once

// Ray casting of placed objects into panorama masks.

#include "panoscene/core.hpp"
#include "panoscene/layout.hpp"
#include "panoscene/object.hpp"
#include "panoscene/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace panoscene {

/// Ray parameter of the first hit of a room-frame ray with an object.
inline std::optional<double> intersect_object(const Object3D& obj, const Vec3& d) {
  const Vec3 lo = obj.min_corner();
  const Vec3 hi = obj.max_corner();
  if (obj.kind == ObjectKind::Cuboid) {
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      if (std::abs(d[k]) < 1e-15) {
        if (0.0 < lo[k] || 0.0 > hi[k]) return std::nullopt;
        continue;
      }
      double a = lo[k] / d[k];
      double b = hi[k] / d[k];
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
      if (t0 > t1) return std::nullopt;
    }
    return t0 > 0 ? std::optional<double>(t0) : std::nullopt;
  }
  int axis = 0;
  for (int k = 1; k < 3; ++k)
    if (obj.dims[k] < obj.dims[axis]) axis = k;
  const auto hit = intersect_axis_plane(d, axis, obj.center[axis]);
  if (!hit) return std::nullopt;
  for (int k = 0; k < 3; ++k)
    if (k != axis && ((*hit)[k] < lo[k] || (*hit)[k] > hi[k])) return std::nullopt;
  return hit->norm();
}

/// Pixel rows [row_lo, row_hi] and columns col_lo + [0, ncols) (wrapping)
/// that can see an object.
struct PixelWindow {
  int row_lo = 0;
  int row_hi = 0;
  int col_lo = 0;
  int ncols = 0;
};

inline PixelWindow object_window(const Object3D& obj, const ManhattanFrame& frame, int width, int height) {
  const Vec3 lo = obj.min_corner();
  const Vec3 hi = obj.max_corner();
  if (lo.x() <= 0 && hi.x() >= 0 && lo.y() <= 0 && hi.y() >= 0) return {0, height - 1, 0, width};
  const double near = std::hypot(std::clamp(0.0, lo.x(), hi.x()), std::clamp(0.0, lo.y(), hi.y()));
  double far = 0.0;
  std::vector<double> lons;
  for (double x : {lo.x(), hi.x()})
    for (double y : {lo.y(), hi.y()}) {
      far = std::max(far, std::hypot(x, y));
      lons.push_back(longitude_of(frame.to_camera(Vec3(x, y, 0.0))));
    }
  double lat_lo = kPi / 2, lat_hi = -kPi / 2;
  for (double z : {lo.z(), hi.z()})
    for (double rho : {near, far}) {
      const double lat = std::atan2(z, rho);
      lat_lo = std::min(lat_lo, lat);
      lat_hi = std::max(lat_hi, lat);
    }
  double dmin = 0.0, dmax = 0.0;
  for (double l : lons) {
    const double d = std::remainder(l - lons[0], kTwoPi);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  const double px = width / kTwoPi;
  PixelWindow win;
  win.row_lo = std::max(0, static_cast<int>(std::floor((kPi / 2 - lat_hi) * px - 0.5)) - 1);
  win.row_hi = std::min(height - 1, static_cast<int>(std::ceil((kPi / 2 - lat_lo) * px - 0.5)) + 1);
  win.col_lo = static_cast<int>(std::floor((lons[0] + dmin + kPi) * px - 0.5)) - 1;
  win.ncols = std::min(width, static_cast<int>(std::ceil((dmax - dmin) * px)) + 4);
  return win;
}

/// Renders the mask of a single object, ignoring other objects.
inline BinaryMask render_object_mask(const Object3D& obj, const ManhattanFrame& frame, int width,
                                     int height) {
  BinaryMask m(width, height);
  const PixelWindow win = object_window(obj, frame, width, height);
  for (int r = win.row_lo; r <= win.row_hi; ++r)
    for (int k = 0; k < win.ncols; ++k) {
      const int c = wrap_index(win.col_lo + k, width);
      if (intersect_object(obj, frame.to_room(pixel_center_dir(r, c, width, height)))) m(r, c) = 1;
    }
  return m;
}

/// IoU between an object's rendering and a mask with `mask_area` pixels,
/// evaluated inside the object's pixel window only.
inline double render_iou(const Object3D& obj, const ManhattanFrame& frame, const BinaryMask& mask,
                         std::size_t mask_area) {
  const int w = mask.width(), h = mask.height();
  const PixelWindow win = object_window(obj, frame, w, h);
  std::size_t inter = 0, drawn = 0;
  for (int r = win.row_lo; r <= win.row_hi; ++r)
    for (int k = 0; k < win.ncols; ++k) {
      const int c = wrap_index(win.col_lo + k, w);
      if (!intersect_object(obj, frame.to_room(pixel_center_dir(r, c, w, h)))) continue;
      ++drawn;
      inter += mask(r, c) ? 1 : 0;
    }
  const std::size_t uni = mask_area + drawn - inter;
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

/// Intersection over union of two masks of the same shape.
inline double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, "mask_iou needs equal shapes");
  std::size_t inter = 0, uni = 0;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    const bool x = a.data()[k] != 0, y = b.data()[k] != 0;
    inter += x && y;
    uni += x || y;
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace panoscene
