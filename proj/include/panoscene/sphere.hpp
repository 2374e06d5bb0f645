#pragma once

// Equirectangular <-> unit sphere conversions.
//
// Conventions: pixel (col i, row j) covers [i, i+1) x [j, j+1) in edge
// coordinates, centre at (i + 0.5, j + 0.5). A PixelCoord is expressed in index
// coordinates (edge coordinate - 0.5), so integer PixelCoords are pixel centres
// and the north pole sits at v = -0.5. Longitude runs left to right over
// [-pi, pi), latitude from +pi/2 to -pi/2. z is up; the image centre looks
// along +x.

#include "panoscene/core.hpp"

#include <cmath>
#include <vector>

namespace panoscene {

struct PixelCoord {
  double u = 0.0;  // column, unrestricted (periodic in W)
  double v = 0.0;  // row

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

inline Vec3 lonlat_to_dir(double lon, double lat) {
  const double c = std::cos(lat);
  return {c * std::cos(lon), c * std::sin(lon), std::sin(lat)};
}

inline double longitude_of(const Vec3& d) { return std::atan2(d.y(), d.x()); }
inline double latitude_of(const Vec3& d) { return std::asin(std::clamp(d.z(), -1.0, 1.0)); }

inline double column_to_longitude(double u, int width) {
  return kTwoPi * (u + 0.5) / width - kPi;
}
inline double row_to_latitude(double v, int height) {
  return kPi / 2 - kPi * (v + 0.5) / height;
}

/// Direction of a continuous pixel position. u wraps; latitude is clamped to
/// [-pi/2, pi/2], i.e. v to [-0.5, H - 0.5].
inline Vec3 pixel_to_dir(PixelCoord p, int width, int height) {
  const double lon = column_to_longitude(p.u, width);
  const double lat = std::clamp(row_to_latitude(p.v, height), -kPi / 2, kPi / 2);
  return lonlat_to_dir(lon, lat);
}

/// Inverse of pixel_to_dir. u is normalised to [0, W). Directions within
/// 1e-12 of a pole map to u = W/2.
inline PixelCoord dir_to_pixel(const Vec3& d, int width, int height) {
  const double lat = latitude_of(d);
  const double v = (kPi / 2 - lat) * height / kPi - 0.5;
  if (std::hypot(d.x(), d.y()) < 1e-12) return {width / 2.0, v};
  const double u = (longitude_of(d) + kPi) * width / kTwoPi - 0.5;
  return {wrap_coord(u, width), v};
}

/// Centre of pixel (row, col).
inline Vec3 pixel_center_dir(int row, int col, int width, int height) {
  return pixel_to_dir({static_cast<double>(col), static_cast<double>(row)}, width, height);
}

/// Rotation by angle (radians) about the vertical axis.
inline Mat3 yaw_rotation(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

/// Solid angle of one pixel in the given row.
inline double pixel_solid_angle(int row, int width, int height) {
  const double top = kPi / 2 - kPi * row / height;
  const double bottom = kPi / 2 - kPi * (row + 1) / height;
  return (kTwoPi / width) * (std::sin(top) - std::sin(bottom));
}

/// n points along the shorter great-circle arc a -> b (spherical linear
/// interpolation). Endpoints are returned exactly.
inline std::vector<Vec3> geodesic_arc(const Vec3& a, const Vec3& b, int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "geodesic_arc needs n >= 2");
  const double cosang = std::clamp(a.dot(b), -1.0, 1.0);
  if (std::abs(cosang + 1.0) < 1e-9)
    throw Error(ErrorCode::AntipodalEndpoints, "great circle through antipodes is not unique");

  std::vector<Vec3> out(n);
  out.front() = a;
  out.back() = b;
  const double omega = std::atan2(a.cross(b).norm(), cosang);
  if (omega < 1e-15) {
    std::fill(out.begin(), out.end(), a);
    return out;
  }
  const double s = std::sin(omega);
  for (int i = 1; i + 1 < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    Vec3 p = (std::sin((1 - t) * omega) / s) * a + (std::sin(t * omega) / s) * b;
    out[i] = p.normalized();
  }
  return out;
}

/// Great-circle distance in radians.
inline double angular_distance(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Column interval [start, start + length) on the circle of circumference W.
struct ColumnInterval {
  double start = 0.0;
  double length = 0.0;
};

/// Overlap length of two column intervals taken modulo W. Each length <= W.
inline double wrap_interval_overlap(ColumnInterval a, ColumnInterval b, double width) {
  const double sa = wrap_coord(a.start, width);
  const double sb = wrap_coord(b.start, width);
  const double la = std::clamp(a.length, 0.0, width);
  const double lb = std::clamp(b.length, 0.0, width);
  double total = 0.0;
  for (int k = -1; k <= 1; ++k) {
    const double lo = std::max(sa, sb + k * width);
    const double hi = std::min(sa + la, sb + lb + k * width);
    if (hi > lo) total += hi - lo;
  }
  return std::min(total, std::min(la, lb));
}

/// Wrap-minimal signed column difference a - b, in (-W/2, W/2].
inline double wrapped_column_delta(double a, double b, double width) {
  double d = wrap_coord(a - b, width);
  if (d > width / 2) d -= width;
  return d;
}

}  // namespace panoscene
