#pragma once

// Object masks from polygon annotations on the sphere, and their composition
// into a semantic map under the pairwise occlusion rule: when two masks
// overlap by more than a fraction tau of the smaller one, the smaller object
// is in front; otherwise the larger one is.

#include "panoscene/core.hpp"
#include "panoscene/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace panoscene {

struct ObjectAnnotation {
  int class_id = 0;
  int instance_id = 0;
  std::vector<PixelCoord> points;  // ordered polygon vertices

  friend bool operator==(const ObjectAnnotation&, const ObjectAnnotation&) = default;
};

/// Sample points of the polygon outline, each edge traced as a geodesic with
/// at least two samples per pixel of arc length.
inline std::vector<Vec3> trace_polygon_outline(const ObjectAnnotation& ann, int width, int height) {
  std::vector<Vec3> out;
  const std::size_t n = ann.points.size();
  const double px = kTwoPi / width;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 a = pixel_to_dir(ann.points[i], width, height);
    const Vec3 b = pixel_to_dir(ann.points[(i + 1) % n], width, height);
    const int samples = std::max(2, static_cast<int>(std::ceil(2.0 * angular_distance(a, b) / px)) + 1);
    auto arc = geodesic_arc(a, b, samples);
    out.insert(out.end(), arc.begin(), arc.end() - 1);
  }
  return out;
}

/// Total signed angle swept by the polygon's geodesic edges around p.
inline double spherical_winding(const Vec3& p, const std::vector<Vec3>& verts) {
  double total = 0.0;
  const std::size_t n = verts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = verts[i];
    const Vec3& b = verts[(i + 1) % n];
    const double y = p.dot(a.cross(b));
    const double x = a.dot(b) - p.dot(a) * p.dot(b);
    total += std::atan2(y, x);
  }
  return total;
}

/// Binary mask of a spherical polygon. Pixels whose centre has winding number
/// +-1 are inside; polygons must fit in a hemisphere.
inline BinaryMask rasterize_spherical_polygon(const ObjectAnnotation& ann, int width, int height) {
  if (ann.points.size() < 3)
    throw Error(ErrorCode::DegeneratePolygon, "polygon needs at least 3 vertices");
  std::vector<Vec3> verts;
  verts.reserve(ann.points.size());
  for (const PixelCoord& p : ann.points) verts.push_back(pixel_to_dir(p, width, height));
  for (std::size_t i = 0; i < verts.size(); ++i)
    if (std::abs(verts[i].dot(verts[(i + 1) % verts.size()]) + 1.0) < 1e-9)
      throw Error(ErrorCode::DegeneratePolygon, "polygon edge joins antipodal points");

  // The outline bounds the rows that can be inside, unless the polygon
  // surrounds a pole.
  const auto outline = trace_polygon_outline(ann, width, height);
  double vmin = height, vmax = -1.0;
  for (const Vec3& d : outline) {
    const double v = dir_to_pixel(d, width, height).v;
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  int r0 = std::max(0, static_cast<int>(std::floor(vmin)));
  int r1 = std::min(height - 1, static_cast<int>(std::ceil(vmax)));

  // The antipode of an inside point winds the other way with the same
  // magnitude; only the hemisphere around the vertex mean counts.
  Vec3 axis = Vec3::Zero();
  for (const Vec3& v : verts) axis += v;
  const auto inside = [&](const Vec3& p) {
    return p.dot(axis) > 0 && std::abs(spherical_winding(p, verts)) > kPi;
  };
  if (inside(Vec3::UnitZ())) r0 = 0;
  if (inside(-Vec3::UnitZ())) r1 = height - 1;

  BinaryMask mask(width, height);
  std::size_t area = 0;
  for (int r = r0; r <= r1; ++r) {
    for (int c = 0; c < width; ++c) {
      if (inside(pixel_center_dir(r, c, width, height))) {
        mask(r, c) = 1;
        ++area;
      }
    }
  }
  if (area < 1) throw Error(ErrorCode::DegeneratePolygon, "polygon covers less than one pixel");
  return mask;
}

/// Sum of pixel solid angles covered by a mask (steradians).
inline double mask_solid_angle(const BinaryMask& m) {
  double total = 0.0;
  for (int r = 0; r < m.height(); ++r) {
    const double a = pixel_solid_angle(r, m.width(), m.height());
    for (int c = 0; c < m.width(); ++c)
      if (m(r, c)) total += a;
  }
  return total;
}

/// Area of a convex spherical polygon by spherical excess.
inline double spherical_polygon_area(const std::vector<Vec3>& verts) {
  const std::size_t n = verts.size();
  double angle_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& prev = verts[(i + n - 1) % n];
    const Vec3& cur = verts[i];
    const Vec3& next = verts[(i + 1) % n];
    const Vec3 t1 = (prev - cur.dot(prev) * cur).normalized();
    const Vec3 t2 = (next - cur.dot(next) * cur).normalized();
    angle_sum += std::acos(std::clamp(t1.dot(t2), -1.0, 1.0));
  }
  return angle_sum - (static_cast<double>(n) - 2.0) * kPi;
}

struct MaskEntry {
  BinaryMask mask;
  int class_id = 0;
  std::size_t size = 0;  // 0 means "use the pixel count"
};

struct ComposedMap {
  SemanticMap labels;            // class per pixel, 0 = background
  EquirectGrid<int> owner;       // index into the input list, -1 = none
  std::vector<int> paint_order;  // input indices, lowest priority first
};

namespace detail {

inline std::size_t entry_size(const MaskEntry& e) {
  return e.size > 0 ? e.size : count_nonzero(e.mask);
}

/// Total order used when two objects are otherwise indistinguishable:
/// smaller size first, then lower class, then mask contents.
inline bool entry_less(const MaskEntry& a, std::size_t sa, const MaskEntry& b, std::size_t sb) {
  if (sa != sb) return sa < sb;
  if (a.class_id != b.class_id) return a.class_id < b.class_id;
  return std::lexicographical_compare(a.mask.data().begin(), a.mask.data().end(),
                                      b.mask.data().begin(), b.mask.data().end(),
                                      [](auto x, auto y) { return x > y; });
}

}  // namespace detail

/// Pairwise occlusion rule. Returns true when object a is drawn in front of b.
/// `overlap` is the number of shared pixels.
inline bool occludes(const MaskEntry& a, std::size_t size_a, const MaskEntry& b,
                     std::size_t size_b, std::size_t overlap, double tau) {
  const bool a_smaller = detail::entry_less(a, size_a, b, size_b);
  const double frac = static_cast<double>(overlap) / static_cast<double>(std::min(size_a, size_b));
  return frac > tau ? a_smaller : !a_smaller;
}

/// Composes masks into a semantic map. Objects are ranked by the number of
/// pairwise occlusion contests they win (ties: smaller first, see
/// detail::entry_less) and painted from lowest to highest rank.
inline ComposedMap compose_semantic(const std::vector<MaskEntry>& masks, double tau) {
  if (masks.empty()) throw Error(ErrorCode::InvalidArgument, "compose_semantic needs masks");
  const int w = masks.front().mask.width();
  const int h = masks.front().mask.height();
  for (const MaskEntry& m : masks)
    if (m.mask.width() != w || m.mask.height() != h)
      throw Error(ErrorCode::ShapeMismatch, "all masks must share one grid");

  const std::size_t n = masks.size();
  std::vector<std::size_t> sizes(n);
  for (std::size_t i = 0; i < n; ++i) sizes[i] = std::max<std::size_t>(1, detail::entry_size(masks[i]));

  std::vector<int> wins(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::size_t overlap = 0;
      const auto& a = masks[i].mask.data();
      const auto& b = masks[j].mask.data();
      for (std::size_t k = 0; k < a.size(); ++k) overlap += (a[k] && b[k]) ? 1 : 0;
      if (overlap == 0) continue;
      if (occludes(masks[i], sizes[i], masks[j], sizes[j], overlap, tau))
        ++wins[i];
      else
        ++wins[j];
    }
  }

  ComposedMap out{SemanticMap(w, h), EquirectGrid<int>(w, h, 1, -1), {}};
  out.paint_order.resize(n);
  std::iota(out.paint_order.begin(), out.paint_order.end(), 0);
  // Highest rank last: fewer wins first; among equal wins the larger object
  // first so the smaller ends on top.
  std::sort(out.paint_order.begin(), out.paint_order.end(), [&](int a, int b) {
    if (wins[a] != wins[b]) return wins[a] < wins[b];
    return detail::entry_less(masks[b], sizes[b], masks[a], sizes[a]);
  });
  for (int idx : out.paint_order) {
    const auto& m = masks[idx].mask.data();
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (!m[k]) continue;
      out.labels.data()[k] = static_cast<std::uint8_t>(masks[idx].class_id);
      out.owner.data()[k] = idx;
    }
  }
  return out;
}

}  // namespace panoscene
