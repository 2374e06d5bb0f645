#pragma once

// Synthetic Manhattan rooms rendered by ray casting. Provides ground truth for
// the mask -> 3D round trip: per-object masks, a semantic map, wrap-aware
// detection boxes, the layout corners and the placed objects themselves.

#include "panoscene/anchors.hpp"
#include "panoscene/classes.hpp"
#include "panoscene/core.hpp"
#include "panoscene/layout.hpp"
#include "panoscene/placement.hpp"
#include "panoscene/render.hpp"
#include "panoscene/sphere.hpp"

#include <algorithm>
#include <limits>
#include <tuple>
#include <optional>
#include <random>
#include <vector>

namespace panoscene {

struct SyntheticScene {
  int width = 1024;
  int height = 512;
  double yaw = 0.0;  // of the Manhattan x axis in camera coordinates
  std::vector<Eigen::Vector2d> room;  // floor polygon, room coordinates
  double ceiling_z = 1.5;
  std::vector<Object3D> objects;

  ManhattanFrame frame() const { return ManhattanFrame::from_yaw(yaw); }
};

struct Fixture {
  int width = 0;
  int height = 0;
  std::vector<BinaryMask> masks;  // one per scene object
  SemanticMap semantic;
  std::vector<Detection> detections;
  std::vector<PixelCoord> ceiling_corners;
  std::vector<PixelCoord> floor_corners;
  ManhattanFrame frame;
  std::vector<Object3D> ground_truth;

  LayoutModel layout() const {
    return LayoutModel::from_corners(ceiling_corners, floor_corners, frame, width, height);
  }
};

/// Tight wrap-aware box around a mask (pixel-centre containment).
inline std::optional<PanoBox> tight_box(const BinaryMask& m, int class_id, double score = 1.0) {
  const int w = m.width();
  int rmin = m.height(), rmax = -1;
  std::vector<bool> used(w, false);
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < w; ++c)
      if (m(r, c)) {
        used[c] = true;
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
      }
  if (rmax < 0) return std::nullopt;
  // Column span: complement of the widest circular gap.
  int first = 0;
  while (!used[first]) ++first;
  int best_len = 0, best_end = first, run = 0;
  for (int k = 1; k <= w; ++k) {
    const int c = wrap_index(first + k, w);
    if (!used[c]) {
      ++run;
    } else {
      if (run > best_len) {
        best_len = run;
        best_end = c;
      }
      run = 0;
    }
  }
  const int start = best_len == 0 ? 0 : best_end;
  const int ncols = w - best_len;
  return box_from_pixel_span(class_id, score, start, ncols, rmin, rmax - rmin + 1);
}

inline void check_inside_room(const Object3D& obj, const LayoutModel& layout) {
  const Vec3 lo = obj.min_corner();
  const Vec3 hi = obj.max_corner();
  const double eps = 1e-7;
  if (lo.z() < layout.floor_z() - eps || hi.z() > layout.ceiling_z() + eps)
    throw Error(ErrorCode::ObjectOutsideRoom, "object exceeds floor or ceiling");
  for (double x : {lo.x(), hi.x()})
    for (double y : {lo.y(), hi.y()}) {
      Eigen::Vector2d p(x, y);
      for (int k = 0; k < 2; ++k) {
        const double toward = obj.dims[k] > 0 ? obj.center[k] - p[k] : -p[k];
        p[k] += toward > 0 ? eps : -eps;
      }
      if (!layout.contains_xy(p.x(), p.y()))
        throw Error(ErrorCode::ObjectOutsideRoom, "object footprint leaves the room");
    }
}

/// Renders the scene. Box corners are jittered by N(0, jitter^2) pixels and
/// scores drawn from [0.6, 1]; both use `seed`.
inline Fixture generate_fixture(const SyntheticScene& scene, std::uint64_t seed, double jitter = 0.0) {
  Fixture fx;
  fx.width = scene.width;
  fx.height = scene.height;
  fx.frame = scene.frame();
  std::tie(fx.ceiling_corners, fx.floor_corners) =
      project_room_corners(scene.room, scene.ceiling_z, fx.frame, scene.width, scene.height);
  const LayoutModel layout = fx.layout();
  for (const Object3D& obj : scene.objects) check_inside_room(obj, layout);

  const int w = scene.width, h = scene.height;
  fx.semantic = SemanticMap(w, h);
  fx.masks.assign(scene.objects.size(), BinaryMask(w, h));
  std::vector<double> depth(fx.semantic.pixel_count(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const PixelWindow win = object_window(scene.objects[k], fx.frame, w, h);
    for (int r = win.row_lo; r <= win.row_hi; ++r)
      for (int j = 0; j < win.ncols; ++j) {
        const int c = wrap_index(win.col_lo + j, w);
        const Vec3 d = fx.frame.to_room(pixel_center_dir(r, c, w, h));
        const auto t = intersect_object(scene.objects[k], d);
        const std::size_t p = fx.semantic.index(0, r, c);
        if (!t || *t >= depth[p] || *t > layout.cast(d).t * (1 + 1e-9)) continue;
        for (auto& m : fx.masks) m.data()[p] = 0;
        fx.masks[k].data()[p] = 1;
        fx.semantic.data()[p] = static_cast<std::uint8_t>(scene.objects[k].class_id);
        depth[p] = *t;
      }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> score(0.6, 1.0);
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    auto box = tight_box(fx.masks[k], scene.objects[k].class_id, score(rng));
    if (!box) continue;
    if (jitter > 0) {
      double l = box->left() + jitter * noise(rng);
      double rgt = box->left() + box->w + jitter * noise(rng);
      double t = box->top() + jitter * noise(rng);
      double b = box->top() + box->h + jitter * noise(rng);
      if (rgt - l < 1) rgt = l + 1;
      if (b - t < 1) b = t + 1;
      box->cx = wrap_coord(0.5 * (l + rgt), w);
      box->w = std::min<double>(rgt - l, w);
      box->cy = 0.5 * (t + b);
      box->h = std::min<double>(b - t, h);
    }
    fx.detections.push_back(*box);
  }
  fx.ground_truth = scene.objects;
  for (std::size_t k = 0; k < fx.ground_truth.size(); ++k) fx.ground_truth[k].instance_id = static_cast<int>(k + 1);
  return fx;
}

struct RandomSceneParams {
  int width = 1024;
  int min_cuboids = 1;
  int max_cuboids = 4;
  int wall_objects = 2;
  int attempts = 60;
  int separation_px = 3;
};

namespace detail {

/// Mask dilated by `radius` pixels (Chebyshev), wrap-aware.
inline BinaryMask dilate(const BinaryMask& m, int radius) {
  BinaryMask out(m.width(), m.height());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      if (!m(r, c)) continue;
      for (int dr = -radius; dr <= radius; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= m.height()) continue;
        for (int dc = -radius; dc <= radius; ++dc) out(rr, c + dc) = 1;
      }
    }
  return out;
}

inline bool overlaps(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t k = 0; k < a.data().size(); ++k)
    if (a.data()[k] && b.data()[k]) return true;
  return false;
}

}  // namespace detail

/// Random rectangular room with cuboids standing against distinct walls and
/// planar objects hung above camera height. Objects are rejected until their
/// masks are pairwise separated and their boxes disjoint.
inline SyntheticScene random_scene(std::uint64_t seed, const ClassSet& classes,
                                   const RandomSceneParams& params = {}) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  SyntheticScene s;
  s.width = params.width;
  s.height = params.width / 2;
  s.yaw = uni(-kPi, kPi);
  const double x0 = -uni(1.6, 3.2), x1 = uni(1.6, 3.2);
  const double y0 = -uni(1.6, 3.2), y1 = uni(1.6, 3.2);
  s.room = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  s.ceiling_z = uni(1.2, 1.7);
  const ManhattanFrame frame = s.frame();
  const LayoutModel layout = LayoutModel::from_corners(
      project_room_corners(s.room, s.ceiling_z, frame, s.width, s.height).first,
      project_room_corners(s.room, s.ceiling_z, frame, s.width, s.height).second, frame, s.width, s.height);

  std::vector<int> cuboid_classes, wall_classes;
  for (const ClassInfo& c : classes.all()) {
    if (c.placement == Placement::Cuboid) cuboid_classes.push_back(c.id);
    if (c.clip_to_wall) wall_classes.push_back(c.id);
  }

  BinaryMask occupied(s.width, s.height);
  std::vector<PanoBox> boxes;
  auto try_accept = [&](const Object3D& obj) {
    const BinaryMask m = render_object_mask(obj, frame, s.width, s.height);
    const std::size_t area = count_nonzero(m);
    if (area < 200) return false;
    if (detail::overlaps(detail::dilate(m, params.separation_px), occupied)) return false;
    const auto box = tight_box(m, obj.class_id);
    for (const PanoBox& b : boxes)
      if (pano_iou(*box, b, s.width) > 0) return false;
    for (std::size_t k = 0; k < m.data().size(); ++k) occupied.data()[k] |= m.data()[k];
    boxes.push_back(*box);
    s.objects.push_back(obj);
    return true;
  };

  const auto& walls = layout.walls();
  std::vector<int> wall_order(walls.size());
  for (std::size_t i = 0; i < walls.size(); ++i) wall_order[i] = static_cast<int>(i);
  std::shuffle(wall_order.begin(), wall_order.end(), rng);

  const int n_cuboids = pick(params.min_cuboids, std::min<int>(params.max_cuboids, static_cast<int>(walls.size())));
  for (int k = 0; k < n_cuboids; ++k) {
    const Wall& wall = walls[wall_order[k]];
    const double dist = std::abs(wall.offset);
    for (int attempt = 0; attempt < params.attempts; ++attempt) {
      Object3D obj;
      obj.kind = ObjectKind::Cuboid;
      obj.class_id = cuboid_classes[pick(0, static_cast<int>(cuboid_classes.size()) - 1)];
      const double depth = uni(0.4, std::min(1.2, dist - 0.6));
      const double width = uni(0.6, std::min(2.0, wall.hi - wall.lo - 0.4));
      const double height = uni(0.3, 0.6);
      const double lateral = uni(wall.lo + 0.2 + width / 2, wall.hi - 0.2 - width / 2);
      const double inward = wall.offset > 0 ? -1.0 : 1.0;
      obj.center[wall.axis] = wall.offset + inward * depth / 2;
      obj.dims[wall.axis] = depth;
      obj.center[wall.along()] = lateral;
      obj.dims[wall.along()] = width;
      obj.center.z() = layout.floor_z() + height / 2;
      obj.dims.z() = height;
      if (try_accept(obj)) break;
    }
  }
  if (s.objects.empty()) throw Error(ErrorCode::InvalidArgument, "could not place any cuboid");

  for (int k = 0; k < params.wall_objects; ++k) {
    for (int attempt = 0; attempt < params.attempts; ++attempt) {
      const Wall& wall = walls[pick(0, static_cast<int>(walls.size()) - 1)];
      Object3D obj;
      obj.kind = ObjectKind::WallRect;
      obj.class_id = wall_classes[pick(0, static_cast<int>(wall_classes.size()) - 1)];
      const double width = uni(0.5, std::min(1.2, wall.hi - wall.lo - 0.4));
      const double height = uni(0.35, std::min(0.8, s.ceiling_z - 0.35));
      const double bottom = uni(0.15, s.ceiling_z - 0.1 - height);
      const double lateral = uni(wall.lo + 0.2 + width / 2, wall.hi - 0.2 - width / 2);
      // Vertical edges straight ahead of the camera are ambiguous to classify.
      if (std::abs(lateral - width / 2) < 0.15 || std::abs(lateral + width / 2) < 0.15) continue;
      obj.center[wall.axis] = wall.offset;
      obj.center[wall.along()] = lateral;
      obj.dims[wall.along()] = width;
      obj.center.z() = bottom + height / 2;
      obj.dims.z() = height;
      obj.plane = wall_plane(static_cast<int>(&wall - walls.data()));
      if (try_accept(obj)) break;
    }
  }
  return s;
}

}  // namespace panoscene
