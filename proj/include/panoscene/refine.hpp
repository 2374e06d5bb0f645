#pragma once

// Layout-driven instance mask refinement.
//
// Rules, applied per instance in this order:
//   (a) wall-bound classes keep only pixels on their majority wall;
//   (d) floor-standing classes lose pixels on the ceiling;
//   (b) floor-reaching classes (doors) grow down each column to the floor;
//   (c) holes (complement components not reaching the top or bottom row) are
//       filled.
// Growth never takes pixels owned by another instance.

#include "panoscene/classes.hpp"
#include "panoscene/core.hpp"
#include "panoscene/instances.hpp"
#include "panoscene/layout.hpp"

#include <deque>
#include <map>
#include <vector>

namespace panoscene {

/// Most frequent wall plane under the instance, or kPlaneNone.
inline int majority_wall(const InstanceMap& im, const PlaneMap& pm, int id) {
  std::map<int, std::size_t> hist;
  for (std::size_t k = 0; k < im.ids.data().size(); ++k)
    if (im.ids.data()[k] == id && is_wall(pm.data()[k])) ++hist[pm.data()[k]];
  int best = kPlaneNone;
  std::size_t best_count = 0;
  for (const auto& [plane, count] : hist)
    if (count > best_count) {
      best = plane;
      best_count = count;
    }
  return best;
}

/// Pixels of the complement of `id` that are not 4-connected (wrap-aware) to
/// the top or bottom row.
inline std::vector<std::size_t> find_holes(const EquirectGrid<std::uint16_t>& ids, int id) {
  const int w = ids.width();
  const int h = ids.height();
  std::vector<std::uint8_t> outside(ids.pixel_count(), 0);
  std::deque<std::size_t> queue;
  auto seed = [&](int r, int c) {
    const std::size_t p = ids.index(0, r, c);
    if (ids.data()[p] != id && !outside[p]) {
      outside[p] = 1;
      queue.push_back(p);
    }
  };
  for (int c = 0; c < w; ++c) {
    seed(0, c);
    seed(h - 1, c);
  }
  while (!queue.empty()) {
    const std::size_t p = queue.front();
    queue.pop_front();
    const int r = static_cast<int>(p / w);
    const int c = static_cast<int>(p % w);
    if (r > 0) seed(r - 1, c);
    if (r + 1 < h) seed(r + 1, c);
    seed(r, c - 1);
    seed(r, c + 1);
  }
  std::vector<std::size_t> holes;
  for (std::size_t p = 0; p < outside.size(); ++p)
    if (!outside[p] && ids.data()[p] != id) holes.push_back(p);
  return holes;
}

inline InstanceMap refine_masks(const InstanceMap& im, const PlaneMap& pm, const ClassSet& classes) {
  if (im.ids.width() != pm.width() || im.ids.height() != pm.height())
    throw Error(ErrorCode::ShapeMismatch, "instance map and plane map differ in shape");
  InstanceMap out = im;
  auto& ids = out.ids.data();
  auto& cls = out.classes.data();
  const auto& planes = pm.data();
  const int w = pm.width();
  const int h = pm.height();

  auto release = [&](std::size_t p) {
    ids[p] = 0;
    cls[p] = 0;
  };
  auto claim = [&](std::size_t p, const InstanceInfo& info) {
    ids[p] = static_cast<std::uint16_t>(info.id);
    cls[p] = static_cast<std::uint8_t>(info.class_id);
  };

  for (const InstanceInfo& info : out.instances) {
    if (!classes.contains(info.class_id)) continue;
    const ClassInfo& ci = classes[info.class_id];

    if (ci.clip_to_wall) {
      const int wall = majority_wall(out, pm, info.id);
      if (wall != kPlaneNone)
        for (std::size_t p = 0; p < ids.size(); ++p)
          if (ids[p] == info.id && planes[p] != wall) release(p);
    }

    if (ci.placement == Placement::Cuboid)
      for (std::size_t p = 0; p < ids.size(); ++p)
        if (ids[p] == info.id && planes[p] == kPlaneCeiling) release(p);

    if (ci.reach_floor) {
      for (int c = 0; c < w; ++c) {
        int lowest = -1;
        for (int r = h - 1; r >= 0; --r)
          if (out.ids(r, c) == info.id) {
            lowest = r;
            break;
          }
        if (lowest < 0 || !is_wall(pm(lowest, c))) continue;
        for (int r = lowest + 1; r < h && is_wall(pm(r, c)); ++r) {
          const std::size_t p = out.ids.index(0, r, c);
          if (ids[p] == 0) claim(p, info);
        }
      }
    }

    for (std::size_t p : find_holes(out.ids, info.id))
      if (ids[p] == 0) claim(p, info);
  }
  out.recount();
  return out;
}

}  // namespace panoscene
