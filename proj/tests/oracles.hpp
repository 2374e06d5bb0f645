#pragma once

// Brute-force reference implementations used by the tests. Each one is
// written from the defining formula, independently of the library code.

#include "panoscene/anchors.hpp"
#include "panoscene/core.hpp"
#include "panoscene/layout.hpp"
#include "panoscene/object.hpp"
#include "panoscene/render.hpp"
#include "panoscene/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using namespace panoscene;

/// Squared Mahalanobis distance trying every wrap candidate of the column gap.
inline double mahalanobis2(double u, double v, const PanoBox& d, int width) {
  const double sw = d.w / 6.0, sh = d.h / 6.0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = -2; k <= 2; ++k) {
    const double du = (u - d.cx + k * width) / sw;
    const double dv = (v - d.cy) / sh;
    best = std::min(best, du * du + dv * dv);
  }
  return best;
}

/// Per-pixel argmin over same-class detections, gated by chi2.
inline EquirectGrid<std::uint16_t> assign(const SemanticMap& sem, const std::vector<PanoBox>& dets, double chi2) {
  EquirectGrid<std::uint16_t> ids(sem.width(), sem.height());
  for (int r = 0; r < sem.height(); ++r)
    for (int c = 0; c < sem.width(); ++c) {
      if (sem(r, c) == 0) continue;
      std::vector<std::pair<double, std::size_t>> cand;
      for (std::size_t k = 0; k < dets.size(); ++k)
        if (dets[k].class_id == sem(r, c)) cand.emplace_back(mahalanobis2(c, r, dets[k], sem.width()), k);
      if (cand.empty()) continue;
      const auto best = *std::min_element(cand.begin(), cand.end());
      if (best.first <= chi2) ids(r, c) = static_cast<std::uint16_t>(best.second + 1);
    }
  return ids;
}

/// Semantic map of two overlapping objects under the pairwise occlusion rule:
/// with overlap above tau of the smaller area the smaller object is in front,
/// otherwise the larger one. Equal areas rank the lower class id as smaller.
inline SemanticMap compose_pair(const BinaryMask& a, int class_a, const BinaryMask& b, int class_b, double tau) {
  const std::size_t area_a = count_nonzero(a), area_b = count_nonzero(b);
  std::size_t overlap = 0;
  for (std::size_t k = 0; k < a.data().size(); ++k) overlap += a.data()[k] && b.data()[k];
  const bool a_smaller = area_a != area_b ? area_a < area_b : class_a < class_b;
  const bool a_front = static_cast<double>(overlap) / static_cast<double>(std::min(area_a, area_b)) > tau
                           ? a_smaller
                           : !a_smaller;
  SemanticMap out(a.width(), a.height());
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    const bool in_a = a.data()[k], in_b = b.data()[k];
    if (in_a && in_b) out.data()[k] = static_cast<std::uint8_t>(a_front ? class_a : class_b);
    else if (in_a) out.data()[k] = static_cast<std::uint8_t>(class_a);
    else if (in_b) out.data()[k] = static_cast<std::uint8_t>(class_b);
  }
  return out;
}

/// Per-class IoU by explicit pixel sets; nullopt for classes in neither map.
inline std::vector<std::optional<double>> class_iou(const SemanticMap& pred, const SemanticMap& gt, int classes) {
  std::vector<std::optional<double>> out(classes);
  for (int c = 0; c < classes; ++c) {
    std::set<std::size_t> p, g;
    for (std::size_t k = 0; k < pred.data().size(); ++k) {
      if (pred.data()[k] == c) p.insert(k);
      if (gt.data()[k] == c) g.insert(k);
    }
    std::vector<std::size_t> inter, uni;
    std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(inter));
    std::set_union(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(uni));
    if (!uni.empty()) out[c] = static_cast<double>(inter.size()) / static_cast<double>(uni.size());
  }
  return out;
}

/// Pixel-centre rasterisation of a box on a W x H grid, wrapping columns.
inline BinaryMask raster_box(const PanoBox& b, int width, int height) {
  BinaryMask m(width, height);
  for (int r = 0; r < height; ++r) {
    if (r < b.top() || r >= b.top() + b.h) continue;
    for (int c = 0; c < width; ++c) {
      for (int k = -1; k <= 1; ++k) {
        const double u = c + k * width;
        if (u >= b.left() && u < b.left() + b.w) m(r, c) = 1;
      }
    }
  }
  return m;
}

inline double raster_iou(const PanoBox& a, const PanoBox& b, int width, int height) {
  const BinaryMask ma = raster_box(a, width, height), mb = raster_box(b, width, height);
  std::size_t inter = 0, uni = 0;
  for (std::size_t k = 0; k < ma.data().size(); ++k) {
    inter += ma.data()[k] && mb.data()[k];
    uni += ma.data()[k] || mb.data()[k];
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

struct ApOracle {
  double ap = 0.0;
  double ap_w = 0.0;
};

/// Precision/recall built rank by rank with rasterised IoU matching; the
/// interpolated precision at recall level j/G is the best precision at any
/// rank reaching that recall. AP averages it over the reached levels, AP_w
/// integrates it over recall.
inline ApOracle average_precision(const std::vector<PanoBox>& dets, const std::vector<PanoBox>& gts, int width,
                                  int height, double threshold) {
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dets[a].score > dets[b].score; });
  std::vector<bool> used(gts.size(), false);
  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    int arg = -1;
    double best = threshold;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g]) continue;
      const double iou = raster_iou(dets[order[rank]], gts[g], width, height);
      if (iou > best) {
        best = iou;
        arg = static_cast<int>(g);
      }
    }
    if (arg >= 0) {
      used[arg] = true;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
  }
  ApOracle out;
  if (tp == 0) return out;
  for (std::size_t j = 1; j <= tp; ++j) {
    const double level = static_cast<double>(j) / static_cast<double>(gts.size());
    double interp = 0.0;
    for (std::size_t k = 0; k < precision.size(); ++k)
      if (recall[k] >= level - 1e-12) interp = std::max(interp, precision[k]);
    out.ap += interp / static_cast<double>(tp);
    out.ap_w += interp / static_cast<double>(gts.size());
  }
  return out;
}

/// Even-odd fill of a polygon in pixel space, testing pixel centres.
inline BinaryMask planar_fill(const std::vector<PixelCoord>& poly, int width, int height) {
  BinaryMask m(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      bool inside = false;
      for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const PixelCoord& a = poly[i];
        const PixelCoord& b = poly[j];
        if ((a.v > r) != (b.v > r) && c < (b.u - a.u) * (r - a.v) / (b.v - a.v) + a.u) inside = !inside;
      }
      m(r, c) = inside;
    }
  return m;
}

/// Renders an object by casting every pixel of the panorama.
inline BinaryMask render_full(const Object3D& obj, const ManhattanFrame& frame, int width, int height) {
  BinaryMask m(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      if (intersect_object(obj, frame.to_room(pixel_center_dir(r, c, width, height)))) m(r, c) = 1;
  return m;
}

/// Random box with pixel-aligned edges; the column span may cross the seam.
inline PanoBox random_pixel_box(std::mt19937_64& rng, int width, int height, int class_id = 1, int max_w = 0,
                                int max_h = 0) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int w = pick(2, max_w > 0 ? max_w : width / 2);
  const int h = pick(2, max_h > 0 ? max_h : height / 2);
  const int c0 = pick(0, width - 1);
  const int r0 = pick(0, height - h);
  PanoBox b = box_from_pixel_span(class_id, std::uniform_real_distribution<double>(0, 1)(rng), c0, w, r0, h);
  b.cx = wrap_coord(b.cx, width);
  return b;
}

}  // namespace oracle
