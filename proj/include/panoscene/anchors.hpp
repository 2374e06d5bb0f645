#pragma once

// Panoramic default boxes, wrap-aware IoU and the horizontal-rotation
// augmentation.

#include "panoscene/core.hpp"
#include "panoscene/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace panoscene {

/// Axis-aligned box in pixel index coordinates. Horizontal extent is
/// [cx - w/2, cx + w/2) taken modulo W; a pixel belongs to the box when its
/// centre lies inside.
struct PanoBox {
  int class_id = 0;
  double score = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const noexcept { return cx - w / 2; }
  double top() const noexcept { return cy - h / 2; }
  double area() const noexcept { return w * h; }

  friend bool operator==(const PanoBox&, const PanoBox&) = default;
};

using Detection = PanoBox;

inline bool is_valid(const PanoBox& b, int width, int height) {
  return b.w > 0 && b.h > 0 && b.w <= width && b.h <= height && b.score >= 0 && b.score <= 1;
}

/// Builds a box from pixel edges: columns [left, left + w), rows [top, top + h)
/// in index coordinates shifted by half a pixel.
inline PanoBox box_from_pixel_span(int class_id, double score, int first_col, int ncols,
                                   int first_row, int nrows) {
  return {class_id, score, first_col - 0.5 + ncols / 2.0, first_row - 0.5 + nrows / 2.0,
          static_cast<double>(ncols), static_cast<double>(nrows)};
}

/// Intersection over union with horizontal wrap.
inline double pano_iou(const PanoBox& a, const PanoBox& b, int width) {
  const double ix = wrap_interval_overlap({a.left(), a.w}, {b.left(), b.w}, width);
  const double iy = std::max(0.0, std::min(a.top() + a.h, b.top() + b.h) - std::max(a.top(), b.top()));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

struct GridSize {
  int rows = 1;
  int cols = 2;
};

struct AnchorConfig {
  std::vector<GridSize> grids;
  std::vector<double> ratios{1.0, 2.0, 0.5, 3.0, 1.0 / 3.0};
  double s_min = 0.05;  // fraction of H, finest layer
  double s_max = 0.9;   // fraction of H, coarsest layer

  /// Dyadic pyramid 128x256, 64x128, ..., 1x2.
  static AnchorConfig panoramic_default() {
    AnchorConfig cfg;
    for (int rows = 128; rows >= 1; rows /= 2) cfg.grids.push_back({rows, 2 * rows});
    return cfg;
  }
};

inline void validate(const AnchorConfig& cfg) {
  if (cfg.grids.empty() || cfg.ratios.empty())
    throw Error(ErrorCode::InvalidArgument, "anchor config needs grids and ratios");
  for (const GridSize& g : cfg.grids)
    if (g.rows < 1 || g.cols != 2 * g.rows)
      throw Error(ErrorCode::InvalidArgument, "anchor grids must have cols = 2 * rows");
  for (double r : cfg.ratios)
    if (!(r > 0)) throw Error(ErrorCode::InvalidArgument, "aspect ratios must be positive");
  if (!(cfg.s_min > 0 && cfg.s_max >= cfg.s_min))
    throw Error(ErrorCode::InvalidArgument, "anchor scales must satisfy 0 < s_min <= s_max");
}

/// Scale (side of the ratio-1 anchor, pixels) of layer l out of n, linear in l.
inline double layer_scale(const AnchorConfig& cfg, std::size_t layer, int height) {
  const std::size_t n = cfg.grids.size();
  const double t = n > 1 ? static_cast<double>(layer) / static_cast<double>(n - 1) : 0.0;
  return (cfg.s_min + (cfg.s_max - cfg.s_min) * t) * height;
}

inline std::size_t anchor_count(const AnchorConfig& cfg) {
  std::size_t n = 0;
  for (const GridSize& g : cfg.grids) n += static_cast<std::size_t>(g.rows) * g.cols;
  return n * cfg.ratios.size();
}

/// One anchor per (layer, cell, ratio); layer-major, row-major, ratio-minor.
/// Width and height are s*sqrt(r) and s/sqrt(r), clipped to W and H.
inline std::vector<PanoBox> generate_anchors(const AnchorConfig& cfg, int width, int height) {
  validate(cfg);
  std::vector<PanoBox> out;
  out.reserve(anchor_count(cfg));
  for (std::size_t l = 0; l < cfg.grids.size(); ++l) {
    const GridSize g = cfg.grids[l];
    const double s = layer_scale(cfg, l, height);
    const double cell_w = static_cast<double>(width) / g.cols;
    const double cell_h = static_cast<double>(height) / g.rows;
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) {
        const double cx = (c + 0.5) * cell_w - 0.5;
        const double cy = (r + 0.5) * cell_h - 0.5;
        for (double ratio : cfg.ratios) {
          const double q = std::sqrt(ratio);
          out.push_back({0, 0.0, cx, cy, std::min(s * q, double(width)), std::min(s / q, double(height))});
        }
      }
    }
  }
  return out;
}

struct AnchorMatch {
  std::vector<int> anchor_to_gt;  // -1 when below threshold
  std::vector<int> gt_to_anchor;  // best anchor per ground truth
};

/// Training-style matching: every anchor takes its best ground truth when the
/// IoU reaches `positive_iou`; every ground truth also claims its single
/// best anchor. Ties resolve to the lower index.
inline AnchorMatch match_anchors(const std::vector<PanoBox>& anchors,
                                 const std::vector<PanoBox>& gts, int width,
                                 double positive_iou = 0.5) {
  AnchorMatch m;
  m.anchor_to_gt.assign(anchors.size(), -1);
  m.gt_to_anchor.assign(gts.size(), -1);
  std::vector<double> best_gt_iou(gts.size(), -1.0);
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    double best = -1.0;
    int arg = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = pano_iou(anchors[a], gts[g], width);
      if (iou > best) {
        best = iou;
        arg = static_cast<int>(g);
      }
      if (iou > best_gt_iou[g]) {
        best_gt_iou[g] = iou;
        m.gt_to_anchor[g] = static_cast<int>(a);
      }
    }
    if (arg >= 0 && best >= positive_iou) m.anchor_to_gt[a] = arg;
  }
  for (std::size_t g = 0; g < gts.size(); ++g)
    if (m.gt_to_anchor[g] >= 0) m.anchor_to_gt[m.gt_to_anchor[g]] = static_cast<int>(g);
  return m;
}

/// Greedy non-maximum suppression with wrap-aware IoU; returns kept indices
/// sorted by descending score (stable for ties). Only boxes of the same class
/// suppress each other.
inline std::vector<std::size_t> nms(const std::vector<PanoBox>& boxes, int width,
                                    double iou_threshold) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return boxes[a].score > boxes[b].score; });
  std::vector<std::size_t> keep;
  for (std::size_t i : order) {
    bool suppressed = false;
    for (std::size_t k : keep)
      if (boxes[k].class_id == boxes[i].class_id && pano_iou(boxes[k], boxes[i], width) > iou_threshold) {
        suppressed = true;
        break;
      }
    if (!suppressed) keep.push_back(i);
  }
  return keep;
}

/// Column shift corresponding to a yaw rotation of `degrees`.
inline int rotation_shift(double degrees, int width) {
  const double d = wrap_coord(degrees, 360.0);
  return wrap_index(static_cast<long long>(std::llround(d * width / 360.0)), width);
}

inline PanoBox shift_box(PanoBox b, int shift, int width) {
  b.cx = wrap_coord(b.cx + shift, width);
  return b;
}

/// Image plus annotations subject to augmentation.
struct RotatableSample {
  EquirectGrid<double> image;
  std::vector<PanoBox> boxes;
  std::vector<EquirectGrid<std::uint8_t>> masks;
  std::vector<EquirectGrid<std::uint16_t>> id_maps;
};

/// Horizontal rotation by `degrees` (any real, taken mod 360): every raster is
/// column shifted by round(degrees * W / 360) and every box centre moves with
/// it. Labels are untouched.
inline RotatableSample rotate_horizontal(const RotatableSample& s, double degrees, int width) {
  const int k = rotation_shift(degrees, width);
  RotatableSample out;
  if (!s.image.empty()) out.image = shift_columns(s.image, k);
  out.boxes.reserve(s.boxes.size());
  for (const PanoBox& b : s.boxes) out.boxes.push_back(shift_box(b, k, width));
  for (const auto& m : s.masks) out.masks.push_back(shift_columns(m, k));
  for (const auto& m : s.id_maps) out.id_maps.push_back(shift_columns(m, k));
  return out;
}

}  // namespace panoscene
