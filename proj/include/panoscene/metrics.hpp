#pragma once

// Detection and segmentation metrics: per-class AP at a wrap-aware IoU
// threshold, the detection-weighted mean AP, and mean IoU.

#include "panoscene/anchors.hpp"
#include "panoscene/core.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

namespace panoscene {

inline constexpr double kDetectionIouThreshold = 0.3;

struct PrPoint {
  double precision = 0.0;
  double recall = 0.0;
  bool true_positive = false;
};

struct ApResult {
  double ap = 0.0;    // mean interpolated precision over achieved recall levels
  double ap_w = 0.0;  // recall-interval weighted area under the interpolated curve
  std::size_t num_gt = 0;
  std::size_t num_det = 0;
  std::size_t num_tp = 0;
  std::vector<PrPoint> curve;
};

/// Ranks detections by descending score (ties keep input order) and matches
/// each to the unmatched ground truth of highest IoU, when that IoU exceeds
/// `iou_threshold`. Throws NoGroundTruth when `gts` is empty.
inline ApResult average_precision(const std::vector<PanoBox>& dets, const std::vector<PanoBox>& gts,
                                  int width, double iou_threshold = kDetectionIouThreshold) {
  if (gts.empty()) throw Error(ErrorCode::NoGroundTruth, "AP is undefined without ground truth");
  ApResult res;
  res.num_gt = gts.size();
  res.num_det = dets.size();

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<bool> matched(gts.size(), false);
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const PanoBox& d = dets[order[rank]];
    double best = iou_threshold;
    int arg = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (matched[g]) continue;
      const double iou = pano_iou(d, gts[g], width);
      if (iou > best) {
        best = iou;
        arg = static_cast<int>(g);
      }
    }
    const bool hit = arg >= 0;
    if (hit) {
      matched[arg] = true;
      ++tp;
    }
    res.curve.push_back({static_cast<double>(tp) / static_cast<double>(rank + 1),
                         static_cast<double>(tp) / static_cast<double>(gts.size()), hit});
  }
  res.num_tp = tp;
  if (tp == 0) return res;

  // Interpolated precision: running maximum from the tail of the ranking.
  std::vector<double> envelope(res.curve.size());
  double run = 0.0;
  for (std::size_t i = res.curve.size(); i-- > 0;) {
    run = std::max(run, res.curve[i].precision);
    envelope[i] = run;
  }
  double sum = 0.0;
  double area = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < res.curve.size(); ++i) {
    if (!res.curve[i].true_positive) continue;
    sum += envelope[i];
    area += (res.curve[i].recall - prev_recall) * envelope[i];
    prev_recall = res.curve[i].recall;
  }
  res.ap = sum / static_cast<double>(tp);
  res.ap_w = area;
  return res;
}

struct ClassAp {
  double ap = 0.0;
  std::size_t count = 0;  // d_i
};

/// sum_i (d_i / n) AP_i with n = sum_i d_i.
inline double weighted_map(const std::vector<ClassAp>& per_class) {
  std::size_t n = 0;
  for (const ClassAp& c : per_class) n += c.count;
  if (n == 0) throw Error(ErrorCode::EmptyEval, "weighted mAP needs at least one counted sample");
  double acc = 0.0;
  for (const ClassAp& c : per_class)
    acc += static_cast<double>(c.count) / static_cast<double>(n) * c.ap;
  return acc;
}

struct IouResult {
  std::vector<std::optional<double>> per_class;  // nullopt: absent from both maps
  double miou = 0.0;
};

/// Per-class IoU over classes 0..num_classes-1 and their mean over classes
/// present in either map.
inline IouResult mean_iou(const SemanticMap& pred, const SemanticMap& gt, int num_classes) {
  if (!pred.same_shape(gt)) throw Error(ErrorCode::ShapeMismatch, "prediction and ground truth differ in shape");
  std::vector<std::size_t> inter(num_classes, 0), uni(num_classes, 0);
  for (std::size_t k = 0; k < pred.data().size(); ++k) {
    const int p = pred.data()[k];
    const int g = gt.data()[k];
    if (p == g) {
      if (p < num_classes) {
        ++inter[p];
        ++uni[p];
      }
    } else {
      if (p < num_classes) ++uni[p];
      if (g < num_classes) ++uni[g];
    }
  }
  IouResult res;
  res.per_class.resize(num_classes);
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_classes; ++c) {
    if (uni[c] == 0) continue;
    const double iou = static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
    res.per_class[c] = iou;
    sum += iou;
    ++present;
  }
  if (present == 0) throw Error(ErrorCode::EmptyEval, "no class present in either map");
  res.miou = sum / present;
  return res;
}

}  // namespace panoscene
