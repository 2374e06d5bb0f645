#pragma once

// Per-class detection and segmentation scores gathered into one table.

#include "panoscene/classes.hpp"
#include "panoscene/config.hpp"
#include "panoscene/metrics.hpp"

#include <optional>
#include <vector>

namespace panoscene {

struct ClassEval {
  int class_id = 0;
  std::optional<double> ap;    // absent without ground truth
  std::optional<double> ap_w;
  std::size_t count = 0;       // d_i
  std::size_t num_gt = 0;
  std::size_t num_det = 0;
  std::optional<double> iou;   // absent when the class is in neither map
};

struct EvalResult {
  std::vector<ClassEval> classes;  // object classes 1..M-1, then background if segmented
  std::size_t n = 0;
  std::optional<double> map;       // weighted mean of AP
  std::optional<double> map_w;     // weighted mean of AP_w
  std::optional<double> miou;
};

struct EvalInputs {
  const std::vector<Detection>* pred = nullptr;
  const std::vector<Detection>* gt = nullptr;
  const SemanticMap* pred_map = nullptr;
  const SemanticMap* gt_map = nullptr;
  int width = 0;  // for wrap-aware box IoU
};

/// Background is excluded from detection scores and included in mIoU.
/// Classes without ground truth drop out of both detection means.
inline EvalResult evaluate(const EvalInputs& in, const ClassSet& classes, double iou_threshold,
                           MapWeighting weighting) {
  EvalResult res;
  const bool detect = in.pred && in.gt;
  const bool segment = in.pred_map && in.gt_map;
  if (detect && in.width <= 0) throw Error(ErrorCode::InvalidArgument, "detection evaluation needs the image width");

  std::optional<IouResult> seg;
  if (segment) seg = mean_iou(*in.pred_map, *in.gt_map, classes.size());

  std::vector<ClassAp> weighted, weighted_w;
  for (int c = 0; c < classes.size(); ++c) {
    ClassEval ce;
    ce.class_id = c;
    if (seg) ce.iou = seg->per_class[c];
    if (detect && c != 0) {
      std::vector<PanoBox> p, g;
      for (const Detection& d : *in.pred)
        if (d.class_id == c) p.push_back(d);
      for (const Detection& d : *in.gt)
        if (d.class_id == c) g.push_back(d);
      ce.num_det = p.size();
      ce.num_gt = g.size();
      ce.count = weighting == MapWeighting::GroundTruth ? g.size() : p.size();
      if (!g.empty()) {
        const ApResult ap = average_precision(p, g, in.width, iou_threshold);
        ce.ap = ap.ap;
        ce.ap_w = ap.ap_w;
        weighted.push_back({ap.ap, ce.count});
        weighted_w.push_back({ap.ap_w, ce.count});
        res.n += ce.count;
      }
    }
    if (c != 0 || segment) res.classes.push_back(ce);
  }
  if (res.n > 0) {
    res.map = weighted_map(weighted);
    res.map_w = weighted_map(weighted_w);
  }
  if (seg) res.miou = seg->miou;
  // Background last, matching the column order of the usual result tables.
  if (segment) std::rotate(res.classes.begin(), res.classes.begin() + 1, res.classes.end());
  return res;
}

}  // namespace panoscene
