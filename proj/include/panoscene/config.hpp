#pragma once

// Pipeline parameters. Every tunable lives here so runs are reproducible from
// a single JSON file.

#include "panoscene/anchors.hpp"
#include "panoscene/classes.hpp"
#include "panoscene/core.hpp"
#include "panoscene/instances.hpp"
#include "panoscene/lines.hpp"
#include "panoscene/metrics.hpp"
#include "panoscene/placement.hpp"

#include <cstdint>

namespace panoscene {

enum class MapWeighting { GroundTruth, Detections };

struct PipelineConfig {
  ClassSet classes = ClassSet::indoor_default();
  AnchorConfig anchors = AnchorConfig::panoramic_default();

  double min_score = 0.5;           // detection confidence cut
  double chi2_gate = kChi2Gate99;   // Mahalanobis gate for instance pixels
  bool complete_instances = true;   // absorb gated-out pixels inside the box
  double occlusion_tau = 0.5;       // compose-semantic overlap threshold

  double line_angle_deg = 0.5;      // axis labelling threshold
  RansacParams ransac;
  CuboidParams cuboid;
  bool footprint_fallback = true;   // approximate cuboid when lines are missing

  double metric_scale = 1.0;        // metres per unit of camera height
  double iou_threshold = kDetectionIouThreshold;
  MapWeighting map_weighting = MapWeighting::GroundTruth;
  std::uint64_t seed = 0;

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
    if (!(min_score >= 0 && min_score <= 1)) bad("min_score must lie in [0, 1]");
    if (!(chi2_gate > 0)) bad("chi2_gate must be positive");
    if (!(occlusion_tau > 0 && occlusion_tau <= 1)) bad("occlusion_tau must lie in (0, 1]");
    if (!(line_angle_deg > 0 && line_angle_deg < 45)) bad("line_angle_deg must lie in (0, 45)");
    if (!(ransac.inlier_tolerance > 0) || ransac.iterations <= 0 || ransac.max_lines <= 0)
      bad("invalid RANSAC parameters");
    if (!(cuboid.contact_fraction > 0 && cuboid.contact_fraction <= 1))
      bad("contact_fraction must lie in (0, 1]");
    if (!(metric_scale > 0)) bad("metric_scale must be positive");
    if (!(iou_threshold > 0 && iou_threshold < 1)) bad("iou_threshold must lie in (0, 1)");
    panoscene::validate(anchors);
  }
};

}  // namespace panoscene
