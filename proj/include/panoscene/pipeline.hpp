#pragma once

// End-to-end 2D -> 3D: detections and a semantic map become instance masks,
// the masks are refined against the room layout, and every instance is placed
// in the room from its boundary lines.

#include "panoscene/config.hpp"
#include "panoscene/instances.hpp"
#include "panoscene/layout.hpp"
#include "panoscene/lines.hpp"
#include "panoscene/placement.hpp"
#include "panoscene/refine.hpp"

#include <string>
#include <vector>

namespace panoscene {

struct PlacedObject {
  Object3D object;
  std::vector<FittedLine> lines;
};

struct PlacementFailure {
  int instance_id = 0;
  int class_id = 0;
  ErrorCode code = ErrorCode::InvalidArgument;
  std::string message;
};

struct PipelineResult {
  std::vector<Detection> detections;  // after the confidence cut; index k is instance k + 1
  InstanceMap instances;              // gated assignment
  InstanceMap refined;                // completed and refined against the layout
  PlaneMap planes;
  std::vector<PlacedObject> objects;
  std::vector<PlacementFailure> failures;
};

/// Lines and placement of one refined instance. Throws the placement error.
inline PlacedObject place_instance(const InstanceMap& im, const InstanceInfo& info, const PlaneMap& pm,
                                   const LayoutModel& layout, const PipelineConfig& cfg) {
  const ClassInfo& ci = cfg.classes[info.class_id];
  const BinaryMask mask = im.mask_of(info.id);
  ObjectEvidence ev;
  ev.samples = extract_boundary(mask);
  RansacParams rp = cfg.ransac;
  rp.seed = cfg.seed + static_cast<std::uint64_t>(info.id);
  const double th = deg2rad(cfg.line_angle_deg);

  PlacedObject out;
  switch (ci.placement) {
    case Placement::Wall:
    case Placement::Ceiling:
      try {
        ev.lines = fit_boundary_lines(mask, layout.frame(), th, rp);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientBoundary) throw;
      }
      out.object = ci.placement == Placement::Wall ? place_wall_object(mask, ev, pm, layout, info.class_id)
                                                   : place_ceiling_object(mask, ev, layout, info.class_id);
      break;
    case Placement::Cuboid:
      ev.lines = fit_boundary_lines(mask, layout.frame(), th, rp);
      try {
        out.object = place_cuboid(mask, ev, pm, layout, info.class_id, cfg.cuboid);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::UnderconstrainedCuboid || !cfg.footprint_fallback) throw;
        out.object = place_cuboid_footprint(mask, ev, pm, layout, info.class_id, cfg.cuboid);
      }
      break;
    case Placement::None:
      throw Error(ErrorCode::InvalidArgument, "class '" + ci.name + "' has no placement rule");
  }
  out.object.instance_id = info.id;
  out.lines = std::move(ev.lines);
  return out;
}

inline PipelineResult run_pipeline(const std::vector<Detection>& detections, const SemanticMap& semantic,
                                   const LayoutModel& layout, const PipelineConfig& cfg) {
  cfg.validate();
  if (semantic.width() != layout.width() || semantic.height() != layout.height())
    throw Error(ErrorCode::ShapeMismatch, "semantic map and layout differ in size");
  for (const Detection& d : detections)
    if (!cfg.classes.contains(d.class_id))
      throw Error(ErrorCode::InvalidArgument, "detection with unknown class " + std::to_string(d.class_id));

  PipelineResult res;
  res.detections = filter_by_confidence(detections, cfg.min_score);
  res.instances = assign_instances(semantic, res.detections, cfg.chi2_gate);
  res.planes = build_plane_map(layout);
  const InstanceMap completed =
      cfg.complete_instances ? complete_instances(res.instances, res.detections) : res.instances;
  res.refined = refine_masks(completed, res.planes, cfg.classes);

  for (const InstanceInfo& info : res.refined.instances) {
    if (cfg.classes[info.class_id].placement == Placement::None) continue;
    try {
      if (info.pixel_count == 0) throw Error(ErrorCode::InsufficientBoundary, "instance has no pixels");
      res.objects.push_back(place_instance(res.refined, info, res.planes, layout, cfg));
    } catch (const Error& e) {
      res.failures.push_back({info.id, info.class_id, e.code(), e.what()});
    }
  }
  return res;
}

}  // namespace panoscene
