#pragma once

// Writes a pipeline run to an output directory.

#include "panoscene/io/json.hpp"
#include "panoscene/io/manifest.hpp"
#include "panoscene/io/mesh.hpp"
#include "panoscene/io/png.hpp"
#include "panoscene/pipeline.hpp"

#include <string>
#include <vector>

namespace panoscene::io {

inline std::vector<Object3D> placed_objects(const PipelineResult& res) {
  std::vector<Object3D> out;
  for (const PlacedObject& po : res.objects) out.push_back(po.object);
  return out;
}

/// Artifacts: instance and refined id maps (16-bit PNG), the refined
/// semantic map and plane map (8-bit PNG), instance table, fitted lines, scene
/// JSON, OBJ mesh and the resolved config; the manifest lists their digests
/// and the placement failures.
inline Manifest write_pipeline_outputs(const std::string& dir, const PipelineResult& res, const LayoutModel& layout,
                                       const PipelineConfig& cfg) {
  Manifest m(dir);
  write_png(m.path_of("instances.png"), res.instances.ids);
  m.record("instances.png");
  write_png(m.path_of("refined_instances.png"), res.refined.ids);
  m.record("refined_instances.png");
  write_png(m.path_of("refined_semantic.png"), instance_to_semantic(res.refined));
  m.record("refined_semantic.png");
  write_png(m.path_of("planes.png"), res.planes);
  m.record("planes.png");
  m.write_json_artifact("instances.json", instance_table_to_json(res.refined, cfg.classes));
  m.write_json_artifact("lines.json", lines_to_json(res.objects, layout.frame()));
  const std::vector<Object3D> objects = placed_objects(res);
  m.write_json_artifact("scene.json", scene_to_json(objects, layout.frame(), cfg.classes, cfg.metric_scale));
  write_text(m.path_of("scene.obj"), scene_to_obj(layout, objects, cfg.metric_scale));
  m.record("scene.obj");
  m.write_json_artifact("config.json", to_json(cfg));
  m.set("failures", failures_to_json(res.failures, cfg.classes));
  m.set("seed", cfg.seed);
  m.finish();
  return m;
}

}  // namespace panoscene::io
