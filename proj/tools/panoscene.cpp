// panoscene: command-line front end of the panorama scene toolkit.

#include "panoscene/equiconv_check.hpp"
#include "panoscene/evaluation.hpp"
#include "panoscene/io/json.hpp"
#include "panoscene/io/manifest.hpp"
#include "panoscene/io/outputs.hpp"
#include "panoscene/io/png.hpp"
#include "panoscene/maskgen.hpp"
#include "panoscene/pipeline.hpp"
#include "panoscene/synthetic.hpp"

#include "CLI11.hpp"

#include <functional>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace panoscene;
using io::json;
using io::Node;

constexpr int kExitFailure = 1;
constexpr int kExitSchema = 2;
constexpr int kExitCheck = 3;

struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  const json j = io::read_json(path);
  return io::config_from_json(Node(j));
}

template <typename F>
auto parse_file(const std::string& path, F&& parse) {
  const json j = io::read_json(path);
  try {
    return parse(Node(j));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw Error(ErrorCode::SchemaError, path + ": " + e.detail());
    throw;
  }
}

std::string mask_name(std::size_t k) { return "masks/mask_" + std::to_string(k + 1) + ".png"; }

// ---------------------------------------------------------------- subcommands

void cmd_masks_from_points(const PipelineConfig& cfg, const std::string& annotations, const std::string& out_dir) {
  const auto ann = parse_file(annotations, [&](const Node& n) { return io::annotations_from_json(n, cfg.classes); });
  io::Manifest m(out_dir);
  std::filesystem::create_directories(m.dir() / "masks");
  json index = json::array();
  for (std::size_t k = 0; k < ann.objects.size(); ++k) {
    const ObjectAnnotation& o = ann.objects[k];
    const BinaryMask mask = rasterize_spherical_polygon(o, ann.width, ann.height);
    io::write_mask_png(m.path_of(mask_name(k)), mask);
    m.record(mask_name(k));
    index.push_back({{"file", mask_name(k)},
                     {"class", cfg.classes[o.class_id].name},
                     {"instance_id", o.instance_id},
                     {"area", count_nonzero(mask)}});
  }
  m.write_json_artifact("masks.json", index);
  m.finish();
}

void cmd_compose_semantic(const PipelineConfig& cfg, const std::string& masks_index, const std::string& out) {
  const std::filesystem::path base = std::filesystem::path(masks_index).parent_path();
  const auto entries = parse_file(masks_index, [&](const Node& root) {
    std::vector<MaskEntry> list;
    for (const Node& n : root.items()) {
      n.allow_only({"file", "class", "instance_id", "area"});
      MaskEntry e;
      e.mask = io::read_mask_png((base / n["file"].as_string()).string());
      e.class_id = io::parse_class(n["class"], cfg.classes);
      list.push_back(std::move(e));
    }
    return list;
  });
  if (entries.empty()) throw Error(ErrorCode::InvalidArgument, "mask index is empty; the raster size is unknown");
  io::write_png(out, compose_semantic(entries, cfg.occlusion_tau).labels);
}

void cmd_instances(const PipelineConfig& cfg, const std::string& semantic_path, const std::string& dets_path,
                   const std::string& out_ids, const std::string& out_table) {
  const SemanticMap sem = io::read_png_u8(semantic_path);
  const auto dets = parse_file(dets_path, [&](const Node& n) { return io::detections_from_json(n, cfg.classes); });
  const auto kept = filter_by_confidence(dets, cfg.min_score);
  InstanceMap im = assign_instances(sem, kept, cfg.chi2_gate);
  if (cfg.complete_instances) im = complete_instances(im, kept);
  io::write_png(out_ids, im.ids);
  io::write_json(out_table, io::instance_table_to_json(im, cfg.classes));
}

InstanceMap load_instances(const PipelineConfig& cfg, const std::string& ids_path, const std::string& table_path,
                           const SemanticMap& sem) {
  const auto ids = io::read_png_u16(ids_path);
  return parse_file(table_path, [&](const Node& n) { return io::instance_map_from(ids, sem, n, cfg.classes); });
}

LayoutModel load_layout(const std::string& path, int width, int height) {
  return parse_file(path, [&](const Node& n) { return io::layout_from_json(n, width, height); }).build();
}

void cmd_refine(const PipelineConfig& cfg, const std::string& ids_path, const std::string& table_path,
                const std::string& semantic_path, const std::string& layout_path, const std::string& out_ids,
                const std::string& out_table) {
  const SemanticMap sem = io::read_png_u8(semantic_path);
  const InstanceMap im = load_instances(cfg, ids_path, table_path, sem);
  const LayoutModel layout = load_layout(layout_path, sem.width(), sem.height());
  const InstanceMap refined = refine_masks(im, build_plane_map(layout), cfg.classes);
  io::write_png(out_ids, refined.ids);
  io::write_json(out_table, io::instance_table_to_json(refined, cfg.classes));
}

void cmd_to3d(const PipelineConfig& cfg, const std::string& ids_path, const std::string& table_path,
              const std::string& semantic_path, const std::string& layout_path, const std::string& out_dir) {
  const SemanticMap sem = io::read_png_u8(semantic_path);
  const InstanceMap im = load_instances(cfg, ids_path, table_path, sem);
  const LayoutModel layout = load_layout(layout_path, sem.width(), sem.height());
  const PlaneMap pm = build_plane_map(layout);
  PipelineResult res;
  for (const InstanceInfo& info : im.instances) {
    if (cfg.classes[info.class_id].placement == Placement::None) continue;
    try {
      if (info.pixel_count == 0) throw Error(ErrorCode::InsufficientBoundary, "instance has no pixels");
      res.objects.push_back(place_instance(im, info, pm, layout, cfg));
    } catch (const Error& e) {
      res.failures.push_back({info.id, info.class_id, e.code(), e.what()});
    }
  }
  io::Manifest m(out_dir);
  const auto objects = io::placed_objects(res);
  m.write_json_artifact("scene.json", io::scene_to_json(objects, layout.frame(), cfg.classes, cfg.metric_scale));
  m.write_json_artifact("lines.json", io::lines_to_json(res.objects, layout.frame()));
  io::write_text(m.path_of("scene.obj"), io::scene_to_obj(layout, objects, cfg.metric_scale));
  m.record("scene.obj");
  m.set("failures", io::failures_to_json(res.failures, cfg.classes));
  m.finish();
}

void cmd_eval(const PipelineConfig& cfg, const std::string& pred_dets, const std::string& gt_dets,
              const std::string& pred_sem, const std::string& gt_sem, int width, const std::string& out) {
  std::optional<std::vector<Detection>> pd, gd;
  std::optional<SemanticMap> ps, gs;
  auto read_dets = [&](const std::string& p) {
    return parse_file(p, [&](const Node& n) { return io::detections_from_json(n, cfg.classes); });
  };
  if (!pred_dets.empty()) pd = read_dets(pred_dets);
  if (!gt_dets.empty()) gd = read_dets(gt_dets);
  if (!pred_sem.empty()) ps = io::read_png_u8(pred_sem);
  if (!gt_sem.empty()) gs = io::read_png_u8(gt_sem);
  if (pd.has_value() != gd.has_value())
    throw Error(ErrorCode::InvalidArgument, "detection evaluation needs both --pred-detections and --gt-detections");
  if (ps.has_value() != gs.has_value())
    throw Error(ErrorCode::InvalidArgument, "segmentation evaluation needs both --pred-semantic and --gt-semantic");
  if (!pd && !ps) throw Error(ErrorCode::InvalidArgument, "nothing to evaluate");
  if (width <= 0 && gs) width = gs->width();
  if (pd && width <= 0) throw Error(ErrorCode::InvalidArgument, "--width is required without semantic maps");

  EvalInputs in;
  in.pred = pd ? &*pd : nullptr;
  in.gt = gd ? &*gd : nullptr;
  in.pred_map = ps ? &*ps : nullptr;
  in.gt_map = gs ? &*gs : nullptr;
  in.width = width;
  const json result = io::to_json(evaluate(in, cfg.classes, cfg.iou_threshold, cfg.map_weighting), cfg.classes);
  if (out.empty())
    std::cout << io::dump(result);
  else
    io::write_json(out, result);
}

void cmd_equiconv_check(int band_rows, std::uint64_t seed) {
  const EquatorCheck eq = equator_agreement(256, 128, band_rows, seed);
  const EquivarianceCheck ev = shift_equivariance(256, 128, {1, 37, 128}, seed);
  const GradientCheck gr = gradient_check(32, 16, 1e-5, seed);
  const bool ok = eq.relative_error <= 1e-3 && ev.mismatches == 0 && gr.input_error < 1e-4 && gr.weight_error < 1e-4;
  const json out = {
      {"equator", {{"band_rows", eq.band_rows}, {"relative_error", eq.relative_error}, {"max_abs_error", eq.max_abs_error}}},
      {"equivariance", {{"shifts", ev.shifts}, {"mismatches", ev.mismatches}}},
      {"gradient", {{"input_error", gr.input_error}, {"weight_error", gr.weight_error}, {"probes", gr.probes}}},
      {"pass", ok}};
  std::cout << io::dump(out);
  if (!ok) throw CheckFailed("EquiConv checks failed");
}

void cmd_gen_fixture(const PipelineConfig& cfg, const std::string& scene_path, std::optional<std::uint64_t> room_seed,
                     int width, double jitter, const std::string& out_dir) {
  SyntheticScene scene;
  if (!scene_path.empty()) {
    scene = parse_file(scene_path, [&](const Node& n) { return io::synthetic_scene_from_json(n, cfg.classes); });
  } else if (room_seed) {
    RandomSceneParams params;
    params.width = width;
    scene = random_scene(*room_seed, cfg.classes, params);
  } else {
    throw Error(ErrorCode::InvalidArgument, "give --scene or --room-seed");
  }
  const Fixture fx = generate_fixture(scene, cfg.seed, jitter);
  io::Manifest m(out_dir);
  std::filesystem::create_directories(m.dir() / "masks");
  json index = json::array();
  EquirectGrid<std::uint16_t> ids(fx.width, fx.height);
  for (std::size_t k = 0; k < fx.masks.size(); ++k) {
    io::write_mask_png(m.path_of(mask_name(k)), fx.masks[k]);
    m.record(mask_name(k));
    index.push_back({{"file", mask_name(k)},
                     {"class", cfg.classes[fx.ground_truth[k].class_id].name},
                     {"instance_id", k + 1},
                     {"area", count_nonzero(fx.masks[k])}});
    for (std::size_t p = 0; p < ids.data().size(); ++p)
      if (fx.masks[k].data()[p]) ids.data()[p] = static_cast<std::uint16_t>(k + 1);
  }
  m.write_json_artifact("masks.json", index);
  io::write_png(m.path_of("semantic.png"), fx.semantic);
  m.record("semantic.png");
  io::write_png(m.path_of("gt_instances.png"), ids);
  m.record("gt_instances.png");
  m.write_json_artifact("detections.json", io::detections_to_json(fx.detections, cfg.classes));
  m.write_json_artifact("layout.json", io::to_json(io::layout_spec_of(fx)));
  m.write_json_artifact("gt_scene.json", io::scene_to_json(fx.ground_truth, fx.frame, cfg.classes, cfg.metric_scale));
  m.write_json_artifact("scene_spec.json", io::to_json(scene, cfg.classes));
  m.set("seed", cfg.seed);
  m.set("jitter", jitter);
  m.finish();
}

void cmd_run(const PipelineConfig& cfg, const std::string& dets_path, const std::string& semantic_path,
             const std::string& layout_path, const std::string& out_dir) {
  const SemanticMap sem = io::read_png_u8(semantic_path);
  const auto dets = parse_file(dets_path, [&](const Node& n) { return io::detections_from_json(n, cfg.classes); });
  const LayoutModel layout = load_layout(layout_path, sem.width(), sem.height());
  const PipelineResult res = run_pipeline(dets, sem, layout, cfg);
  const io::Manifest m = io::write_pipeline_outputs(out_dir, res, layout, cfg);
  std::cout << "placed " << res.objects.size() << " objects, " << res.failures.size() << " failures; manifest at "
            << m.path_of("manifest.json") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panorama scene understanding toolkit"};
  app.require_subcommand(1);
  std::function<void()> action;
  std::string config;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Pipeline config JSON")->check(CLI::ExistingFile);
    return sub;
  };
  auto cfg = [&] { return load_config(config); };

  std::string annotations, out_dir, masks, out, semantic, dets, out_ids, out_table, ids, table, layout;
  std::string pred_dets, gt_dets, pred_sem, gt_sem, scene;
  int width = 1024;
  int band_rows = 2;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> room_seed;
  double jitter = 0.0;

  auto* s = add("masks-from-points", "Rasterise annotated polygons into per-object masks");
  s->add_option("--annotations", annotations, "Annotation JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--out-dir", out_dir, "Output directory")->required();
  s->callback([&] { action = [&] { cmd_masks_from_points(cfg(), annotations, out_dir); }; });

  s = add("compose-semantic", "Compose masks into a semantic map under the occlusion rule");
  s->add_option("--masks", masks, "Mask index JSON written by masks-from-points")->required()->check(CLI::ExistingFile);
  s->add_option("--out", out, "Output 8-bit PNG")->required();
  s->callback([&] { action = [&] { cmd_compose_semantic(cfg(), masks, out); }; });

  s = add("instances", "Split a semantic map into instances using detections");
  s->add_option("--semantic", semantic, "Semantic map PNG")->required()->check(CLI::ExistingFile);
  s->add_option("--detections", dets, "Detections JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--out-ids", out_ids, "Output 16-bit instance PNG")->required();
  s->add_option("--out-table", out_table, "Output instance table JSON")->required();
  s->callback([&] { action = [&] { cmd_instances(cfg(), semantic, dets, out_ids, out_table); }; });

  s = add("refine", "Refine instance masks against the room layout");
  s->add_option("--instances", ids, "16-bit instance PNG")->required()->check(CLI::ExistingFile);
  s->add_option("--table", table, "Instance table JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--semantic", semantic, "Semantic map PNG")->required()->check(CLI::ExistingFile);
  s->add_option("--layout", layout, "Layout JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--out-ids", out_ids, "Output 16-bit instance PNG")->required();
  s->add_option("--out-table", out_table, "Output instance table JSON")->required();
  s->callback([&] { action = [&] { cmd_refine(cfg(), ids, table, semantic, layout, out_ids, out_table); }; });

  s = add("to3d", "Place refined instances in the 3D room");
  s->add_option("--instances", ids, "16-bit instance PNG")->required()->check(CLI::ExistingFile);
  s->add_option("--table", table, "Instance table JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--semantic", semantic, "Semantic map PNG")->required()->check(CLI::ExistingFile);
  s->add_option("--layout", layout, "Layout JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--out-dir", out_dir, "Output directory")->required();
  s->callback([&] { action = [&] { cmd_to3d(cfg(), ids, table, semantic, layout, out_dir); }; });

  s = add("eval", "Detection AP / weighted mAP and segmentation mIoU");
  s->add_option("--pred-detections", pred_dets, "Predicted detections JSON")->check(CLI::ExistingFile);
  s->add_option("--gt-detections", gt_dets, "Ground-truth detections JSON")->check(CLI::ExistingFile);
  s->add_option("--pred-semantic", pred_sem, "Predicted semantic PNG")->check(CLI::ExistingFile);
  s->add_option("--gt-semantic", gt_sem, "Ground-truth semantic PNG")->check(CLI::ExistingFile);
  s->add_option("--width", width, "Panorama width for box IoU (defaults to the semantic map width)");
  s->add_option("--out", out, "Output JSON (stdout when omitted)");
  s->callback([&] {
    const bool width_given = app.get_subcommand("eval")->count("--width") > 0;
    action = [&, width_given] {
      cmd_eval(cfg(), pred_dets, gt_dets, pred_sem, gt_sem, width_given ? width : 0, out);
    };
  });

  s = add("equiconv-check", "Run the EquiConv equator, equivariance and gradient checks");
  s->add_option("--band-rows", band_rows, "Rows of the equator band holding nonzero input")->check(CLI::Range(1, 128));
  s->add_option("--seed", seed, "Random seed");
  s->callback([&] { action = [&] { cmd_equiconv_check(band_rows, seed); }; });

  s = add("gen-fixture", "Render a synthetic room into masks, detections and layout");
  auto* scene_opt = s->add_option("--scene", scene, "Scene JSON")->check(CLI::ExistingFile);
  s->add_option("--room-seed", room_seed, "Random room seed")->excludes(scene_opt);
  s->add_option("--width", width, "Render width for random rooms")->check(CLI::PositiveNumber);
  s->add_option("--jitter", jitter, "Box corner jitter in pixels")->check(CLI::NonNegativeNumber);
  s->add_option("--out-dir", out_dir, "Output directory")->required();
  s->callback([&] { action = [&] { cmd_gen_fixture(cfg(), scene, room_seed, width, jitter, out_dir); }; });

  s = add("run", "Full pipeline: instances, refinement and 3D placement");
  s->add_option("--detections", dets, "Detections JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--semantic", semantic, "Semantic map PNG")->required()->check(CLI::ExistingFile);
  s->add_option("--layout", layout, "Layout JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--out-dir", out_dir, "Output directory")->required();
  s->callback([&] { action = [&] { cmd_run(cfg(), dets, semantic, layout, out_dir); }; });

  CLI11_PARSE(app, argc, argv);
  try {
    action();
  } catch (const CheckFailed& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return kExitCheck;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::SchemaError ? kExitSchema : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
