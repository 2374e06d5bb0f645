#pragma once

// JSON records for every artifact the tools read or write. Readers are strict:
// wrong types, missing keys and unknown keys raise SchemaError carrying the
// JSON pointer of the offending value.

#include "panoscene/anchors.hpp"
#include "panoscene/classes.hpp"
#include "panoscene/config.hpp"
#include "panoscene/core.hpp"
#include "panoscene/evaluation.hpp"
#include "panoscene/layout.hpp"
#include "panoscene/maskgen.hpp"
#include "panoscene/object.hpp"
#include "panoscene/pipeline.hpp"
#include "panoscene/synthetic.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace panoscene::io {

using nlohmann::json;

/// A value inside a document together with its JSON pointer.
class Node {
 public:
  Node(const json& value, std::string pointer = "") : value_(&value), pointer_(std::move(pointer)) {}

  const json& value() const noexcept { return *value_; }
  const std::string& pointer() const noexcept { return pointer_; }
  std::string where() const { return pointer_.empty() ? "/" : pointer_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::SchemaError, where() + ": " + msg);
  }

  bool is_object() const { return value_->is_object(); }
  bool is_array() const { return value_->is_array(); }

  bool has(const std::string& key) const {
    expect_object();
    return value_->contains(key);
  }

  Node operator[](const std::string& key) const {
    expect_object();
    const auto it = value_->find(key);
    if (it == value_->end()) fail("missing key '" + key + "'");
    return {*it, pointer_ + "/" + escape(key)};
  }

  Node operator[](std::size_t index) const {
    expect_array();
    if (index >= value_->size()) fail("index " + std::to_string(index) + " out of range");
    return {(*value_)[index], pointer_ + "/" + std::to_string(index)};
  }

  std::size_t size() const {
    expect_array();
    return value_->size();
  }

  std::vector<Node> items() const {
    std::vector<Node> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i]);
    return out;
  }

  /// Rejects keys outside `allowed`.
  void allow_only(std::initializer_list<const char*> allowed) const {
    expect_object();
    for (const auto& [key, v] : value_->items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) Node(v, pointer_ + "/" + escape(key)).fail("unknown key '" + key + "'");
    }
  }

  double as_double() const {
    if (!value_->is_number()) fail("expected a number");
    const double d = value_->get<double>();
    if (!std::isfinite(d)) fail("expected a finite number");
    return d;
  }

  long long as_int() const {
    if (value_->is_number_integer()) return value_->get<long long>();
    if (value_->is_number_float()) {
      const double d = value_->get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    fail("expected an integer");
  }

  int as_int_in(long long lo, long long hi) const {
    const long long v = as_int();
    if (v < lo || v > hi) fail("expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }

  bool as_bool() const {
    if (!value_->is_boolean()) fail("expected a boolean");
    return value_->get<bool>();
  }

  std::string as_string() const {
    if (!value_->is_string()) fail("expected a string");
    return value_->get<std::string>();
  }

  Vec3 as_vec3() const {
    if (!value_->is_array() || value_->size() != 3) fail("expected an array of 3 numbers");
    return {(*this)[0].as_double(), (*this)[1].as_double(), (*this)[2].as_double()};
  }

  PixelCoord as_pixel() const {
    if (!value_->is_array() || value_->size() != 2) fail("expected a [u, v] pair");
    return {(*this)[0].as_double(), (*this)[1].as_double()};
  }

  double get_or(const std::string& key, double fallback) const { return has(key) ? (*this)[key].as_double() : fallback; }
  bool get_or(const std::string& key, bool fallback) const { return has(key) ? (*this)[key].as_bool() : fallback; }

 private:
  void expect_object() const {
    if (!value_->is_object()) fail("expected an object");
  }
  void expect_array() const {
    if (!value_->is_array()) fail("expected an array");
  }
  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

  const json* value_;
  std::string pointer_;
};

// ---------------------------------------------------------------- files

inline json parse_text(const std::string& text, const std::string& origin = "<text>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, origin + ": invalid JSON: " + e.what());
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::string& path) { return parse_text(read_text(path), path); }

/// Canonical text: sorted keys, two-space indent, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

inline void write_json(const std::string& path, const json& j) { write_text(path, dump(j)); }

// ---------------------------------------------------------------- small pieces

inline json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json pixel_to_json(const PixelCoord& p) { return json::array({p.u, p.v}); }

inline int parse_class(const Node& n, const ClassSet& classes) {
  if (n.value().is_string()) {
    const std::string name = n.as_string();
    for (const ClassInfo& c : classes.all())
      if (c.name == name) return c.id;
    n.fail("unknown class name '" + name + "'");
  }
  return n.as_int_in(0, classes.size() - 1);
}

// ---------------------------------------------------------------- detections

inline json to_json(const Detection& d, const ClassSet& classes) {
  return {{"class", classes[d.class_id].name}, {"score", d.score}, {"cx", d.cx},
          {"cy", d.cy}, {"w", d.w}, {"h", d.h}};
}

inline json detections_to_json(const std::vector<Detection>& dets, const ClassSet& classes) {
  json out = json::array();
  for (const Detection& d : dets) out.push_back(to_json(d, classes));
  return out;
}

inline std::vector<Detection> detections_from_json(const Node& root, const ClassSet& classes) {
  std::vector<Detection> out;
  for (const Node& n : root.items()) {
    n.allow_only({"class", "score", "cx", "cy", "w", "h"});
    Detection d;
    d.class_id = parse_class(n["class"], classes);
    d.score = n["score"].as_double();
    d.cx = n["cx"].as_double();
    d.cy = n["cy"].as_double();
    d.w = n["w"].as_double();
    d.h = n["h"].as_double();
    if (d.class_id == 0) n["class"].fail("detections cannot be background");
    if (!(d.score >= 0 && d.score <= 1)) n["score"].fail("score must lie in [0, 1]");
    if (!(d.w > 0)) n["w"].fail("width must be positive");
    if (!(d.h > 0)) n["h"].fail("height must be positive");
    out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------- layout

/// Corner pixels and Manhattan axes of a room; width and height are optional
/// in the document and then taken from the accompanying rasters.
struct LayoutSpec {
  int width = 0;
  int height = 0;
  std::vector<PixelCoord> ceiling_corners;
  std::vector<PixelCoord> floor_corners;
  ManhattanFrame frame;

  LayoutModel build() const {
    return LayoutModel::from_corners(ceiling_corners, floor_corners, frame, width, height);
  }
};

inline json to_json(const LayoutSpec& l) {
  json c = json::array(), f = json::array();
  for (const PixelCoord& p : l.ceiling_corners) c.push_back(pixel_to_json(p));
  for (const PixelCoord& p : l.floor_corners) f.push_back(pixel_to_json(p));
  return {{"width", l.width},
          {"height", l.height},
          {"ceiling_corners", c},
          {"floor_corners", f},
          {"axes", json::array({vec3_to_json(l.frame.vp_x), vec3_to_json(l.frame.vp_y),
                                vec3_to_json(l.frame.vp_z)})}};
}

/// `width`/`height` of 0 mean "take them from the document".
inline LayoutSpec layout_from_json(const Node& n, int width = 0, int height = 0) {
  n.allow_only({"width", "height", "ceiling_corners", "floor_corners", "axes"});
  LayoutSpec l;
  l.width = n.has("width") ? n["width"].as_int_in(2, 1 << 16) : width;
  l.height = n.has("height") ? n["height"].as_int_in(1, 1 << 15) : height;
  if (width > 0 && l.width != width) n["width"].fail("does not match the raster width " + std::to_string(width));
  if (height > 0 && l.height != height) n["height"].fail("does not match the raster height " + std::to_string(height));
  if (l.width <= 0 || l.height <= 0) n.fail("width and height are required when no raster is given");
  for (const Node& p : n["ceiling_corners"].items()) l.ceiling_corners.push_back(p.as_pixel());
  for (const Node& p : n["floor_corners"].items()) l.floor_corners.push_back(p.as_pixel());
  const Node axes = n["axes"];
  if (axes.size() != 3) axes.fail("expected three axes");
  l.frame = {axes[0].as_vec3(), axes[1].as_vec3(), axes[2].as_vec3()};
  try {
    l.frame.validate();
  } catch (const Error& e) {
    axes.fail(e.detail());
  }
  return l;
}

inline LayoutSpec layout_spec_of(const Fixture& fx) {
  return {fx.width, fx.height, fx.ceiling_corners, fx.floor_corners, fx.frame};
}

// ---------------------------------------------------------------- annotations

struct AnnotationSet {
  int width = 0;
  int height = 0;
  std::vector<ObjectAnnotation> objects;
};

inline json to_json(const AnnotationSet& a, const ClassSet& classes) {
  json objs = json::array();
  for (const ObjectAnnotation& o : a.objects) {
    json pts = json::array();
    for (const PixelCoord& p : o.points) pts.push_back(pixel_to_json(p));
    objs.push_back({{"class", classes[o.class_id].name}, {"instance_id", o.instance_id}, {"points", pts}});
  }
  return {{"width", a.width}, {"height", a.height}, {"objects", objs}};
}

inline AnnotationSet annotations_from_json(const Node& n, const ClassSet& classes) {
  n.allow_only({"width", "height", "objects"});
  AnnotationSet a;
  a.height = n["height"].as_int_in(1, 1 << 15);
  a.width = n["width"].as_int_in(2, 1 << 16);
  if (a.width != 2 * a.height) n["width"].fail("width must be twice the height");
  for (const Node& o : n["objects"].items()) {
    o.allow_only({"class", "instance_id", "points"});
    ObjectAnnotation ann;
    ann.class_id = parse_class(o["class"], classes);
    ann.instance_id = o.has("instance_id") ? o["instance_id"].as_int_in(0, 65535) : 0;
    const Node pts = o["points"];
    if (pts.size() < 3) pts.fail("a polygon needs at least 3 points");
    for (const Node& p : pts.items()) ann.points.push_back(p.as_pixel());
    a.objects.push_back(std::move(ann));
  }
  return a;
}

// ---------------------------------------------------------------- objects and scenes

inline ObjectKind kind_from_string(const Node& n) {
  const std::string s = n.as_string();
  if (s == "wall_rect") return ObjectKind::WallRect;
  if (s == "cuboid") return ObjectKind::Cuboid;
  if (s == "ceiling_rect") return ObjectKind::CeilingRect;
  n.fail("unknown object kind '" + s + "'");
}

/// Scene record: camera-frame pose and dims scaled to metres, Manhattan yaw,
/// plus the room-frame centre in camera-height units.
inline json to_json(const Object3D& o, const ManhattanFrame& frame, const ClassSet& classes, double metric_scale) {
  return {{"instance_id", o.instance_id},
          {"class", classes[o.class_id].name},
          {"kind", to_string(o.kind)},
          {"pose", vec3_to_json(frame.to_camera(o.center) * metric_scale)},
          {"dims", vec3_to_json(o.dims * metric_scale)},
          {"yaw", frame.yaw()},
          {"room_center", vec3_to_json(o.center)},
          {"plane", o.plane},
          {"approximate", o.approximate}};
}

inline json scene_to_json(const std::vector<Object3D>& objects, const ManhattanFrame& frame,
                          const ClassSet& classes, double metric_scale) {
  json out = json::array();
  for (const Object3D& o : objects) out.push_back(to_json(o, frame, classes, metric_scale));
  return out;
}

inline std::vector<Object3D> scene_from_json(const Node& root, const ClassSet& classes, double metric_scale) {
  std::vector<Object3D> out;
  for (const Node& n : root.items()) {
    n.allow_only({"instance_id", "class", "kind", "pose", "dims", "yaw", "room_center", "plane", "approximate"});
    Object3D o;
    o.instance_id = n["instance_id"].as_int_in(0, 65535);
    o.class_id = parse_class(n["class"], classes);
    o.kind = kind_from_string(n["kind"]);
    o.center = n["room_center"].as_vec3();
    o.dims = n["dims"].as_vec3() / metric_scale;
    o.plane = n.has("plane") ? n["plane"].as_int_in(0, 255) : kPlaneNone;
    o.approximate = n.get_or("approximate", false);
    n["pose"].as_vec3();
    n["yaw"].as_double();
    if ((o.dims.array() < 0).any()) n["dims"].fail("dims must be non-negative");
    out.push_back(o);
  }
  return out;
}

inline json to_json(const SyntheticScene& s, const ClassSet& classes) {
  json room = json::array();
  for (const Eigen::Vector2d& p : s.room) room.push_back(json::array({p.x(), p.y()}));
  json objs = json::array();
  for (const Object3D& o : s.objects)
    objs.push_back({{"class", classes[o.class_id].name},
                    {"kind", to_string(o.kind)},
                    {"center", vec3_to_json(o.center)},
                    {"dims", vec3_to_json(o.dims)},
                    {"plane", o.plane}});
  return {{"width", s.width}, {"height", s.height}, {"yaw", s.yaw},
          {"room", room},     {"ceiling_z", s.ceiling_z}, {"objects", objs}};
}

inline SyntheticScene synthetic_scene_from_json(const Node& n, const ClassSet& classes) {
  n.allow_only({"width", "height", "yaw", "room", "ceiling_z", "objects"});
  SyntheticScene s;
  s.height = n["height"].as_int_in(1, 1 << 15);
  s.width = n["width"].as_int_in(2, 1 << 16);
  if (s.width != 2 * s.height) n["width"].fail("width must be twice the height");
  s.yaw = n.get_or("yaw", 0.0);
  s.ceiling_z = n["ceiling_z"].as_double();
  if (!(s.ceiling_z > 0)) n["ceiling_z"].fail("ceiling must be above the camera");
  for (const Node& p : n["room"].items()) {
    if (!p.is_array() || p.size() != 2) p.fail("expected an [x, y] pair");
    s.room.emplace_back(p[0].as_double(), p[1].as_double());
  }
  if (s.room.size() < 4) n["room"].fail("a room needs at least 4 corners");
  int k = 0;
  for (const Node& o : n["objects"].items()) {
    o.allow_only({"class", "kind", "center", "dims", "plane"});
    Object3D obj;
    obj.class_id = parse_class(o["class"], classes);
    obj.kind = kind_from_string(o["kind"]);
    obj.center = o["center"].as_vec3();
    obj.dims = o["dims"].as_vec3();
    obj.plane = o.has("plane") ? o["plane"].as_int_in(0, 255) : kPlaneNone;
    obj.instance_id = ++k;
    if ((obj.dims.array() < 0).any()) o["dims"].fail("dims must be non-negative");
    s.objects.push_back(obj);
  }
  return s;
}

// ---------------------------------------------------------------- pipeline artifacts

inline json instance_table_to_json(const InstanceMap& im, const ClassSet& classes) {
  json out = json::array();
  for (const InstanceInfo& info : im.instances)
    out.push_back({{"id", info.id}, {"class", classes[info.class_id].name}, {"pixel_count", info.pixel_count}});
  return out;
}

/// Rebuilds an instance map from its id raster, the semantic map it came
/// from and its instance table.
inline InstanceMap instance_map_from(const EquirectGrid<std::uint16_t>& ids, const SemanticMap& semantic,
                                     const Node& table, const ClassSet& classes) {
  if (ids.width() != semantic.width() || ids.height() != semantic.height())
    throw Error(ErrorCode::ShapeMismatch, "instance ids and semantic map differ in size");
  InstanceMap im{ids, semantic, {}};
  for (const Node& n : table.items()) {
    n.allow_only({"id", "class", "pixel_count"});
    InstanceInfo info;
    info.id = n["id"].as_int_in(1, 65535);
    if (info.id != static_cast<int>(im.instances.size()) + 1) n["id"].fail("instance ids must be 1, 2, 3, ... in order");
    info.class_id = parse_class(n["class"], classes);
    im.instances.push_back(info);
  }
  for (std::size_t k = 0; k < ids.data().size(); ++k) {
    const int id = ids.data()[k];
    if (id == 0) continue;
    if (id > static_cast<int>(im.instances.size()))
      throw Error(ErrorCode::SchemaError, "instance raster holds id " + std::to_string(id) + " missing from the table");
    im.classes.data()[k] = static_cast<std::uint8_t>(im.instances[id - 1].class_id);
  }
  im.recount();
  return im;
}

inline json lines_to_json(const std::vector<PlacedObject>& objects, const ManhattanFrame& frame) {
  json out = json::array();
  for (const PlacedObject& po : objects) {
    json lines = json::array();
    for (const FittedLine& l : po.lines)
      lines.push_back({{"normal", vec3_to_json(l.normal)},
                       {"room_normal", vec3_to_json(frame.to_room(l.normal))},
                       {"label", to_string(l.label)},
                       {"deviation_deg", rad2deg(l.deviation)},
                       {"inliers", l.inliers.size()}});
    out.push_back({{"instance_id", po.object.instance_id}, {"lines", lines}});
  }
  return out;
}

inline json failures_to_json(const std::vector<PlacementFailure>& failures, const ClassSet& classes) {
  json out = json::array();
  for (const PlacementFailure& f : failures)
    out.push_back({{"instance_id", f.instance_id},
                   {"class", classes[f.class_id].name},
                   {"error", to_string(f.code)},
                   {"message", f.message}});
  return out;
}

inline json to_json(const EvalResult& r, const ClassSet& classes) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json rows = json::array();
  for (const ClassEval& c : r.classes)
    rows.push_back({{"class", classes[c.class_id].name},
                    {"ap", opt(c.ap)},
                    {"ap_w", opt(c.ap_w)},
                    {"d", c.count},
                    {"num_gt", c.num_gt},
                    {"num_det", c.num_det},
                    {"iou", opt(c.iou)}});
  return {{"classes", rows}, {"n", r.n}, {"mAP", opt(r.map)}, {"mAP_w", opt(r.map_w)}, {"mIoU", opt(r.miou)}};
}

// ---------------------------------------------------------------- config

inline const char* to_string(MapWeighting w) {
  return w == MapWeighting::GroundTruth ? "ground_truth" : "detections";
}

inline json to_json(const ClassSet& classes) {
  json out = json::array();
  for (const ClassInfo& c : classes.all())
    out.push_back({{"id", c.id},
                   {"name", c.name},
                   {"placement", to_string(c.placement)},
                   {"clip_to_wall", c.clip_to_wall},
                   {"reach_floor", c.reach_floor}});
  return out;
}

inline ClassSet classes_from_json(const Node& root) {
  std::vector<ClassInfo> out;
  for (const Node& n : root.items()) {
    n.allow_only({"id", "name", "placement", "clip_to_wall", "reach_floor"});
    ClassInfo c;
    c.id = n["id"].as_int_in(0, 255);
    if (c.id != static_cast<int>(out.size())) n["id"].fail("class ids must be 0, 1, 2, ... in order");
    c.name = n["name"].as_string();
    if (c.name.empty()) n["name"].fail("class name must not be empty");
    for (const ClassInfo& prev : out)
      if (prev.name == c.name) n["name"].fail("duplicate class name '" + c.name + "'");
    const std::string p = n.has("placement") ? n["placement"].as_string() : "none";
    if (p == "none") c.placement = Placement::None;
    else if (p == "wall") c.placement = Placement::Wall;
    else if (p == "cuboid") c.placement = Placement::Cuboid;
    else if (p == "ceiling") c.placement = Placement::Ceiling;
    else n["placement"].fail("placement must be none, wall, cuboid or ceiling");
    c.clip_to_wall = n.get_or("clip_to_wall", false);
    c.reach_floor = n.get_or("reach_floor", false);
    out.push_back(c);
  }
  if (out.empty()) root.fail("class table must not be empty");
  if (out.front().placement != Placement::None) root[0].fail("class 0 is background and has no placement");
  return ClassSet(std::move(out));
}

inline json to_json(const AnchorConfig& a) {
  json grids = json::array();
  for (const GridSize& g : a.grids) grids.push_back(json::array({g.rows, g.cols}));
  return {{"grids", grids}, {"ratios", a.ratios}, {"s_min", a.s_min}, {"s_max", a.s_max}};
}

inline AnchorConfig anchors_from_json(const Node& n) {
  n.allow_only({"grids", "ratios", "s_min", "s_max"});
  AnchorConfig a = AnchorConfig::panoramic_default();
  if (n.has("grids")) {
    a.grids.clear();
    for (const Node& g : n["grids"].items()) {
      if (!g.is_array() || g.size() != 2) g.fail("expected a [rows, cols] pair");
      a.grids.push_back({g[0].as_int_in(1, 1 << 15), g[1].as_int_in(2, 1 << 16)});
    }
  }
  if (n.has("ratios")) {
    a.ratios.clear();
    for (const Node& r : n["ratios"].items()) a.ratios.push_back(r.as_double());
  }
  a.s_min = n.get_or("s_min", a.s_min);
  a.s_max = n.get_or("s_max", a.s_max);
  return a;
}

inline json to_json(const PipelineConfig& c) {
  return {{"classes", to_json(c.classes)},
          {"anchors", to_json(c.anchors)},
          {"min_score", c.min_score},
          {"chi2_gate", c.chi2_gate},
          {"complete_instances", c.complete_instances},
          {"occlusion_tau", c.occlusion_tau},
          {"line_angle_deg", c.line_angle_deg},
          {"ransac",
           {{"inlier_tolerance_deg", rad2deg(c.ransac.inlier_tolerance)},
            {"iterations", c.ransac.iterations},
            {"min_inlier_fraction", c.ransac.min_inlier_fraction},
            {"min_inliers", c.ransac.min_inliers_abs},
            {"max_lines", c.ransac.max_lines},
            {"min_area", c.ransac.min_area}}},
          {"cuboid", {{"contact_fraction", c.cuboid.contact_fraction}, {"refine_steps", c.cuboid.refine_steps}}},
          {"footprint_fallback", c.footprint_fallback},
          {"metric_scale", c.metric_scale},
          {"iou_threshold", c.iou_threshold},
          {"map_weighting", to_string(c.map_weighting)},
          {"seed", c.seed}};
}

/// Every key is optional and falls back to the built-in default.
inline PipelineConfig config_from_json(const Node& n) {
  n.allow_only({"classes", "anchors", "min_score", "chi2_gate", "complete_instances", "occlusion_tau",
                "line_angle_deg", "ransac", "cuboid", "footprint_fallback", "metric_scale", "iou_threshold",
                "map_weighting", "seed"});
  PipelineConfig c;
  if (n.has("classes")) c.classes = classes_from_json(n["classes"]);
  if (n.has("anchors")) c.anchors = anchors_from_json(n["anchors"]);
  c.min_score = n.get_or("min_score", c.min_score);
  c.chi2_gate = n.get_or("chi2_gate", c.chi2_gate);
  c.complete_instances = n.get_or("complete_instances", c.complete_instances);
  c.occlusion_tau = n.get_or("occlusion_tau", c.occlusion_tau);
  c.line_angle_deg = n.get_or("line_angle_deg", c.line_angle_deg);
  if (n.has("ransac")) {
    const Node r = n["ransac"];
    r.allow_only({"inlier_tolerance_deg", "iterations", "min_inlier_fraction", "min_inliers", "max_lines", "min_area"});
    c.ransac.inlier_tolerance = deg2rad(r.get_or("inlier_tolerance_deg", rad2deg(c.ransac.inlier_tolerance)));
    if (r.has("iterations")) c.ransac.iterations = r["iterations"].as_int_in(1, 1 << 24);
    c.ransac.min_inlier_fraction = r.get_or("min_inlier_fraction", c.ransac.min_inlier_fraction);
    if (r.has("min_inliers")) c.ransac.min_inliers_abs = r["min_inliers"].as_int_in(2, 1 << 30);
    if (r.has("max_lines")) c.ransac.max_lines = r["max_lines"].as_int_in(1, 64);
    if (r.has("min_area")) c.ransac.min_area = r["min_area"].as_int_in(0, 1 << 30);
  }
  if (n.has("cuboid")) {
    const Node q = n["cuboid"];
    q.allow_only({"contact_fraction", "refine_steps"});
    c.cuboid.contact_fraction = q.get_or("contact_fraction", c.cuboid.contact_fraction);
    if (q.has("refine_steps")) c.cuboid.refine_steps = q["refine_steps"].as_int_in(0, 64);
  }
  c.footprint_fallback = n.get_or("footprint_fallback", c.footprint_fallback);
  c.metric_scale = n.get_or("metric_scale", c.metric_scale);
  c.iou_threshold = n.get_or("iou_threshold", c.iou_threshold);
  if (n.has("map_weighting")) {
    const std::string w = n["map_weighting"].as_string();
    if (w == "ground_truth") c.map_weighting = MapWeighting::GroundTruth;
    else if (w == "detections") c.map_weighting = MapWeighting::Detections;
    else n["map_weighting"].fail("expected 'ground_truth' or 'detections'");
  }
  if (n.has("seed")) {
    const long long s = n["seed"].as_int();
    if (s < 0) n["seed"].fail("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  try {
    c.validate();
  } catch (const Error& e) {
    n.fail(e.detail());
  }
  return c;
}

}  // namespace panoscene::io
