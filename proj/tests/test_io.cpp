#include "panoscene/io/json.hpp"
#include "panoscene/io/manifest.hpp"
#include "panoscene/io/mesh.hpp"
#include "panoscene/io/png.hpp"

#include "scenes.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

using namespace panoscene;
using namespace panoscene::io;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("panoscene_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

// Message of the SchemaError thrown by f, or "" when nothing is thrown.
template <class F>
std::string schema_error(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaError) << e.what();
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Json, DetectionsRoundTrip) {
  const ClassSet classes = ClassSet::indoor_default();
  const std::vector<Detection> dets = {{1, 0.75, 10.5, 20.25, 30, 40}, {13, 0.5, 511.5, 3, 2, 1}};
  const json j = parse_text(dump(detections_to_json(dets, classes)));
  EXPECT_EQ(j[1]["class"], "tv");
  EXPECT_EQ(detections_from_json(Node(j), classes), dets);
}

TEST(Json, DetectionClassMayBeNumeric) {
  const json j = parse_text(R"([{"class": 3, "score": 0.5, "cx": 1, "cy": 2, "w": 3, "h": 4}])");
  EXPECT_EQ(detections_from_json(Node(j), ClassSet::indoor_default())[0].class_id, 3);
}

TEST(Json, DetectionErrorsCarryPointers) {
  const ClassSet classes = ClassSet::indoor_default();
  auto parse = [&](const std::string& text) {
    return schema_error([&] { detections_from_json(Node(parse_text(text)), classes); });
  };
  EXPECT_NE(parse(R"([{"class": "bed", "score": 0.5, "cx": 1, "cy": 2, "w": 3, "h": 4},
                      {"class": "bed", "score": 0.5, "cx": "x", "cy": 2, "w": 3, "h": 4}])")
                .find("/1/cx"),
            std::string::npos);
  EXPECT_NE(parse(R"([{"class": "bed", "score": 0.5, "cx": 1, "cy": 2, "w": 3}])").find("missing key 'h'"),
            std::string::npos);
  EXPECT_NE(parse(R"([{"class": "sofa", "score": 0.5, "cx": 1, "cy": 2, "w": 3, "h": 4, "z": 1}])").find("/0/z"),
            std::string::npos);
  EXPECT_NE(parse(R"([{"class": "unicorn", "score": 0.5, "cx": 1, "cy": 2, "w": 3, "h": 4}])").find("/0/class"),
            std::string::npos);
  EXPECT_NE(parse(R"([{"class": "bed", "score": 1.5, "cx": 1, "cy": 2, "w": 3, "h": 4}])").find("/0/score"),
            std::string::npos);
  EXPECT_NE(parse(R"([{"class": "bed", "score": 0.5, "cx": 1, "cy": 2, "w": -3, "h": 4}])").find("/0/w"),
            std::string::npos);
  EXPECT_NE(parse(R"({"class": "bed"})").find("expected an array"), std::string::npos);
}

TEST(Json, MalformedTextIsSchemaError) {
  EXPECT_FALSE(schema_error([] { parse_text("[1, 2", "broken.json"); }).empty());
}

TEST(Json, LayoutRoundTrip) {
  const Fixture fx = generate_fixture(scenes::l_room(512), 0);
  const LayoutSpec spec = layout_spec_of(fx);
  const LayoutSpec back = layout_from_json(Node(parse_text(dump(to_json(spec)))));
  EXPECT_EQ(back.width, 512);
  EXPECT_EQ(back.ceiling_corners.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(back.floor_corners[i].u, spec.floor_corners[i].u);
    EXPECT_EQ(back.ceiling_corners[i].v, spec.ceiling_corners[i].v);
  }
  EXPECT_EQ(build_plane_map(back.build()), build_plane_map(spec.build()));
}

TEST(Json, LayoutSizeComesFromRasterWhenOmitted) {
  const Fixture fx = generate_fixture(scenes::box_room(512), 0);
  json j = to_json(layout_spec_of(fx));
  j.erase("width");
  j.erase("height");
  EXPECT_EQ(layout_from_json(Node(j), 512, 256).height, 256);
  EXPECT_FALSE(schema_error([&] { layout_from_json(Node(j)); }).empty());
  j["width"] = 1024;
  EXPECT_NE(schema_error([&] { layout_from_json(Node(j), 512, 256); }).find("/width"), std::string::npos);
}

TEST(Json, LayoutRejectsBadAxes) {
  const Fixture fx = generate_fixture(scenes::box_room(512), 0);
  json j = to_json(layout_spec_of(fx));
  j["axes"][1] = json::array({1.0, 0.0, 0.0});
  const std::string msg = schema_error([&] { layout_from_json(Node(j)); });
  EXPECT_NE(msg.find("/axes"), std::string::npos);
  EXPECT_EQ(msg.find("SchemaError", 5), std::string::npos);  // no nested prefix
}

TEST(Json, AnnotationsRoundTrip) {
  const ClassSet classes = ClassSet::indoor_default();
  AnnotationSet a{512, 256, {{2, 7, {{1, 2}, {30.5, 2}, {30.5, 40}}}, {9, 0, {{500, 100}, {520, 100}, {510, 120}}}}};
  const AnnotationSet back = annotations_from_json(Node(parse_text(dump(to_json(a, classes)))), classes);
  ASSERT_EQ(back.objects.size(), 2u);
  EXPECT_EQ(back.objects[0].class_id, 2);
  EXPECT_EQ(back.objects[0].instance_id, 7);
  EXPECT_EQ(back.objects[1].points[1].u, 520);
  json bad = to_json(a, classes);
  bad["width"] = 500;
  EXPECT_NE(schema_error([&] { annotations_from_json(Node(bad), classes); }).find("twice the height"),
            std::string::npos);
  bad = to_json(a, classes);
  bad["objects"][1]["points"].erase(0);
  bad["objects"][1]["points"].erase(0);
  EXPECT_NE(schema_error([&] { annotations_from_json(Node(bad), classes); }).find("/objects/1/points"),
            std::string::npos);
}

TEST(Json, SceneRoundTrip) {
  const ClassSet classes = ClassSet::indoor_default();
  const ManhattanFrame frame = ManhattanFrame::from_yaw(0.7);
  std::vector<Object3D> objs = {scenes::bed(), scenes::painting()};
  objs[0].instance_id = 1;
  objs[1].instance_id = 2;
  objs[1].approximate = true;
  const json j = parse_text(dump(scene_to_json(objs, frame, classes, 1.6)));
  EXPECT_EQ(j[0]["kind"], "cuboid");
  EXPECT_NEAR(j[0]["dims"][0].get<double>(), 1.1 * 1.6, 1e-12);
  const Vec3 pose(j[1]["pose"][0].get<double>(), j[1]["pose"][1].get<double>(), j[1]["pose"][2].get<double>());
  EXPECT_LT((pose - frame.to_camera(objs[1].center) * 1.6).norm(), 1e-12);
  const auto back = scene_from_json(Node(j), classes, 1.6);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(back[k].kind, objs[k].kind);
    EXPECT_EQ(back[k].class_id, objs[k].class_id);
    EXPECT_EQ(back[k].plane, objs[k].plane);
    EXPECT_EQ(back[k].approximate, objs[k].approximate);
    EXPECT_LT((back[k].center - objs[k].center).norm(), 1e-12);
    EXPECT_LT((back[k].dims - objs[k].dims).norm(), 1e-12);
  }
}

TEST(Json, SyntheticSceneRoundTrip) {
  const ClassSet classes = ClassSet::indoor_default();
  SyntheticScene s = scenes::box_room(512);
  s.objects = {scenes::bed(), scenes::painting()};
  const SyntheticScene back = synthetic_scene_from_json(Node(parse_text(dump(to_json(s, classes)))), classes);
  EXPECT_EQ(back.width, 512);
  EXPECT_EQ(back.room.size(), 4u);
  EXPECT_EQ(back.objects[1].instance_id, 2);
  EXPECT_EQ(generate_fixture(back, 3).semantic, generate_fixture(s, 3).semantic);
}

TEST(Json, InstanceTableRoundTrip) {
  const ClassSet classes = ClassSet::indoor_default();
  const InstanceMap im = scenes::instance_map(
      {scenes::pixel_rect(64, 32, 1, 4, 1, 4), scenes::pixel_rect(64, 32, 60, 8, 10, 3)}, {2, 9});
  const json table = instance_table_to_json(im, classes);
  const InstanceMap back = instance_map_from(im.ids, im.classes, Node(table), classes);
  EXPECT_EQ(back, im);
  json bad = table;
  bad.erase(0);
  EXPECT_THROW(instance_map_from(im.ids, im.classes, Node(bad), classes), Error);
}

TEST(Json, ConfigRoundTripAndValidation) {
  PipelineConfig c;
  c.min_score = 0.3;
  c.ransac.iterations = 123;
  c.cuboid.refine_steps = 2;
  c.map_weighting = MapWeighting::Detections;
  c.seed = 42;
  const json j = parse_text(dump(to_json(c)));
  const PipelineConfig back = config_from_json(Node(j));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(to_json(config_from_json(Node(json::object()))), to_json(PipelineConfig{}));

  json bad = j;
  bad["min_score"] = 2.0;
  EXPECT_NE(schema_error([&] { config_from_json(Node(bad)); }).find("min_score"), std::string::npos);
  bad = j;
  bad["ransac"]["iters"] = 5;
  EXPECT_NE(schema_error([&] { config_from_json(Node(bad)); }).find("/ransac/iters"), std::string::npos);
  bad = j;
  bad["classes"][0]["placement"] = "wall";
  EXPECT_NE(schema_error([&] { config_from_json(Node(bad)); }).find("/classes/0"), std::string::npos);
  bad = j;
  bad["anchors"]["grids"] = json::array({json::array({2, 3})});
  EXPECT_FALSE(schema_error([&] { config_from_json(Node(bad)); }).empty());
}

TEST_F(IoTest, PngRoundTrips) {
  std::mt19937_64 rng(71);
  SemanticMap labels(64, 32);
  for (auto& v : labels.data()) v = static_cast<std::uint8_t>(rng() % 15);
  write_png(path("labels.png"), labels);
  EXPECT_EQ(read_png_u8(path("labels.png")), labels);

  EquirectGrid<std::uint16_t> ids(64, 32);
  for (auto& v : ids.data()) v = static_cast<std::uint16_t>(rng() % 70000);
  write_png(path("ids.png"), ids);
  EXPECT_EQ(read_png_u16(path("ids.png")), ids);
  EXPECT_THROW(read_png_u8(path("ids.png")), Error);

  BinaryMask mask(64, 32);
  for (auto& v : mask.data()) v = static_cast<std::uint8_t>(rng() % 2);
  write_mask_png(path("mask.png"), mask);
  EXPECT_EQ(read_mask_png(path("mask.png")), mask);
  EXPECT_EQ(read_mask_png(path("labels.png")).data().size(), labels.data().size());
}

TEST_F(IoTest, UnreadableFilesAreIoErrors) {
  try {
    read_png_u8(path("missing.png"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  write_text(path("fake.png"), "not a png");
  EXPECT_THROW(read_png_u8(path("fake.png")), Error);
  EXPECT_THROW(read_json(path("missing.json")), Error);
}

TEST_F(IoTest, ManifestDigests) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  Manifest m(dir_ / "out");
  write_text(m.path_of("b.txt"), "abc");
  m.record("b.txt");
  m.write_json_artifact("a.json", json::array({1, 2}));
  m.set("seed", 7);
  m.finish();
  const json j = read_json(m.path_of("manifest.json"));
  ASSERT_EQ(j["artifacts"].size(), 2u);
  EXPECT_EQ(j["artifacts"][0]["path"], "a.json");  // sorted by path
  EXPECT_EQ(j["artifacts"][1]["sha256"], sha256_hex("abc"));
  EXPECT_EQ(j["artifacts"][1]["bytes"], 3);
  EXPECT_EQ(j["seed"], 7);
}

TEST(Mesh, ObjHasRoomAndObjectGroups) {
  const Fixture fx = generate_fixture(scenes::l_room(512), 0);
  std::vector<Object3D> objs = {scenes::bed()};
  objs[0].instance_id = 1;
  const std::string obj = scene_to_obj(fx.layout(), objs, 1.0);
  std::istringstream in(obj);
  std::string line;
  std::size_t verts = 0, faces = 0;
  int max_index = 0;
  std::vector<std::string> groups;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++verts;
    if (line.rfind("f ", 0) == 0) {
      ++faces;
      std::istringstream f(line.substr(2));
      int idx = 0;
      while (f >> idx) {
        EXPECT_GE(idx, 1);
        max_index = std::max(max_index, idx);
      }
    }
    if (line.rfind("g ", 0) == 0) groups.push_back(line.substr(2));
  }
  // 6 wall quads, 4 triangles each for floor and ceiling, a box of 6 quads.
  EXPECT_EQ(faces, 6u * 2 + 4 + 4 + 6 * 2);
  EXPECT_EQ(verts, 6u * 4 + 4 * 3 + 4 * 3 + 6 * 4);
  EXPECT_EQ(static_cast<std::size_t>(max_index), verts);
  EXPECT_EQ(groups, (std::vector<std::string>{"walls", "floor", "ceiling", "object_1_cuboid"}));
}

TEST(Mesh, TriangulationCoversPolygonArea) {
  const std::vector<Eigen::Vector2d> l = {{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 2}, {0, 2}};
  const auto tris = triangulate(l);
  ASSERT_EQ(tris.size(), 4u);
  double area = 0.0;
  for (const auto& t : tris) {
    const Eigen::Vector2d a = l[t[1]] - l[t[0]], b = l[t[2]] - l[t[0]];
    const double cross = a.x() * b.y() - a.y() * b.x();
    EXPECT_GT(cross, 0.0);
    area += cross / 2;
  }
  EXPECT_DOUBLE_EQ(area, 4.0);
}
