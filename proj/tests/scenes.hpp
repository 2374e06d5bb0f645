#pragma once

// Hand-built rooms and objects shared by the layout, pipeline and acceptance tests.

#include "panoscene/instances.hpp"
#include "panoscene/synthetic.hpp"

#include <vector>

namespace scenes {

using namespace panoscene;

/// 4.6 x 3.8 room, floor one unit below the camera. Walls in order:
/// y = -1.7, x = 2.6, y = 2.1, x = -2.0.
inline SyntheticScene box_room(int width, double yaw = 0.3) {
  SyntheticScene s;
  s.width = width;
  s.height = width / 2;
  s.yaw = yaw;
  s.room = {{-2.0, -1.7}, {2.6, -1.7}, {2.6, 2.1}, {-2.0, 2.1}};
  s.ceiling_z = 1.4;
  return s;
}

/// L-shaped room with six corners around the camera.
inline SyntheticScene l_room(int width, double yaw = -0.7) {
  SyntheticScene s = box_room(width, yaw);
  s.room = {{-2.0, -1.7}, {2.6, -1.7}, {2.6, 0.8}, {0.9, 0.8}, {0.9, 2.1}, {-2.0, 2.1}};
  return s;
}

inline Object3D wall_rect(int cls, int wall_axis, double offset, double lateral, double z, double width,
                          double height, int plane) {
  Object3D o;
  o.kind = ObjectKind::WallRect;
  o.class_id = cls;
  o.center[wall_axis] = offset;
  o.center[1 - wall_axis] = lateral;
  o.center.z() = z;
  o.dims[1 - wall_axis] = width;
  o.dims.z() = height;
  o.plane = plane;
  return o;
}

inline Object3D cuboid(int cls, Vec3 center, Vec3 dims) {
  Object3D o;
  o.kind = ObjectKind::Cuboid;
  o.class_id = cls;
  o.center = center;
  o.dims = dims;
  return o;
}

/// Bed standing on the floor against the x = 2.6 wall of box_room.
inline Object3D bed() { return cuboid(1, {2.05, 0.5, -0.7}, {1.1, 1.5, 0.6}); }

/// Painting on the x = 2.6 wall of box_room.
inline Object3D painting() { return wall_rect(2, 0, 2.6, 0.2, 0.45, 1.2, 0.7, wall_plane(1)); }

/// Instance map whose instance k + 1 is masks[k] with class classes[k].
inline InstanceMap instance_map(const std::vector<BinaryMask>& masks, const std::vector<int>& classes) {
  InstanceMap im;
  im.ids = EquirectGrid<std::uint16_t>(masks.at(0).width(), masks.at(0).height());
  im.classes = SemanticMap(masks[0].width(), masks[0].height());
  for (std::size_t k = 0; k < masks.size(); ++k) {
    for (std::size_t p = 0; p < masks[k].data().size(); ++p)
      if (masks[k].data()[p]) {
        im.ids.data()[p] = static_cast<std::uint16_t>(k + 1);
        im.classes.data()[p] = static_cast<std::uint8_t>(classes[k]);
      }
    im.instances.push_back({static_cast<int>(k + 1), classes[k], 0});
  }
  im.recount();
  return im;
}

/// Pixel rectangle, columns wrapping.
inline BinaryMask pixel_rect(int width, int height, int c0, int ncols, int r0, int nrows) {
  BinaryMask m(width, height);
  for (int r = r0; r < r0 + nrows; ++r)
    for (int j = 0; j < ncols; ++j) m(r, wrap_index(c0 + j, width)) = 1;
  return m;
}

/// Everything the placement pipeline consumes.
struct Inputs {
  std::vector<Detection> detections;
  SemanticMap semantic;
  std::vector<PixelCoord> ceiling_corners;
  std::vector<PixelCoord> floor_corners;
  ManhattanFrame frame;

  static Inputs of(const Fixture& fx) {
    return {fx.detections, fx.semantic, fx.ceiling_corners, fx.floor_corners, fx.frame};
  }
  LayoutModel layout() const {
    return LayoutModel::from_corners(ceiling_corners, floor_corners, frame, semantic.width(), semantic.height());
  }
};

/// The inputs seen by a camera turned a quarter turn about the vertical:
/// every raster, box and corner moves by width / 4 columns.
inline Inputs rotate_quarter(const Inputs& in) {
  const int w = in.semantic.width();
  const int k = w / 4;
  Inputs out = in;
  out.semantic = shift_columns(in.semantic, k);
  for (Detection& d : out.detections) d = shift_box(d, k, w);
  for (auto* corners : {&out.ceiling_corners, &out.floor_corners})
    for (PixelCoord& p : *corners) p.u = wrap_coord(p.u + k, w);
  // Exact quarter turn: (x, y, z) -> (-y, x, z).
  for (Vec3* v : {&out.frame.vp_x, &out.frame.vp_y, &out.frame.vp_z}) *v = Vec3(-v->y(), v->x(), v->z());
  return out;
}

/// Column of a vertical room edge through (x, y).
inline double corner_column(double x, double y, const ManhattanFrame& frame, int width, int height) {
  return dir_to_pixel(frame.to_camera(Vec3(x, y, 0.0)).normalized(), width, height).u;
}

}  // namespace scenes
