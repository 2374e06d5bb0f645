#pragma once

// Objects placed in the room.

#include "panoscene/core.hpp"
#include "panoscene/layout.hpp"

namespace panoscene {

enum class ObjectKind { WallRect, Cuboid, CeilingRect };

inline const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::WallRect: return "wall_rect";
    case ObjectKind::Cuboid: return "cuboid";
    case ObjectKind::CeilingRect: return "ceiling_rect";
  }
  return "cuboid";
}

/// A placed object. Centre and dims are in room coordinates (Manhattan frame
/// axes, camera at the origin); dims are extents along the x, y, z axes, zero
/// across a planar object's support.
struct Object3D {
  ObjectKind kind = ObjectKind::Cuboid;
  int class_id = 0;
  int instance_id = 0;
  Vec3 center = Vec3::Zero();
  Vec3 dims = Vec3::Zero();
  int plane = kPlaneNone;
  bool approximate = false;

  Vec3 min_corner() const { return center - dims / 2; }
  Vec3 max_corner() const { return center + dims / 2; }
};

}  // namespace panoscene
