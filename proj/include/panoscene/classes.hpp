#pragma once

#include "panoscene/core.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace panoscene {

/// How an object class is placed in the room and refined against the layout.
enum class Placement {
  None,     // background
  Wall,     // planar, attached to a wall
  Cuboid,   // box standing on the floor
  Ceiling,  // planar, attached to the ceiling
};

struct ClassInfo {
  int id = 0;
  std::string name;
  Placement placement = Placement::None;
  bool clip_to_wall = false;   // must not straddle two walls
  bool reach_floor = false;    // extends down to the floor line
};

/// Class table: names, placement routing and refinement rules.
class ClassSet {
 public:
  ClassSet() = default;
  explicit ClassSet(std::vector<ClassInfo> classes) : classes_(std::move(classes)) {
    for (std::size_t i = 0; i < classes_.size(); ++i)
      if (classes_[i].id != static_cast<int>(i))
        throw Error(ErrorCode::InvalidArgument, "class ids must be 0..M-1 in order");
  }

  /// Background plus the 14 indoor object classes.
  static ClassSet indoor_default() {
    using P = Placement;
    return ClassSet({
        {0, "background", P::None, false, false},
        {1, "bed", P::Cuboid, false, false},
        {2, "painting", P::Wall, true, false},
        {3, "table", P::Cuboid, false, false},
        {4, "mirror", P::Wall, true, false},
        {5, "window", P::Wall, true, false},
        {6, "curtain", P::Wall, false, false},
        {7, "chair", P::Cuboid, false, false},
        {8, "light", P::Ceiling, false, false},
        {9, "sofa", P::Cuboid, false, false},
        {10, "door", P::Wall, false, true},
        {11, "cabinet", P::Cuboid, false, false},
        {12, "bedside", P::Cuboid, false, false},
        {13, "tv", P::Wall, true, false},
        {14, "shelf", P::Wall, false, false},
    });
  }

  int size() const noexcept { return static_cast<int>(classes_.size()); }
  const std::vector<ClassInfo>& all() const noexcept { return classes_; }

  const ClassInfo& operator[](int id) const {
    if (id < 0 || id >= size()) throw Error(ErrorCode::InvalidArgument, "unknown class id " + std::to_string(id));
    return classes_[id];
  }

  int id_of(const std::string& name) const {
    auto it = std::find_if(classes_.begin(), classes_.end(),
                           [&](const ClassInfo& c) { return c.name == name; });
    if (it == classes_.end()) throw Error(ErrorCode::InvalidArgument, "unknown class name '" + name + "'");
    return it->id;
  }

  bool contains(int id) const noexcept { return id >= 0 && id < size(); }

 private:
  std::vector<ClassInfo> classes_;
};

inline const char* to_string(Placement p) {
  switch (p) {
    case Placement::None: return "none";
    case Placement::Wall: return "wall";
    case Placement::Cuboid: return "cuboid";
    case Placement::Ceiling: return "ceiling";
  }
  return "none";
}

}  // namespace panoscene
