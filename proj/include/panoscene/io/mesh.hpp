#pragma once

// Wavefront OBJ export of the room shell and the placed objects, in camera
// coordinates scaled to metres.

#include "panoscene/layout.hpp"
#include "panoscene/object.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <string>
#include <vector>

namespace panoscene::io {

class ObjWriter {
 public:
  ObjWriter(const ManhattanFrame& frame, double scale) : frame_(frame), scale_(scale) {}

  void group(const std::string& name) { body_ << "g " << name << "\n"; }

  /// Quad from room-frame corners in order; written as two triangles.
  void quad(const std::array<Vec3, 4>& q) {
    const int base = vertex_count_ + 1;
    for (const Vec3& p : q) vertex(p);
    body_ << "f " << base << ' ' << base + 1 << ' ' << base + 2 << "\n";
    body_ << "f " << base << ' ' << base + 2 << ' ' << base + 3 << "\n";
  }

  void triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
    const int base = vertex_count_ + 1;
    vertex(a);
    vertex(b);
    vertex(c);
    body_ << "f " << base << ' ' << base + 1 << ' ' << base + 2 << "\n";
  }

  void box(const Vec3& lo, const Vec3& hi) {
    auto p = [&](int x, int y, int z) { return Vec3(x ? hi.x() : lo.x(), y ? hi.y() : lo.y(), z ? hi.z() : lo.z()); };
    quad({p(0, 0, 0), p(1, 0, 0), p(1, 1, 0), p(0, 1, 0)});
    quad({p(0, 0, 1), p(0, 1, 1), p(1, 1, 1), p(1, 0, 1)});
    quad({p(0, 0, 0), p(0, 0, 1), p(1, 0, 1), p(1, 0, 0)});
    quad({p(0, 1, 0), p(1, 1, 0), p(1, 1, 1), p(0, 1, 1)});
    quad({p(0, 0, 0), p(0, 1, 0), p(0, 1, 1), p(0, 0, 1)});
    quad({p(1, 0, 0), p(1, 0, 1), p(1, 1, 1), p(1, 1, 0)});
  }

  std::string str() const { return verts_.str() + body_.str(); }

 private:
  void vertex(const Vec3& room) {
    const Vec3 c = frame_.to_camera(room) * scale_;
    verts_ << "v " << c.x() << ' ' << c.y() << ' ' << c.z() << "\n";
    ++vertex_count_;
  }

  ManhattanFrame frame_;
  double scale_;
  int vertex_count_ = 0;
  std::ostringstream verts_;
  std::ostringstream body_;
};

/// Ear-clipping triangulation of a simple polygon; triangles are
/// counter-clockwise.
inline std::vector<std::array<std::size_t, 3>> triangulate(const std::vector<Eigen::Vector2d>& poly) {
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<std::size_t> idx(poly.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) area += cross(Eigen::Vector2d::Zero(), poly[i], poly[(i + 1) % poly.size()]);
  if (area < 0) std::reverse(idx.begin(), idx.end());

  std::vector<std::array<std::size_t, 3>> out;
  while (idx.size() > 3) {
    bool clipped = false;
    for (std::size_t k = 0; k < idx.size() && !clipped; ++k) {
      const std::size_t a = idx[(k + idx.size() - 1) % idx.size()], b = idx[k], c = idx[(k + 1) % idx.size()];
      if (cross(poly[a], poly[b], poly[c]) <= 0) continue;
      bool empty = true;
      for (std::size_t q : idx) {
        if (q == a || q == b || q == c) continue;
        if (cross(poly[a], poly[b], poly[q]) >= 0 && cross(poly[b], poly[c], poly[q]) >= 0 &&
            cross(poly[c], poly[a], poly[q]) >= 0)
          empty = false;
      }
      if (!empty) continue;
      out.push_back({a, b, c});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
      clipped = true;
    }
    if (!clipped) break;
  }
  if (idx.size() == 3) out.push_back({idx[0], idx[1], idx[2]});
  return out;
}

/// Room walls as quads, floor and ceiling as triangles, objects as boxes
/// (planar objects are flat boxes).
inline std::string scene_to_obj(const LayoutModel& layout, const std::vector<Object3D>& objects, double scale) {
  ObjWriter w(layout.frame(), scale);
  const auto& corners = layout.corners();
  const double fz = layout.floor_z(), cz = layout.ceiling_z();
  w.group("walls");
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const auto& a = corners[i];
    const auto& b = corners[(i + 1) % corners.size()];
    w.quad({Vec3(a.x(), a.y(), fz), Vec3(b.x(), b.y(), fz), Vec3(b.x(), b.y(), cz), Vec3(a.x(), a.y(), cz)});
  }
  const auto tris = triangulate(corners);
  w.group("floor");
  for (const auto& t : tris)
    w.triangle(Vec3(corners[t[0]].x(), corners[t[0]].y(), fz), Vec3(corners[t[1]].x(), corners[t[1]].y(), fz),
               Vec3(corners[t[2]].x(), corners[t[2]].y(), fz));
  w.group("ceiling");
  for (const auto& t : tris)
    w.triangle(Vec3(corners[t[0]].x(), corners[t[0]].y(), cz), Vec3(corners[t[2]].x(), corners[t[2]].y(), cz),
               Vec3(corners[t[1]].x(), corners[t[1]].y(), cz));
  for (const Object3D& o : objects) {
    w.group("object_" + std::to_string(o.instance_id) + "_" + to_string(o.kind));
    w.box(o.min_corner(), o.max_corner());
  }
  return w.str();
}

}  // namespace panoscene::io
