#pragma once

// Semantic map + detections -> instance map.
//
// Every detection box is read as an axis-aligned Gaussian holding 99% of the
// object: mean at the box centre, sigma = extent / 6 per axis. A labelled pixel
// joins the same-class instance with the smallest squared Mahalanobis
// distance, provided that distance passes the chi-squared gate; otherwise it
// keeps its semantic class without an instance.

#include "panoscene/anchors.hpp"
#include "panoscene/core.hpp"
#include "panoscene/sphere.hpp"

#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

namespace panoscene {

/// 99% quantile of the chi-squared distribution with 2 degrees of freedom,
/// -2 ln(0.01).
inline constexpr double kChi2Gate99 = 9.21;

struct GaussianInstance {
  int instance_id = 0;
  int class_id = 0;
  double mu_u = 0.0;
  double mu_v = 0.0;
  double sigma_w = 1.0;
  double sigma_h = 1.0;
};

inline GaussianInstance gaussian_from_detection(const Detection& d, int instance_id) {
  if (!(d.w > 0 && d.h > 0))
    throw Error(ErrorCode::InvalidArgument, "detection box must have positive extent");
  return {instance_id, d.class_id, d.cx, d.cy, d.w / 6.0, d.h / 6.0};
}

/// Squared Mahalanobis distance with the wrap-minimal column difference.
inline double mahalanobis2(PixelCoord p, const GaussianInstance& g, int width) {
  const double du = wrapped_column_delta(p.u, g.mu_u, width) / g.sigma_w;
  const double dv = (p.v - g.mu_v) / g.sigma_h;
  return du * du + dv * dv;
}

struct InstanceInfo {
  int id = 0;
  int class_id = 0;
  std::size_t pixel_count = 0;

  friend bool operator==(const InstanceInfo&, const InstanceInfo&) = default;
};

/// Instance ids (0 = none) with a parallel class map. Pixels with an id carry
/// that instance's class; the rest keep their semantic class.
struct InstanceMap {
  EquirectGrid<std::uint16_t> ids;
  SemanticMap classes;
  std::vector<InstanceInfo> instances;  // instances[k].id == k + 1

  const InstanceInfo* find(int id) const {
    if (id < 1 || id > static_cast<int>(instances.size())) return nullptr;
    return &instances[id - 1];
  }

  BinaryMask mask_of(int id) const {
    BinaryMask m(ids.width(), ids.height());
    for (std::size_t k = 0; k < m.data().size(); ++k) m.data()[k] = ids.data()[k] == id ? 1 : 0;
    return m;
  }

  void recount() {
    for (InstanceInfo& info : instances) info.pixel_count = 0;
    for (std::uint16_t id : ids.data())
      if (id > 0 && id <= instances.size()) ++instances[id - 1].pixel_count;
  }

  friend bool operator==(const InstanceMap&, const InstanceMap&) = default;
};

/// Keeps detections scoring at least `min_score`, preserving order.
inline std::vector<Detection> filter_by_confidence(const std::vector<Detection>& dets,
                                                   double min_score) {
  std::vector<Detection> out;
  for (const Detection& d : dets)
    if (d.score >= min_score) out.push_back(d);
  return out;
}

/// Instance k + 1 corresponds to dets[k]. Ties in distance go to the lower id.
inline InstanceMap assign_instances(const SemanticMap& sem, const std::vector<Detection>& dets,
                                    double chi2_threshold = kChi2Gate99) {
  if (dets.size() > std::numeric_limits<std::uint16_t>::max())
    throw Error(ErrorCode::InvalidArgument, "too many detections for 16-bit instance ids");
  const int w = sem.width();
  const int h = sem.height();
  InstanceMap im{EquirectGrid<std::uint16_t>(w, h), sem, {}};

  std::vector<GaussianInstance> gauss;
  gauss.reserve(dets.size());
  for (std::size_t k = 0; k < dets.size(); ++k) {
    gauss.push_back(gaussian_from_detection(dets[k], static_cast<int>(k + 1)));
    im.instances.push_back({static_cast<int>(k + 1), dets[k].class_id, 0});
  }

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int cls = sem(r, c);
      if (cls == 0) continue;
      double best = std::numeric_limits<double>::infinity();
      int arg = -1;
      for (std::size_t k = 0; k < gauss.size(); ++k) {
        if (gauss[k].class_id != cls) continue;
        const double d2 = mahalanobis2({double(c), double(r)}, gauss[k], w);
        if (d2 < best) {
          best = d2;
          arg = static_cast<int>(k);
        }
      }
      if (arg >= 0 && best <= chi2_threshold) {
        im.ids(r, c) = static_cast<std::uint16_t>(arg + 1);
        ++im.instances[arg].pixel_count;
      }
    }
  }
  return im;
}

/// Collapses instances back to a semantic map.
inline SemanticMap instance_to_semantic(const InstanceMap& im) {
  SemanticMap out = im.classes;
  for (std::size_t k = 0; k < out.data().size(); ++k) {
    const InstanceInfo* info = im.find(im.ids.data()[k]);
    if (info) out.data()[k] = static_cast<std::uint8_t>(info->class_id);
  }
  return out;
}

namespace detail {

/// Pixel centre inside a box, wrap-aware.
inline bool box_contains(const PanoBox& b, int row, int col, int width) {
  const double du = wrapped_column_delta(col, b.cx, width);
  return std::abs(du) <= b.w / 2 && std::abs(row - b.cy) <= b.h / 2;
}

}  // namespace detail

/// Extends each instance over the pixels the chi-squared gate left without an
/// instance: same-class pixels inside the instance's detection box that are
/// 4-connected to it through such pixels. A pixel reachable from several
/// instances goes to the smallest Mahalanobis distance. Existing assignments
/// are never changed.
inline InstanceMap complete_instances(const InstanceMap& im, const std::vector<Detection>& dets) {
  InstanceMap out = im;
  const int w = im.ids.width();
  const int h = im.ids.height();
  const std::size_t npix = im.ids.pixel_count();
  std::vector<double> best(npix, std::numeric_limits<double>::infinity());
  std::vector<std::uint16_t> claim(npix, 0);
  std::vector<std::uint8_t> seen(npix);

  for (std::size_t k = 0; k < dets.size() && k < im.instances.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    const int cls = im.instances[k].class_id;
    const GaussianInstance g = gaussian_from_detection(dets[k], id);
    std::fill(seen.begin(), seen.end(), 0);
    std::deque<std::size_t> queue;
    for (std::size_t p = 0; p < npix; ++p)
      if (im.ids.data()[p] == id) {
        queue.push_back(p);
        seen[p] = 1;
      }
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      const int r = static_cast<int>(p / w);
      const int c = static_cast<int>(p % w);
      const int nr[4] = {r - 1, r + 1, r, r};
      const int nc[4] = {c, c, c - 1, c + 1};
      for (int n = 0; n < 4; ++n) {
        if (nr[n] < 0 || nr[n] >= h) continue;
        const std::size_t q = im.ids.index(0, nr[n], nc[n]);
        if (seen[q]) continue;
        seen[q] = 1;
        if (im.ids.data()[q] != 0 || im.classes.data()[q] != cls) continue;
        const int qc = wrap_index(nc[n], w);
        if (!detail::box_contains(dets[k], nr[n], qc, w)) continue;
        const double d2 = mahalanobis2({double(qc), double(nr[n])}, g, w);
        if (d2 < best[q]) {
          best[q] = d2;
          claim[q] = static_cast<std::uint16_t>(id);
        }
        queue.push_back(q);
      }
    }
  }
  for (std::size_t p = 0; p < npix; ++p)
    if (claim[p] != 0) out.ids.data()[p] = claim[p];
  out.recount();
  return out;
}

}  // namespace panoscene
