#pragma once

// Boundary lines of object masks. A 3D straight edge seen from the panorama
// centre projects to a great circle, i.e. a plane through the origin, so each
// line is stored as that plane's unit normal. Lines are fitted greedily by
// RANSAC on mask boundary samples and labelled with the Manhattan axis they
// run along: a line runs along vp_k when its normal is perpendicular to vp_k.

#include "panoscene/core.hpp"
#include "panoscene/layout.hpp"
#include "panoscene/sphere.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <algorithm>
#include <limits>
#include <tuple>
#include <vector>

namespace panoscene {

enum class LineAxis { X = 0, Y = 1, Z = 2, None = 3 };

inline const char* to_string(LineAxis a) {
  switch (a) {
    case LineAxis::X: return "x";
    case LineAxis::Y: return "y";
    case LineAxis::Z: return "z";
    case LineAxis::None: return "none";
  }
  return "none";
}

/// A point on the crack between a mask pixel and a non-mask 4-neighbour.
struct BoundarySample {
  PixelCoord pos;      // index coordinates of the crack midpoint
  Vec3 dir;            // camera-frame unit direction of pos
  int outside_row = 0; // the non-mask neighbour
  int outside_col = 0;
  bool across_rows = false;  // crack between vertically adjacent pixels
  Vec3 inside_dir = Vec3::Zero();   // centre of the mask pixel
  Vec3 outside_dir = Vec3::Zero();  // centre of the non-mask pixel
};

/// First column of the mask's circular column span (the column after its
/// widest run of empty columns). 0 for masks that touch every column.
inline int mask_span_start(const BinaryMask& mask) {
  const int w = mask.width();
  std::vector<bool> used(w, false);
  bool any = false;
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < w; ++c)
      if (mask(r, c)) used[c] = any = true;
  if (!any) return 0;
  int best_len = 0, best_end = -1;
  int first_used = -1;
  for (int c = 0; c < w; ++c)
    if (used[c]) {
      first_used = c;
      break;
    }
  int run = 0;
  for (int k = 1; k <= w; ++k) {
    const int c = wrap_index(first_used + k, w);
    if (!used[c]) {
      ++run;
    } else {
      if (run > best_len) {
        best_len = run;
        best_end = c;
      }
      run = 0;
    }
  }
  return best_len == 0 ? 0 : best_end;
}

/// Crack samples of a mask, ordered by row and then by column starting at the
/// mask's span start, so the order moves with the mask under column shifts.
inline std::vector<BoundarySample> extract_boundary(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  const int start = mask_span_start(mask);
  std::vector<BoundarySample> out;
  auto push = [&](double u, double v, int orow, int ocol, bool across_rows) {
    const PixelCoord p{wrap_coord(u, w), v};
    const int irow = static_cast<int>(std::lround(2 * v)) - orow;
    const int icol = static_cast<int>(std::lround(2 * u)) - ocol;
    out.push_back({p, pixel_to_dir(p, w, h), orow, wrap_index(ocol, w), across_rows,
                   pixel_center_dir(irow, icol, w, h), pixel_center_dir(orow, ocol, w, h)});
  };
  for (int r = 0; r < h; ++r) {
    for (int k = 0; k < w; ++k) {
      const int c = wrap_index(start + k, w);
      if (!mask(r, c)) continue;
      if (r > 0 && !mask(r - 1, c)) push(c, r - 0.5, r - 1, c, true);
      if (r + 1 < h && !mask(r + 1, c)) push(c, r + 0.5, r + 1, c, true);
      if (!mask(r, c - 1)) push(c - 0.5, r, r, c - 1, false);
      if (!mask(r, c + 1)) push(c + 0.5, r, r, c + 1, false);
    }
  }
  return out;
}

struct RansacParams {
  double inlier_tolerance = deg2rad(0.3);  // angular distance to the great circle
  int iterations = 500;
  double min_inlier_fraction = 0.05;
  std::size_t min_inliers_abs = 8;
  int max_lines = 4;
  std::size_t min_area = 20;  // pixels
  std::uint64_t seed = 0;
};

struct FittedLine {
  Vec3 normal = Vec3::UnitZ();
  std::vector<std::size_t> inliers;  // indices into the boundary samples
  LineAxis label = LineAxis::None;
  double deviation = 0.0;  // |acos(n . vp_k) - pi/2| of the best axis, radians
};

/// Axis whose vanishing direction is perpendicular to the normal within
/// `threshold`; the closest such axis wins.
inline std::pair<LineAxis, double> classify_line(const Vec3& normal, const ManhattanFrame& frame,
                                                 double threshold) {
  LineAxis best = LineAxis::None;
  double best_dev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const double dev = std::abs(std::acos(std::clamp(normal.dot(frame.axis(k)), -1.0, 1.0)) - kPi / 2);
    if (dev < best_dev) {
      best_dev = dev;
      best = static_cast<LineAxis>(k);
    }
  }
  return {best_dev <= threshold ? best : LineAxis::None, best_dev};
}

namespace detail {

inline Vec3 canonical_normal(Vec3 n) {
  if (n.z() < 0 || (n.z() == 0 && (n.x() < 0 || (n.x() == 0 && n.y() < 0)))) n = -n;
  return n;
}

/// Inliers whose mask and non-mask pixel centres lie on opposite sides of the
/// great circle, with the mask on the majority side.
inline std::vector<std::size_t> straddling(const std::vector<BoundarySample>& s,
                                           const std::vector<std::size_t>& idx, const Vec3& normal) {
  double balance = 0.0;
  for (std::size_t i : idx) balance += normal.dot(s[i].inside_dir) - normal.dot(s[i].outside_dir);
  const double sign = balance >= 0 ? 1.0 : -1.0;
  std::vector<std::size_t> out;
  for (std::size_t i : idx)
    if (sign * normal.dot(s[i].inside_dir) > 0 && sign * normal.dot(s[i].outside_dir) < 0) out.push_back(i);
  return out;
}

/// Angular standard deviation of a crack sample across the line with the
/// given normal. A crack pins the boundary along one image axis only and is
/// uniform within half a pixel along the other.
inline double crack_sigma(const BoundarySample& s, const Vec3& normal, int width) {
  const double step = kTwoPi / width;
  const double lon = longitude_of(s.dir);
  const Vec3 east(-std::sin(lon), std::cos(lon), 0.0);
  const Vec3 north = s.dir.cross(east);
  const double spread = step / std::sqrt(12.0);
  const double across = s.across_rows ? std::abs(normal.dot(north))
                                      : std::abs(normal.dot(east)) * std::cos(latitude_of(s.dir));
  return std::hypot(spread * across, 0.25 * spread);
}

/// Unit normal of the plane through the origin closest (weighted least
/// squares) to the given directions. Weights come from crack_sigma around
/// `prior`; a zero prior gives equal weights.
inline Vec3 fit_plane_normal(const std::vector<BoundarySample>& s, const std::vector<std::size_t>& idx,
                             const Vec3& prior = Vec3::Zero(), int width = 0) {
  Mat3 scatter = Mat3::Zero();
  for (std::size_t i : idx) {
    double wgt = 1.0;
    if (width > 0 && prior.squaredNorm() > 0) {
      const double sigma = crack_sigma(s[i], prior, width);
      wgt = 1.0 / (sigma * sigma);
    }
    scatter += wgt * s[i].dir * s[i].dir.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
  return canonical_normal(eig.eigenvectors().col(0).normalized());
}

}  // namespace detail

/// Greedy RANSAC: up to max_lines great circles, each from 2-point minimal
/// samples, refined by least squares on its inliers, whose inliers are then
/// removed. Throws InsufficientBoundary for masks too small to support a line.
inline std::vector<FittedLine> fit_boundary_lines(const std::vector<BoundarySample>& samples, int width,
                                                  const ManhattanFrame& frame, double angle_threshold,
                                                  const RansacParams& params) {
  const std::size_t n = samples.size();
  const std::size_t min_inliers = std::max<std::size_t>(
      params.min_inliers_abs,
      static_cast<std::size_t>(std::ceil(params.min_inlier_fraction * static_cast<double>(n))));
  if (n < 2 * min_inliers)
    throw Error(ErrorCode::InsufficientBoundary,
                std::to_string(n) + " boundary samples, need " + std::to_string(2 * min_inliers));

  const double tol = std::sin(params.inlier_tolerance);
  std::mt19937_64 rng(params.seed);
  std::vector<std::size_t> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = i;

  auto collect = [&](const Vec3& normal) {
    std::vector<std::size_t> in;
    for (std::size_t i : remaining)
      if (std::abs(normal.dot(samples[i].dir)) <= tol) in.push_back(i);
    return in;
  };

  std::vector<FittedLine> lines;
  while (static_cast<int>(lines.size()) < params.max_lines && remaining.size() >= min_inliers) {
    std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
    Vec3 best_normal = Vec3::Zero();
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_count = 0;
    for (int it = 0; it < params.iterations; ++it) {
      const std::size_t a = remaining[pick(rng)];
      const std::size_t b = remaining[pick(rng)];
      if (a == b) continue;
      Vec3 normal = samples[a].dir.cross(samples[b].dir);
      const double len = normal.norm();
      if (len < 1e-9) continue;
      normal /= len;
      // Truncated quadratic cost: inliers pay their squared residual.
      std::size_t count = 0;
      double cost = 0.0;
      for (std::size_t i : remaining) {
        const double r = normal.dot(samples[i].dir);
        if (std::abs(r) <= tol) {
          ++count;
          cost += r * r;
        } else {
          cost += tol * tol;
        }
      }
      if (cost < best_cost) {
        best_cost = cost;
        best_count = count;
        best_normal = normal;
      }
    }
    if (best_count < min_inliers) break;

    std::vector<std::size_t> inliers = collect(best_normal);
    Vec3 normal = best_normal;
    for (int refine = 0; refine < 3; ++refine) {
      auto support = detail::straddling(samples, inliers, normal);
      if (support.size() < 2) support = inliers;
      normal = detail::fit_plane_normal(samples, support, normal, width);
      auto next = collect(normal);
      if (next.size() < min_inliers) break;
      inliers = std::move(next);
    }
    if (inliers.size() < min_inliers) break;

    FittedLine line;
    line.normal = detail::canonical_normal(normal);
    line.inliers = inliers;
    std::tie(line.label, line.deviation) = classify_line(line.normal, frame, angle_threshold);
    lines.push_back(std::move(line));

    std::vector<bool> taken(n, false);
    for (std::size_t i : inliers) taken[i] = true;
    std::erase_if(remaining, [&](std::size_t i) { return taken[i]; });
  }
  return lines;
}

inline std::vector<FittedLine> fit_boundary_lines(const BinaryMask& mask, const ManhattanFrame& frame,
                                                  double angle_threshold, const RansacParams& params) {
  if (count_nonzero(mask) < params.min_area)
    throw Error(ErrorCode::InsufficientBoundary, "mask area below the minimum");
  return fit_boundary_lines(extract_boundary(mask), mask.width(), frame, angle_threshold, params);
}

}  // namespace panoscene
