#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace panoscene {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  AntipodalEndpoints,
  PoleSingularity,
  DegeneratePolygon,
  OpenLayout,
  InsufficientBoundary,
  NoWallIntersection,
  UnderconstrainedCuboid,
  NoGroundTruth,
  EmptyEval,
  ObjectOutsideRoom,
  SchemaError,
  IoError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::AntipodalEndpoints: return "AntipodalEndpoints";
    case ErrorCode::PoleSingularity: return "PoleSingularity";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::OpenLayout: return "OpenLayout";
    case ErrorCode::InsufficientBoundary: return "InsufficientBoundary";
    case ErrorCode::NoWallIntersection: return "NoWallIntersection";
    case ErrorCode::UnderconstrainedCuboid: return "UnderconstrainedCuboid";
    case ErrorCode::NoGroundTruth: return "NoGroundTruth";
    case ErrorCode::EmptyEval: return "EmptyEval";
    case ErrorCode::ObjectOutsideRoom: return "ObjectOutsideRoom";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Positive modulo for integers.
inline int wrap_index(long long i, int n) {
  long long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

/// Positive modulo for reals, result in [0, n).
inline double wrap_coord(double x, double n) {
  double r = std::fmod(x, n);
  if (r < 0) r += n;
  if (r >= n) r -= n;
  return r;
}

/// W x H raster over the equirectangular domain, W = 2H, columns periodic.
/// Storage is channel-major, then row-major.
template <typename T>
class EquirectGrid {
 public:
  EquirectGrid() = default;

  EquirectGrid(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (height < 1 || width != 2 * height || channels < 1)
      throw Error(ErrorCode::ShapeMismatch,
                  "equirect grid needs W = 2H >= 2 and channels >= 1, got " +
                      std::to_string(width) + "x" + std::to_string(height));
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int c, int row, int col) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + row) * width_ + wrap_index(col, width_);
  }

  T& operator()(int row, int col) noexcept { return data_[index(0, row, col)]; }
  const T& operator()(int row, int col) const noexcept { return data_[index(0, row, col)]; }
  T& at(int c, int row, int col) noexcept { return data_[index(c, row, col)]; }
  const T& at(int c, int row, int col) const noexcept { return data_[index(c, row, col)]; }

  std::span<T> channel(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * pixel_count(), pixel_count()};
  }
  std::span<const T> channel(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * pixel_count(), pixel_count()};
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(const EquirectGrid& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  friend bool operator==(const EquirectGrid&, const EquirectGrid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using BinaryMask = EquirectGrid<std::uint8_t>;
using SemanticMap = EquirectGrid<std::uint8_t>;

/// Circularly shift every row by k columns: out(r, c + k) = in(r, c).
template <typename T>
EquirectGrid<T> shift_columns(const EquirectGrid<T>& in, long long k) {
  EquirectGrid<T> out = in;
  const int w = in.width();
  for (int ch = 0; ch < in.channels(); ++ch)
    for (int r = 0; r < in.height(); ++r)
      for (int c = 0; c < w; ++c) out.at(ch, r, wrap_index(c + k, w)) = in.at(ch, r, c);
  return out;
}

template <typename T>
std::size_t count_nonzero(const EquirectGrid<T>& g) {
  return static_cast<std::size_t>(
      std::count_if(g.data().begin(), g.data().end(), [](const T& v) { return v != T{}; }));
}

}  // namespace panoscene
