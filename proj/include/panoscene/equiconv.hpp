#pragma once

// Distortion-aware convolution on equirectangular grids.
//
// Each output pixel owns a kh x kw grid of taps laid out on the tangent plane
// at its sphere point (gnomonic coordinates tan(i * step), tan(j * step)) and
// projected back into the input grid. Fractional positions are read with
// bilinear interpolation that wraps horizontally. Because the geometry is
// symmetric about the vertical axis, tap offsets depend only on the output
// row; they are stored once per row as an integer column offset plus a
// fraction, which keeps the operator exactly equivariant to column shifts.

#include "panoscene/core.hpp"
#include "panoscene/sphere.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace panoscene {

enum class PoleMode {
  Clamp,  // rows outside [0, H) are clamped
  Wrap,   // rows reflect over the pole and move half a turn in longitude
};

struct EquiKernelSpec {
  int kh = 3;
  int kw = 3;
  double angular_step = 0.0;  // radians per tap; <= 0 selects 2*pi/W
  int stride = 1;
  bool strict = false;
  PoleMode pole_mode = PoleMode::Wrap;

  int taps() const noexcept { return kh * kw; }
};

inline double resolve_step(const EquiKernelSpec& spec, int width) {
  return spec.angular_step > 0 ? spec.angular_step : kTwoPi / width;
}

inline void validate(const EquiKernelSpec& spec, int width) {
  if (spec.kh < 1 || spec.kw < 1 || spec.kh % 2 == 0 || spec.kw % 2 == 0)
    throw Error(ErrorCode::InvalidArgument, "kernel tap counts must be odd and >= 1");
  const double step = resolve_step(spec, width);
  if (!(step > 0.0 && step < kPi / 4))
    throw Error(ErrorCode::InvalidArgument, "angular step must lie in (0, pi/4)");
  if (spec.stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
}

/// One bilinear corner: input row, column offset relative to c * stride, weight.
struct SampleCorner {
  int row = 0;
  int col_offset = 0;
  double weight = 0.0;
};

/// Per-row tap offset. Input column of the sample for output column c is
/// c * stride + du_int + du_frac.
struct TapOffset {
  int du_int = 0;
  double du_frac = 0.0;
  double v = 0.0;
  std::array<SampleCorner, 4> corners{};
};

class SampleField {
 public:
  SampleField() = default;

  int in_width() const noexcept { return in_w_; }
  int in_height() const noexcept { return in_h_; }
  int out_width() const noexcept { return out_w_; }
  int out_height() const noexcept { return out_h_; }
  int stride() const noexcept { return stride_; }
  int kh() const noexcept { return kh_; }
  int kw() const noexcept { return kw_; }
  int taps() const noexcept { return kh_ * kw_; }
  PoleMode pole_mode() const noexcept { return pole_mode_; }

  const TapOffset& offset(int out_row, int tap) const {
    return offsets_[static_cast<std::size_t>(out_row) * taps() + tap];
  }

  /// Continuous input position of a tap for output pixel (row, col).
  PixelCoord coord(int out_row, int out_col, int tap) const {
    const TapOffset& o = offset(out_row, tap);
    return {static_cast<double>(out_col) * stride_ + o.du_int + o.du_frac, o.v};
  }

  friend SampleField build_sample_field(int width, int height, const EquiKernelSpec& spec);

 private:
  int in_w_ = 0, in_h_ = 0, out_w_ = 0, out_h_ = 0;
  int stride_ = 1, kh_ = 1, kw_ = 1;
  PoleMode pole_mode_ = PoleMode::Wrap;
  std::vector<TapOffset> offsets_;
};

namespace detail {

inline double snap_fraction(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < 1e-9 ? r : x;
}

inline std::array<SampleCorner, 4> bilinear_corners(double du, double v, int width, int height,
                                                    PoleMode mode) {
  const double fu = std::floor(du);
  const double fv = std::floor(v);
  const double ax = du - fu;
  const double ay = v - fv;
  const int c0 = static_cast<int>(fu);
  const int r0 = static_cast<int>(fv);
  std::array<SampleCorner, 4> out{};
  const int rows[2] = {r0, r0 + 1};
  const double wy[2] = {1.0 - ay, ay};
  const double wx[2] = {1.0 - ax, ax};
  for (int a = 0; a < 2; ++a) {
    int r = rows[a];
    int shift = 0;
    if (r < 0 || r >= height) {
      if (mode == PoleMode::Clamp) {
        r = std::clamp(r, 0, height - 1);
      } else {
        r = r < 0 ? -r - 1 : 2 * height - 1 - r;
        shift = width / 2;
      }
    }
    for (int b = 0; b < 2; ++b) out[a * 2 + b] = {r, c0 + b + shift, wy[a] * wx[b]};
  }
  return out;
}

}  // namespace detail

/// Tap positions for every output pixel. Throws PoleSingularity in strict mode
/// when a row is too close to a pole for the kernel's angular extent.
inline SampleField build_sample_field(int width, int height, const EquiKernelSpec& spec) {
  if (height < 1 || width != 2 * height)
    throw Error(ErrorCode::ShapeMismatch, "sample field needs W = 2H");
  validate(spec, width);
  if (height % spec.stride != 0)
    throw Error(ErrorCode::ShapeMismatch, "stride must divide the grid height");

  SampleField f;
  f.in_w_ = width;
  f.in_h_ = height;
  f.stride_ = spec.stride;
  f.out_w_ = width / spec.stride;
  f.out_h_ = height / spec.stride;
  f.kh_ = spec.kh;
  f.kw_ = spec.kw;
  f.pole_mode_ = spec.pole_mode;
  f.offsets_.resize(static_cast<std::size_t>(f.out_h_) * spec.taps());

  const double step = resolve_step(spec, width);
  const int hh = spec.kh / 2;
  const int hw = spec.kw / 2;
  const double pole_margin = kPi / 2 - step * std::max(spec.kh, spec.kw);
  const double s = spec.stride;
  const double centre_off = (s - 1.0) / 2.0;

  for (int r = 0; r < f.out_h_; ++r) {
    const double lat = row_to_latitude(r, f.out_h_);
    if (spec.strict && std::abs(lat) >= pole_margin)
      throw Error(ErrorCode::PoleSingularity,
                  "row " + std::to_string(r) + " is within the kernel extent of a pole");
    const double lon = column_to_longitude(0.0, f.out_w_);
    const Vec3 d = lonlat_to_dir(lon, lat);
    const Vec3 east(-std::sin(lon), std::cos(lon), 0.0);
    const Vec3 north = d.cross(east);
    const double centre_u = centre_off;  // column 0 in input index space
    const double centre_v = r * s + centre_off;

    for (int i = -hh; i <= hh; ++i) {
      for (int j = -hw; j <= hw; ++j) {
        const int tap = (i + hh) * spec.kw + (j + hw);
        TapOffset& o = f.offsets_[static_cast<std::size_t>(r) * spec.taps() + tap];
        double du = 0.0;
        double v = 0.0;
        if (i == 0 && j == 0) {
          du = centre_u;
          v = centre_v;
        } else {
          const Vec3 t = (d + std::tan(j * step) * east - std::tan(i * step) * north).normalized();
          const PixelCoord p = dir_to_pixel(t, width, height);
          du = detail::snap_fraction(wrapped_column_delta(p.u, 0.0, width));
          v = detail::snap_fraction(p.v);
        }
        o.du_int = static_cast<int>(std::floor(du));
        o.du_frac = du - o.du_int;
        o.v = v;
        o.corners = detail::bilinear_corners(du, v, width, height, spec.pole_mode);
      }
    }
  }
  return f;
}

/// Kernel weights indexed (out channel, in channel, tap).
struct KernelWeights {
  int out_channels = 1;
  int in_channels = 1;
  int taps = 1;
  std::vector<double> values;

  KernelWeights() = default;
  KernelWeights(int oc, int ic, int t, double fill = 0.0)
      : out_channels(oc), in_channels(ic), taps(t),
        values(static_cast<std::size_t>(oc) * ic * t, fill) {}

  double& operator()(int oc, int ic, int t) {
    return values[(static_cast<std::size_t>(oc) * in_channels + ic) * taps + t];
  }
  double operator()(int oc, int ic, int t) const {
    return values[(static_cast<std::size_t>(oc) * in_channels + ic) * taps + t];
  }
};

namespace detail {

inline void check_shapes(const EquirectGrid<double>& input, const KernelWeights& w,
                         const SampleField& field) {
  if (input.width() != field.in_width() || input.height() != field.in_height())
    throw Error(ErrorCode::ShapeMismatch, "input grid does not match the sample field");
  if (w.in_channels != input.channels() || w.taps != field.taps() ||
      w.values.size() != static_cast<std::size_t>(w.out_channels) * w.in_channels * w.taps)
    throw Error(ErrorCode::ShapeMismatch, "kernel weights do not match input/field");
}

inline double sample(const EquirectGrid<double>& in, int ch, int col_base, const TapOffset& o) {
  double acc = 0.0;
  for (const SampleCorner& k : o.corners) acc += k.weight * in.at(ch, k.row, col_base + k.col_offset);
  return acc;
}

}  // namespace detail

/// Bilinear read of a continuous position (index coordinates).
inline double bilinear_sample(const EquirectGrid<double>& in, int ch, PixelCoord p,
                              PoleMode mode = PoleMode::Clamp) {
  double acc = 0.0;
  for (const SampleCorner& k : detail::bilinear_corners(p.u, p.v, in.width(), in.height(), mode))
    acc += k.weight * in.at(ch, k.row, k.col_offset);
  return acc;
}

inline EquirectGrid<double> equiconv_forward(const EquirectGrid<double>& input,
                                             const KernelWeights& weights,
                                             const SampleField& field) {
  detail::check_shapes(input, weights, field);
  EquirectGrid<double> out(field.out_width(), field.out_height(), weights.out_channels);
  const int taps = field.taps();
  std::vector<double> samples(static_cast<std::size_t>(input.channels()) * taps);
  for (int r = 0; r < field.out_height(); ++r) {
    for (int c = 0; c < field.out_width(); ++c) {
      const int base = c * field.stride();
      for (int ic = 0; ic < input.channels(); ++ic)
        for (int t = 0; t < taps; ++t)
          samples[static_cast<std::size_t>(ic) * taps + t] =
              detail::sample(input, ic, base, field.offset(r, t));
      for (int oc = 0; oc < weights.out_channels; ++oc) {
        double acc = 0.0;
        for (int t = 0; t < taps; ++t)
          for (int ic = 0; ic < input.channels(); ++ic)
            acc += weights(oc, ic, t) * samples[static_cast<std::size_t>(ic) * taps + t];
        out.at(oc, r, c) = acc;
      }
    }
  }
  return out;
}

struct EquiConvGradients {
  EquirectGrid<double> input;
  KernelWeights weights;
};

/// Exact gradients of equiconv_forward with respect to input and weights.
inline EquiConvGradients equiconv_backward(const EquirectGrid<double>& grad_out,
                                           const EquirectGrid<double>& input,
                                           const KernelWeights& weights,
                                           const SampleField& field) {
  detail::check_shapes(input, weights, field);
  if (grad_out.width() != field.out_width() || grad_out.height() != field.out_height() ||
      grad_out.channels() != weights.out_channels)
    throw Error(ErrorCode::ShapeMismatch, "output gradient does not match the forward output");

  EquiConvGradients g{EquirectGrid<double>(input.width(), input.height(), input.channels()),
                      KernelWeights(weights.out_channels, weights.in_channels, weights.taps)};
  const int taps = field.taps();
  for (int r = 0; r < field.out_height(); ++r) {
    for (int c = 0; c < field.out_width(); ++c) {
      const int base = c * field.stride();
      for (int t = 0; t < taps; ++t) {
        const TapOffset& o = field.offset(r, t);
        for (int ic = 0; ic < input.channels(); ++ic) {
          const double s = detail::sample(input, ic, base, o);
          double back = 0.0;
          for (int oc = 0; oc < weights.out_channels; ++oc) {
            const double go = grad_out.at(oc, r, c);
            g.weights(oc, ic, t) += go * s;
            back += go * weights(oc, ic, t);
          }
          if (back == 0.0) continue;
          for (const SampleCorner& k : o.corners)
            g.input.at(ic, k.row, base + k.col_offset) += back * k.weight;
        }
      }
    }
  }
  return g;
}

}  // namespace panoscene
