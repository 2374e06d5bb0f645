#pragma once

// Numerical self-checks of the EquiConv operator on random inputs.

#include "panoscene/equiconv.hpp"

#include <bit>
#include <random>
#include <vector>

namespace panoscene {

/// Plain kh x kw cross-correlation with horizontal wrap and zero rows beyond
/// the poles; tap (i, j) reads input (r + i, c + j).
inline EquirectGrid<double> standard_conv(const EquirectGrid<double>& in, const KernelWeights& w, int kh, int kw) {
  EquirectGrid<double> out(in.width(), in.height(), w.out_channels);
  const int hh = kh / 2, hw = kw / 2;
  for (int oc = 0; oc < w.out_channels; ++oc)
    for (int r = 0; r < in.height(); ++r)
      for (int c = 0; c < in.width(); ++c) {
        double acc = 0.0;
        for (int ic = 0; ic < in.channels(); ++ic)
          for (int i = -hh; i <= hh; ++i) {
            if (r + i < 0 || r + i >= in.height()) continue;
            for (int j = -hw; j <= hw; ++j)
              acc += w(oc, ic, (i + hh) * kw + (j + hw)) * in.at(ic, r + i, c + j);
          }
        out.at(oc, r, c) = acc;
      }
  return out;
}

struct EquatorCheck {
  int band_rows = 0;
  double max_abs_error = 0.0;
  double max_abs_reference = 0.0;
  double relative_error = 0.0;  // max |equi - std| / max |std| over the band rows
};

/// EquiConv (3x3, step 2*pi/W) against standard convolution on a W x H input
/// that is nonzero only in the `band_rows` rows around the equator. Errors are
/// measured on those rows.
inline EquatorCheck equator_agreement(int width, int height, int band_rows, std::uint64_t seed) {
  if (band_rows < 1 || band_rows > height)
    throw Error(ErrorCode::InvalidArgument, "band rows must lie in [1, H]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  EquirectGrid<double> in(width, height);
  const int r0 = height / 2 - band_rows / 2;
  for (int r = r0; r < r0 + band_rows; ++r)
    for (int c = 0; c < width; ++c) in(r, c) = uni(rng);
  KernelWeights w(1, 1, 9);
  for (double& v : w.values) v = uni(rng);

  EquiKernelSpec spec;
  spec.pole_mode = PoleMode::Clamp;
  const auto equi = equiconv_forward(in, w, build_sample_field(width, height, spec));
  const auto ref = standard_conv(in, w, 3, 3);
  EquatorCheck res;
  res.band_rows = band_rows;
  for (int r = r0; r < r0 + band_rows; ++r)
    for (int c = 0; c < width; ++c) {
      res.max_abs_error = std::max(res.max_abs_error, std::abs(equi(r, c) - ref(r, c)));
      res.max_abs_reference = std::max(res.max_abs_reference, std::abs(ref(r, c)));
    }
  res.relative_error = res.max_abs_reference > 0 ? res.max_abs_error / res.max_abs_reference : 0.0;
  return res;
}

struct EquivarianceCheck {
  std::vector<int> shifts;
  std::size_t mismatches = 0;  // output values differing in any bit
};

/// forward(shift(x, k)) == shift(forward(x), k) bit for bit, for every k.
inline EquivarianceCheck shift_equivariance(int width, int height, const std::vector<int>& shifts, std::uint64_t seed,
                                            const EquiKernelSpec& spec = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  EquirectGrid<double> in(width, height, 2);
  for (double& v : in.data()) v = uni(rng);
  KernelWeights w(2, 2, spec.taps());
  for (double& v : w.values) v = uni(rng);
  const SampleField field = build_sample_field(width, height, spec);
  const auto base = equiconv_forward(in, w, field);
  EquivarianceCheck res;
  res.shifts = shifts;
  for (int k : shifts) {
    const auto a = equiconv_forward(shift_columns(in, k), w, field);
    const auto b = shift_columns(base, k / spec.stride);
    for (std::size_t i = 0; i < a.data().size(); ++i)
      if (std::bit_cast<std::uint64_t>(a.data()[i]) != std::bit_cast<std::uint64_t>(b.data()[i])) ++res.mismatches;
  }
  return res;
}

struct GradientCheck {
  double input_error = 0.0;   // max |fd - analytic| / max |analytic| over input entries
  double weight_error = 0.0;  // same over weights
  std::size_t probes = 0;
};

/// Central differences of L = <g, forward(x, w)> against equiconv_backward.
/// The operator is linear in x and in w for a fixed sample field, so every
/// entry is probed; none sits on a bilinear cell boundary.
inline GradientCheck gradient_check(int width, int height, double h, std::uint64_t seed,
                                    const EquiKernelSpec& spec = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  EquirectGrid<double> x(width, height, 2);
  for (double& v : x.data()) v = uni(rng);
  KernelWeights w(2, 2, spec.taps());
  for (double& v : w.values) v = uni(rng);
  const SampleField field = build_sample_field(width, height, spec);
  EquirectGrid<double> g(field.out_width(), field.out_height(), 2);
  for (double& v : g.data()) v = uni(rng);

  auto loss = [&](const EquirectGrid<double>& xi, const KernelWeights& wi) {
    const auto y = equiconv_forward(xi, wi, field);
    double acc = 0.0;
    for (std::size_t k = 0; k < y.data().size(); ++k) acc += g.data()[k] * y.data()[k];
    return acc;
  };
  const EquiConvGradients an = equiconv_backward(g, x, w, field);
  GradientCheck res;

  double diff = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < x.data().size(); ++k) {
    EquirectGrid<double> xp = x, xm = x;
    xp.data()[k] += h;
    xm.data()[k] -= h;
    const double fd = (loss(xp, w) - loss(xm, w)) / (2 * h);
    diff = std::max(diff, std::abs(fd - an.input.data()[k]));
    scale = std::max(scale, std::abs(an.input.data()[k]));
    ++res.probes;
  }
  res.input_error = scale > 0 ? diff / scale : diff;

  diff = scale = 0.0;
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    KernelWeights wp = w, wm = w;
    wp.values[k] += h;
    wm.values[k] -= h;
    const double fd = (loss(x, wp) - loss(x, wm)) / (2 * h);
    diff = std::max(diff, std::abs(fd - an.weights.values[k]));
    scale = std::max(scale, std::abs(an.weights.values[k]));
    ++res.probes;
  }
  res.weight_error = scale > 0 ? diff / scale : diff;
  return res;
}

}  // namespace panoscene
