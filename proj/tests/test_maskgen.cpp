#include "panoscene/maskgen.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace panoscene;

namespace {

ObjectAnnotation rect(double u0, double v0, double u1, double v1, int cls = 1) {
  return {cls, 0, {{u0, v0}, {u1, v0}, {u1, v1}, {u0, v1}}};
}

std::vector<MaskEntry> random_entries(std::mt19937_64& rng, int n, int w, int h) {
  std::vector<MaskEntry> out;
  for (int i = 0; i < n; ++i) {
    const PanoBox b = oracle::random_pixel_box(rng, w, h, 1 + i, w / 3, h / 2);
    out.push_back({oracle::raster_box(b, w, h), 1 + i, 0});
  }
  return out;
}

}  // namespace

TEST(Maskgen, TinyEquatorSquareMatchesPlanarFill) {
  const ObjectAnnotation sq = rect(99.5, 122.5, 109.5, 132.5);
  const BinaryMask m = rasterize_spherical_polygon(sq, 512, 256);
  const std::size_t area = count_nonzero(m);
  EXPECT_GE(area, 98u);
  EXPECT_LE(area, 102u);
  const BinaryMask ref = oracle::planar_fill(sq.points, 512, 256);
  std::size_t diff = 0;
  for (std::size_t k = 0; k < m.data().size(); ++k) diff += m.data()[k] != ref.data()[k];
  EXPECT_LE(diff, 2u);
}

TEST(Maskgen, SeamCrossingIsColumnShift) {
  const ObjectAnnotation centred = {2, 0, {{240.3, 100.2}, {275.7, 96.4}, {281.1, 140.8}, {236.9, 150.3}}};
  ObjectAnnotation moved = centred;
  for (PixelCoord& p : moved.points) p.u -= 256;  // now straddles u = 0
  const BinaryMask a = rasterize_spherical_polygon(centred, 512, 256);
  const BinaryMask b = rasterize_spherical_polygon(moved, 512, 256);
  EXPECT_EQ(shift_columns(a, -256), b);
  EXPECT_TRUE(b(120, 0));
  EXPECT_TRUE(b(120, 511));
}

TEST(Maskgen, RasterIsShiftEquivariant) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 128), v(8, 56), off(-6, 6);
  for (int i = 0; i < 20; ++i) {
    const double cu = u(rng), cv = v(rng);
    ObjectAnnotation a{1, 0, {}};
    for (int k = 0; k < 5; ++k) {
      const double ang = kTwoPi * k / 5 + 0.3 * off(rng) / 6;
      a.points.push_back({cu + 7 * std::cos(ang) + 0.1 * off(rng), cv + 7 * std::sin(ang) + 0.1 * off(rng)});
    }
    const int shift = std::uniform_int_distribution<int>(1, 127)(rng);
    ObjectAnnotation b = a;
    for (PixelCoord& p : b.points) p.u += shift;
    EXPECT_EQ(shift_columns(rasterize_spherical_polygon(a, 128, 64), shift), rasterize_spherical_polygon(b, 128, 64));
  }
}

TEST(Maskgen, WideHighRectangleHasCurvedContour) {
  const BinaryMask m = rasterize_spherical_polygon(rect(100, 40, 300, 60), 512, 256);
  std::vector<int> top_rows;
  for (int c = 110; c < 290; c += 10) {
    int r = 0;
    while (r < 256 && !m(r, c)) ++r;
    ASSERT_LT(r, 256);
    top_rows.push_back(r);
  }
  EXPECT_NE(*std::min_element(top_rows.begin(), top_rows.end()), *std::max_element(top_rows.begin(), top_rows.end()));
  // Geodesics bow towards the pole: the middle of the top edge is highest.
  EXPECT_LT(top_rows[top_rows.size() / 2], top_rows.front());
}

TEST(Maskgen, AreaMatchesSphericalExcess) {
  const int w = 1024, h = 512;
  for (double half : {10.0, 25.0, 60.0}) {
    const ObjectAnnotation a = {1, 0, {{300 - half, 255.5 - half * 0.8}, {300 + half, 255.5 - half},
                                       {300 + half * 1.1, 255.5 + half}, {300 - half, 255.5 + half * 0.7}}};
    std::vector<Vec3> verts;
    for (const PixelCoord& p : a.points) verts.push_back(pixel_to_dir(p, w, h));
    const double exact = spherical_polygon_area(verts);
    EXPECT_NEAR(mask_solid_angle(rasterize_spherical_polygon(a, w, h)), exact, 0.02 * exact) << half;
  }
}

TEST(Maskgen, PoleCapIsFilled) {
  ObjectAnnotation cap{1, 0, {}};
  for (int k = 0; k < 6; ++k) cap.points.push_back({k * 128.0 / 6, 6.0});
  const BinaryMask m = rasterize_spherical_polygon(cap, 128, 64);
  for (int c = 0; c < 128; ++c) EXPECT_TRUE(m(0, c));
  EXPECT_FALSE(m(20, 0));
}

TEST(Maskgen, DegeneratePolygonsRejected) {
  ObjectAnnotation two{1, 0, {{1, 1}, {5, 5}}};
  EXPECT_THROW(rasterize_spherical_polygon(two, 128, 64), Error);
  ObjectAnnotation line{1, 0, {{10, 31.5}, {20, 31.5}, {30, 31.5}}};  // on the equator
  try {
    rasterize_spherical_polygon(line, 128, 64);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegeneratePolygon);
  }
}

TEST(Maskgen, DisjointMasksUnionInAnyOrder) {
  const int w = 64, h = 32;
  std::vector<MaskEntry> e = {{oracle::raster_box(box_from_pixel_span(1, 1, 2, 5, 2, 5), w, h), 1, 0},
                              {oracle::raster_box(box_from_pixel_span(2, 1, 20, 8, 10, 4), w, h), 2, 0},
                              {oracle::raster_box(box_from_pixel_span(3, 1, 60, 8, 20, 4), w, h), 3, 0}};
  const SemanticMap a = compose_semantic(e, 0.5).labels;
  std::reverse(e.begin(), e.end());
  EXPECT_EQ(compose_semantic(e, 0.5).labels, a);
  for (const MaskEntry& m : e)
    for (std::size_t k = 0; k < a.data().size(); ++k)
      if (m.mask.data()[k]) {
        EXPECT_EQ(a.data()[k], m.class_id);
      }
}

TEST(Maskgen, SmallObjectInsideLargeIsInFront) {
  const int w = 64, h = 32;
  const BinaryMask big = oracle::raster_box(box_from_pixel_span(1, 1, 5, 30, 2, 20), w, h);
  const BinaryMask small = oracle::raster_box(box_from_pixel_span(2, 1, 10, 5, 5, 5), w, h);
  const ComposedMap out = compose_semantic({{big, 1, 0}, {small, 2, 0}}, 0.5);
  for (std::size_t k = 0; k < small.data().size(); ++k)
    if (small.data()[k]) {
      EXPECT_EQ(out.labels.data()[k], 2);
    }
  EXPECT_EQ(count_nonzero(out.labels), count_nonzero(big));
}

TEST(Maskgen, LowOverlapLetsLargerWin) {
  const int w = 64, h = 32;
  const BinaryMask a = oracle::raster_box(box_from_pixel_span(1, 1, 0, 10, 0, 10), w, h);
  const BinaryMask b = oracle::raster_box(box_from_pixel_span(2, 1, 9, 10, 0, 11), w, h);  // 10 shared pixels
  const ComposedMap out = compose_semantic({{a, 1, 0}, {b, 2, 0}}, 0.5);
  EXPECT_EQ(out.labels(5, 9), 2);  // b is larger
  EXPECT_EQ(out.labels, oracle::compose_pair(a, 1, b, 2, 0.5));
}

TEST(Maskgen, EqualSizesTenPercentOverlap) {
  const int w = 64, h = 32;
  const BinaryMask a = oracle::raster_box(box_from_pixel_span(3, 1, 0, 10, 0, 10), w, h);
  const BinaryMask b = oracle::raster_box(box_from_pixel_span(5, 1, 9, 10, 0, 10), w, h);
  const ComposedMap out = compose_semantic({{a, 3, 0}, {b, 5, 0}}, 0.5);
  EXPECT_EQ(out.labels, oracle::compose_pair(a, 3, b, 5, 0.5));
}

TEST(Maskgen, PairsMatchPairwiseRuleOracle) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 100; ++i) {
    const auto e = random_entries(rng, 2, 64, 32);
    const double tau = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    EXPECT_EQ(compose_semantic(e, tau).labels,
              oracle::compose_pair(e[0].mask, e[0].class_id, e[1].mask, e[1].class_id, tau));
  }
}

TEST(Maskgen, TriplesArePermutationInvariant) {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 100; ++i) {
    auto e = random_entries(rng, 3, 64, 32);
    const SemanticMap ref = compose_semantic(e, 0.5).labels;
    std::sort(e.begin(), e.end(), [](const MaskEntry& a, const MaskEntry& b) { return a.class_id < b.class_id; });
    do {
      EXPECT_EQ(compose_semantic(e, 0.5).labels, ref);
    } while (std::next_permutation(e.begin(), e.end(), [](const MaskEntry& a, const MaskEntry& b) {
      return a.class_id < b.class_id;
    }));
  }
}

TEST(Maskgen, LabelledPixelsComeFromMasks) {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 30; ++i) {
    const auto e = random_entries(rng, 5, 64, 32);
    const ComposedMap out = compose_semantic(e, 0.5);
    for (std::size_t k = 0; k < out.labels.data().size(); ++k) {
      const int owner = out.owner.data()[k];
      if (out.labels.data()[k] == 0) {
        EXPECT_EQ(owner, -1);
        for (const MaskEntry& m : e) EXPECT_FALSE(m.mask.data()[k]);
      } else {
        ASSERT_GE(owner, 0);
        EXPECT_TRUE(e[owner].mask.data()[k]);
        EXPECT_EQ(out.labels.data()[k], e[owner].class_id);
      }
    }
  }
}

TEST(Maskgen, ComposeRejectsMixedShapes) {
  EXPECT_THROW(compose_semantic({{BinaryMask(64, 32), 1, 0}, {BinaryMask(32, 16), 2, 0}}, 0.5), Error);
  EXPECT_THROW(compose_semantic({}, 0.5), Error);
}
