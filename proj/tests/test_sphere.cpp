#include "panoscene/sphere.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace panoscene;

namespace {

Vec3 random_dir(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

}  // namespace

TEST(Sphere, ImageCentreLooksAlongX) {
  const Vec3 d = pixel_to_dir({255.5, 127.5}, 512, 256);
  EXPECT_NEAR(d.x(), 1.0, 1e-12);
  EXPECT_NEAR(d.y(), 0.0, 1e-12);
  EXPECT_NEAR(d.z(), 0.0, 1e-12);
}

TEST(Sphere, ForwardDirectionProjectsToCentre) {
  const PixelCoord p = dir_to_pixel(Vec3::UnitX(), 512, 256);
  EXPECT_NEAR(p.u, 255.5, 1e-9);
  EXPECT_NEAR(p.v, 127.5, 1e-9);
}

TEST(Sphere, PolesMapToHalfWidth) {
  const PixelCoord n = dir_to_pixel(Vec3::UnitZ(), 512, 256);
  EXPECT_DOUBLE_EQ(n.u, 256.0);
  EXPECT_NEAR(n.v, -0.5, 1e-12);
  const PixelCoord s = dir_to_pixel(-Vec3::UnitZ(), 512, 256);
  EXPECT_DOUBLE_EQ(s.u, 256.0);
  EXPECT_NEAR(s.v, 255.5, 1e-12);
  EXPECT_NEAR((pixel_to_dir(n, 512, 256) - Vec3::UnitZ()).norm(), 0.0, 1e-12);
}

TEST(Sphere, RoundTripRandomDirections) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 d = random_dir(rng);
    const Vec3 back = pixel_to_dir(dir_to_pixel(d, 512, 256), 512, 256);
    EXPECT_LT((back - d).norm(), 1e-9);
  }
}

TEST(Sphere, RoundTripEveryPixelCentre) {
  const int w = 128, h = 64;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const PixelCoord p = dir_to_pixel(pixel_center_dir(r, c, w, h), w, h);
      EXPECT_NEAR(p.u, c, 1e-9);
      EXPECT_NEAR(p.v, r, 1e-9);
    }
}

TEST(Sphere, ColumnsArePeriodic) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-600, 600), v(-0.5, 255.5);
  for (int i = 0; i < 200; ++i) {
    const PixelCoord p{u(rng), v(rng)};
    EXPECT_LT((pixel_to_dir({p.u + 512, p.v}, 512, 256) - pixel_to_dir(p, 512, 256)).norm(), 1e-9);
  }
}

TEST(Sphere, ColumnShiftIsYawRotation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 512), v(0, 255);
  for (int k : {1, 17, 256, 511}) {
    const Mat3 rot = yaw_rotation(kTwoPi * k / 512);
    for (int i = 0; i < 50; ++i) {
      const PixelCoord p{u(rng), v(rng)};
      EXPECT_LT((pixel_to_dir({p.u + k, p.v}, 512, 256) - rot * pixel_to_dir(p, 512, 256)).norm(), 1e-9);
    }
  }
}

TEST(Sphere, SquarePixelsWhenWidthIsTwiceHeight) {
  const double total = [] {
    double s = 0.0;
    for (int r = 0; r < 64; ++r) s += 128 * pixel_solid_angle(r, 128, 64);
    return s;
  }();
  EXPECT_NEAR(total, 4 * kPi, 1e-12);
}

TEST(Sphere, GeodesicArcDegenerateAndMidpoint) {
  const Vec3 a = Vec3(1, 2, 3).normalized();
  for (const Vec3& p : geodesic_arc(a, a, 7)) EXPECT_LT((p - a).norm(), 1e-15);

  const auto arc = geodesic_arc(Vec3::UnitX(), Vec3::UnitY(), 3);
  ASSERT_EQ(arc.size(), 3u);
  EXPECT_LT((arc[1] - Vec3(std::sqrt(0.5), std::sqrt(0.5), 0)).norm(), 1e-12);
  EXPECT_EQ(arc.front(), Vec3::UnitX());
  EXPECT_EQ(arc.back(), Vec3::UnitY());
}

TEST(Sphere, GeodesicArcUnitNormAndEqualSpacing) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = random_dir(rng), b = random_dir(rng);
    if (a.dot(b) < -0.999) continue;
    const auto arc = geodesic_arc(a, b, 9);
    EXPECT_EQ(arc.front(), a);
    EXPECT_EQ(arc.back(), b);
    const double step = angular_distance(a, b) / 8;
    for (std::size_t k = 0; k < arc.size(); ++k) {
      EXPECT_NEAR(arc[k].norm(), 1.0, 1e-12);
      if (k > 0) {
        EXPECT_NEAR(angular_distance(arc[k - 1], arc[k]), step, 1e-9);
      }
      EXPECT_NEAR(arc[k].dot(a.cross(b).normalized()), 0.0, 1e-9);
    }
  }
}

TEST(Sphere, GeodesicArcCommutesWithRotation) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Vec3 a = random_dir(rng), b = random_dir(rng);
    if (a.dot(b) < -0.999) continue;
    const Mat3 rot = Eigen::AngleAxisd(1.234 * i, random_dir(rng)).toRotationMatrix();
    const auto plain = geodesic_arc(a, b, 6);
    const auto turned = geodesic_arc(rot * a, rot * b, 6);
    for (std::size_t k = 0; k < plain.size(); ++k) EXPECT_LT((rot * plain[k] - turned[k]).norm(), 1e-9);
  }
}

TEST(Sphere, GeodesicArcRejectsAntipodes) {
  try {
    geodesic_arc(Vec3::UnitX(), -Vec3::UnitX(), 5);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AntipodalEndpoints);
  }
}

TEST(Sphere, WrapOverlapAcrossSeam) {
  EXPECT_DOUBLE_EQ(wrap_interval_overlap({502, 20}, {0, 5}, 512), 5.0);
  // Brute force over integer columns.
  int count = 0;
  for (int c = 0; c < 512; ++c) {
    const bool in_a = c >= 502 || c < 10;
    const bool in_b = c < 5;
    count += in_a && in_b;
  }
  EXPECT_EQ(count, 5);
}

TEST(Sphere, WrapOverlapBasicCases) {
  EXPECT_DOUBLE_EQ(wrap_interval_overlap({40, 30}, {40, 30}, 512), 30.0);
  EXPECT_DOUBLE_EQ(wrap_interval_overlap({10, 20}, {100, 20}, 512), 0.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> s(-600, 600), l(0, 300);
  for (int i = 0; i < 500; ++i) {
    const ColumnInterval a{s(rng), l(rng)}, b{s(rng), l(rng)};
    EXPECT_NEAR(wrap_interval_overlap(a, b, 512), wrap_interval_overlap(b, a, 512), 1e-9);
    EXPECT_NEAR(wrap_interval_overlap(a, b, 512), wrap_interval_overlap({a.start + 512, a.length}, b, 512), 1e-9);
  }
}

TEST(Sphere, WrappedColumnDeltaIsMinimal) {
  EXPECT_DOUBLE_EQ(wrapped_column_delta(1, 510, 512), 3.0);
  EXPECT_DOUBLE_EQ(wrapped_column_delta(510, 1, 512), -3.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 512);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng), b = u(rng);
    const double d = wrapped_column_delta(a, b, 512);
    EXPECT_LE(std::abs(d), 256.0);
    EXPECT_NEAR(wrap_coord(b + d, 512), wrap_coord(a, 512), 1e-9);
  }
}
