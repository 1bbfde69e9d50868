// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "deskaid/geo.hpp"
#include "test_support.hpp"

namespace deskaid {
namespace {

using testing::CodeOf;
using testing::SquareMeters;

// Spherical law of haversines written with atan2 instead of asin.
double GreatCircleOracle(const GeoPoint& a, const GeoPoint& b) {
  const double d2r = std::numbers::pi / 180.0;
  const double p1 = a.lat * d2r, p2 = b.lat * d2r;
  const double dl = (b.lon - a.lon) * d2r;
  const double num = std::hypot(std::cos(p2) * std::sin(dl),
                                std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl));
  const double den = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  return kEarthRadiusMeters * std::atan2(num, den);
}

// Crossing-number-free winding number: sum of signed angles.
int WindingNumber(const GeoPoint& p, const Ring& ring) {
  double total = 0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double a = std::atan2(ring[i].lat - p.lat, ring[i].lon - p.lon);
    const double b = std::atan2(ring[i + 1].lat - p.lat, ring[i + 1].lon - p.lon);
    double d = b - a;
    while (d > std::numbers::pi) d -= 2 * std::numbers::pi;
    while (d < -std::numbers::pi) d += 2 * std::numbers::pi;
    total += d;
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

// Random star-shaped (hence simple) polygon around c.
PolygonFeature Star(Rng& rng, GeoPoint c, int n) {
  PolygonFeature p;
  for (int i = 0; i < n; ++i) {
    const double t = 2 * std::numbers::pi * (i + 0.5 * Uniform01(rng)) / n;
    const double r = UniformIn(rng, 0.2, 1.0);
    p.exterior.push_back({c.lon + r * std::cos(t), c.lat + r * std::sin(t)});
  }
  p.exterior.push_back(p.exterior.front());
  return p;
}

TEST(Haversine, OneDegreeOfLatitude) {
  EXPECT_NEAR(HaversineDistance({10, 0}, {10, 1}), kEarthRadiusMeters * std::numbers::pi / 180,
              1e-6);
}

TEST(Haversine, AgreesWithAtan2Form) {
  Rng rng = MakeRng(1, 0);
  for (int i = 0; i < 5000; ++i) {
    const GeoPoint a{UniformIn(rng, -180, 180), UniformIn(rng, -85, 85)};
    const GeoPoint b{UniformIn(rng, -180, 180), UniformIn(rng, -85, 85)};
    const double oracle = GreatCircleOracle(a, b);
    ASSERT_NEAR(HaversineDistance(a, b), oracle, 1e-9 * oracle + 1e-6);
  }
}

TEST(Haversine, SymmetricAndZeroOnIdentity) {
  const GeoPoint a{65.2, 34.1}, b{66.9, 33.4};
  EXPECT_DOUBLE_EQ(HaversineDistance(a, b), HaversineDistance(b, a));
  EXPECT_EQ(HaversineDistance(a, a), 0.0);
}

TEST(PointInPolygon, MatchesWindingNumberOnStarPolygons) {
  Rng rng = MakeRng(2, 0);
  for (int k = 0; k < 50; ++k) {
    const PolygonFeature poly = Star(rng, {0, 0}, 12);
    for (int i = 0; i < 400; ++i) {
      const GeoPoint q{UniformIn(rng, -1.1, 1.1), UniformIn(rng, -1.1, 1.1)};
      ASSERT_EQ(PointInPolygon(q, poly), WindingNumber(q, poly.exterior) != 0)
          << q.lon << "," << q.lat;
    }
  }
}

TEST(PointInPolygon, HolesAndBoundary) {
  PolygonFeature p = testing::SquareAround({0, 0}, 2);
  p.holes.push_back(testing::SquareAround({0, 0}, 1).exterior);
  EXPECT_FALSE(PointInPolygon({0, 0}, p));
  EXPECT_TRUE(PointInPolygon({1.5, 0}, p));
  EXPECT_TRUE(PointInPolygon({2, 0.3}, p));   // exterior edge
  EXPECT_TRUE(PointInPolygon({1, 0.2}, p));   // hole edge
  EXPECT_TRUE(PointInPolygon({-2, -2}, p));   // vertex
  EXPECT_FALSE(PointInPolygon({2.01, 0}, p));
}

TEST(PlanarArea, SquareAndHole) {
  PolygonFeature p = SquareMeters({65, 34}, 500);
  EXPECT_NEAR(PlanarArea(p), 1e6, 1e-3);
  p.holes.push_back(SquareMeters({65, 34}, 100).exterior);
  EXPECT_NEAR(PlanarArea(p), 1e6 - 4e4, 1.0);
}

TEST(PolygonCentroid, MatchesMonteCarloEstimate) {
  // L-shape in a local frame.
  const GeoPoint origin{65, 34};
  const LocalFrame f(origin);
  PolygonFeature p;
  for (auto [x, y] : {std::pair{0.0, 0.0}, {3000.0, 0.0}, {3000.0, 1000.0}, {1000.0, 1000.0},
                      {1000.0, 2500.0}, {0.0, 2500.0}, {0.0, 0.0}}) {
    p.exterior.push_back(f.Unproject({x, y}));
  }
  Rng rng = MakeRng(3, 0);
  const LocalFrame pf = FrameFor(p);
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  const BoundingBox box = BoundsOf(p);
  std::size_t hits = 0;
  while (hits < 200000) {
    const GeoPoint q{UniformIn(rng, box.min_lon, box.max_lon),
                     UniformIn(rng, box.min_lat, box.max_lat)};
    if (!PointInPolygon(q, p)) continue;
    sum += pf.Project(q);
    ++hits;
  }
  const Eigen::Vector2d mc = sum / static_cast<double>(hits);
  const Eigen::Vector2d c = pf.Project(PolygonCentroid(p));
  // Standard error is about 900 m / sqrt(2e5) ~ 2 m per axis.
  EXPECT_NEAR(c.x(), mc.x(), 10.0);
  EXPECT_NEAR(c.y(), mc.y(), 10.0);
}

TEST(PolygonCentroid, DegenerateThrows) {
  PolygonFeature p;
  p.exterior = {{0, 0}, {1, 1}, {2, 2}, {0, 0}};
  EXPECT_EQ(CodeOf([&] { PolygonCentroid(p); }), ErrorCode::kDegenerateGeometry);
}

TEST(ExtractVertices, DropsRepeatsAndClosure) {
  PolylineFeature line;
  line.vertices = {{0, 0}, {1, 0}, {1, 0}, {2, 0}};
  EXPECT_EQ(ExtractVertices(line).size(), 3u);
  const PolygonFeature sq = testing::SquareAround({0, 0}, 1);
  EXPECT_EQ(ExtractVertices(sq.exterior).size(), 4u);
}

TEST(Densify, BoundsSegmentLengthAndKeepsVertices) {
  const std::vector<GeoPoint> v = {{65, 34}, {65.05, 34}, {65.05, 34.02}};
  const auto d = Densify(v, 100.0);
  EXPECT_EQ(d.front(), v.front());
  EXPECT_EQ(d.back(), v.back());
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    EXPECT_LE(HaversineDistance(d[i], d[i + 1]), 100.0 + 1e-6);
  }
  EXPECT_NE(std::find(d.begin(), d.end(), v[1]), d.end());
}

TEST(BufferChainagePoints, OffsetWithinOnePercentAndOutside) {
  Rng rng = MakeRng(4, 0);
  for (int k = 0; k < 10; ++k) {
    const PolygonFeature poly = Star(rng, {65, 34}, 9);
    for (double dist : {50.0, 500.0, 5000.0}) {
      const auto pts = BufferChainagePoints(poly, dist, std::max(dist, 100.0));
      ASSERT_FALSE(pts.empty());
      const LocalFrame f = FrameFor(poly);
      for (const auto& q : pts) {
        EXPECT_FALSE(PointInPolygon(q, poly));
        EXPECT_NEAR(DistanceToBoundary(q, poly, f), dist, 0.01 * dist);
      }
    }
  }
}

TEST(DistanceToBoundary, CenterOfSquare) {
  const PolygonFeature p = SquareMeters({65, 34}, 400);
  EXPECT_NEAR(DistanceToBoundary({65, 34}, p, FrameFor(p)), 400.0, 1e-6);
}

TEST(PolygonSet, AgreesWithLinearScan) {
  Rng rng = MakeRng(5, 0);
  std::vector<PolygonFeature> polys;
  for (int i = 0; i < 40; ++i) {
    polys.push_back(Star(rng, {UniformIn(rng, 0, 20), UniformIn(rng, 0, 20)}, 7));
  }
  const PolygonSet set(polys);
  for (int i = 0; i < 5000; ++i) {
    const GeoPoint q{UniformIn(rng, -1, 21), UniformIn(rng, -1, 21)};
    long first = -1;
    for (std::size_t j = 0; j < polys.size() && first < 0; ++j) {
      if (PointInPolygon(q, polys[j])) first = static_cast<long>(j);
    }
    ASSERT_EQ(set.FirstContaining(q), first);
    ASSERT_EQ(set.ContainsAny(q), first >= 0);
  }
}

TEST(LocalFrame, RoundTrip) {
  const LocalFrame f({65, 34});
  const GeoPoint p{65.3, 33.8};
  const GeoPoint back = f.Unproject(f.Project(p));
  EXPECT_NEAR(back.lon, p.lon, 1e-12);
  EXPECT_NEAR(back.lat, p.lat, 1e-12);
}

}  // namespace
}  // namespace deskaid
