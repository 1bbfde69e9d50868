// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "deskaid/features.hpp"
#include "test_support.hpp"

namespace deskaid {
namespace {

using testing::CodeOf;

constexpr double kMPerDeg = std::numbers::pi / 180.0 * kEarthRadiusMeters;

RasterGrid Grid(int rows, int cols, double x0, double y0, double cell) {
  RasterGrid g;
  g.nrows = rows;
  g.ncols = cols;
  g.xllcorner = x0;
  g.yllcorner = y0;
  g.cellsize = cell;
  g.values.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  return g;
}

const Role kVectorRoles[] = {Role::kBuilding, Role::kFinancial,       Role::kEducation,
                             Role::kAirport,  Role::kHealth,          Role::kRoad,
                             Role::kWaterway, Role::kControlledArea,  Role::kConflict,
                             Role::kBorder};

// Layers over [65, 66] x [34, 35] with random hubs per role.
struct Fixture {
  PreparedLayers layers;
  std::map<Role, std::vector<Hub>> hubs;
  RasterGrid population, elevation;
  FeatureSchema schema;

  explicit Fixture(std::uint64_t seed) {
    Rng rng = MakeRng(seed, 0);
    for (Role r : kVectorRoles) {
      std::vector<Hub> hs;
      for (int i = 0; i < 40; ++i) {
        Hub h;
        h.location = {UniformIn(rng, 65, 66), UniformIn(rng, 34, 35)};
        h.id = i;
        h.category = i % 3 == 0 ? "clinic" : i % 3 == 1 ? "hospital" : "other";
        h.payload = i;
        hs.push_back(h);
      }
      hubs[r] = hs;
      layers.SetHubs(r, hs);
    }
    population = Grid(40, 40, 65, 34, 0.025);
    elevation = Grid(40, 40, 65, 34, 0.025);
    for (std::size_t k = 0; k < population.values.size(); ++k) {
      population.values[k] = static_cast<double>(k % 97);
      elevation.values[k] = 1000 + 3.0 * static_cast<double>(k % 40) + static_cast<double>(k / 40);
    }
    layers.SetRaster(Role::kPopulation, population);
    layers.SetRaster(Role::kElevation, elevation);
    LayerCatalog cat;
    LayerBinding health;
    health.vocabulary = {"hospital", "clinic"};
    cat.layers[Role::kHealth] = health;
    schema = MakeSchema(FeatureSet::kExpanded18, cat);
  }
};

TEST(Schema, SizesAndOrder) {
  const FeatureSchema base = MakeSchema(FeatureSet::kBase7);
  const FeatureSchema full = MakeSchema(FeatureSet::kExpanded18);
  EXPECT_EQ(base.size(), 7u);
  EXPECT_EQ(full.size(), 18u);
  bool seen_categorical = false;
  for (std::size_t j = 0; j < full.size(); ++j) {
    if (full.IsCategorical(j)) {
      seen_categorical = true;
      EXPECT_EQ(full.features[j].vocabulary.front(), "unknown");
    } else {
      EXPECT_FALSE(seen_categorical) << "continuous columns come first";
    }
  }
  for (const auto& f : base.features) EXPECT_TRUE(full.IndexOf(f.name).has_value());
  EXPECT_NE(base.Fingerprint(), full.Fingerprint());
  EXPECT_EQ(full.Fingerprint(), MakeSchema(FeatureSet::kExpanded18).Fingerprint());
}

TEST(Schema, VocabularyFromCatalogChangesFingerprint) {
  LayerCatalog cat;
  LayerBinding b;
  b.vocabulary = {"unknown", "school", "university"};
  cat.layers[Role::kEducation] = b;
  const FeatureSchema s = MakeSchema(FeatureSet::kExpanded18, cat);
  const auto j = *s.IndexOf("education_type");
  EXPECT_EQ(s.features[j].vocabulary, (std::vector<std::string>{"unknown", "school", "university"}));
  EXPECT_NE(s.Fingerprint(), MakeSchema(FeatureSet::kExpanded18).Fingerprint());
}

TEST(Slope, TiltedPlaneGivesConstantGradient) {
  const double gx = 0.03, gy = -0.04;  // rise per meter east and north
  RasterGrid g = Grid(12, 15, 70.0, 30.0, 0.01);
  for (int r = 0; r < g.nrows; ++r) {
    const double lat = g.RowCenterLat(r);
    const double y = (lat - 30.0) * kMPerDeg;
    for (int c = 0; c < g.ncols; ++c) {
      const double lon = g.xllcorner + (c + 0.5) * g.cellsize;
      const double x = (lon - 70.0) * kMPerDeg * std::cos(lat * std::numbers::pi / 180);
      g.at(r, c) = 500 + gx * x + gy * y;
    }
  }
  const RasterGrid s = DeriveSlopeRaster(g);
  for (int r = 0; r < g.nrows; ++r) {
    for (int c = 0; c < g.ncols; ++c) {
      if (r == 0 || c == 0 || r == g.nrows - 1 || c == g.ncols - 1) {
        EXPECT_EQ(s.at(r, c), g.nodata);
      } else {
        // Within a row the east spacing is exact; across rows the cosine
        // varies slightly, which bounds the error well under 0.2%.
        EXPECT_NEAR(s.at(r, c), 5.0, 0.01);
      }
    }
  }
}

TEST(Slope, NorthFacingPlaneIsExact) {
  RasterGrid g = Grid(5, 5, 10.0, 10.0, 0.001);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) g.at(r, c) = 0.1 * (4 - r) * 0.001 * kMPerDeg;
  }
  const RasterGrid s = DeriveSlopeRaster(g);
  EXPECT_NEAR(s.at(2, 2), 10.0, 1e-9);
}

TEST(Slope, NoDataAndSmallGrids) {
  RasterGrid g = Grid(4, 4, 0, 0, 1);
  g.at(0, 0) = g.nodata;
  const RasterGrid s = DeriveSlopeRaster(g);
  EXPECT_EQ(s.at(1, 1), g.nodata);
  EXPECT_NE(s.at(2, 2), g.nodata);
  EXPECT_EQ(CodeOf([] { DeriveSlopeRaster(Grid(2, 5, 0, 0, 1)); }), ErrorCode::kGridTooSmall);
}

TEST(SampleRaster, CellArithmetic) {
  RasterGrid g = Grid(3, 4, 10, 20, 0.5);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) g.at(r, c) = 10 * r + c;
  }
  // Row 0 is northernmost.
  EXPECT_EQ(SampleRaster(g, {10.25, 21.25}), 0.0);
  EXPECT_EQ(SampleRaster(g, {11.75, 20.25}), 23.0);
  EXPECT_EQ(SampleRaster(g, {10.6, 20.9}), 11.0);
  // Edges: west and north belong to the first cell, east and south to the last.
  EXPECT_EQ(SampleRaster(g, {10.0, 21.5}), 0.0);
  EXPECT_EQ(SampleRaster(g, {12.0, 20.0}), 23.0);
  EXPECT_EQ(SampleRaster(g, {10.5, 21.0}), 11.0);
  EXPECT_EQ(CodeOf([&] { SampleRaster(g, {12.01, 20.5}); }), ErrorCode::kOutOfExtent);
  g.at(1, 1) = g.nodata;
  EXPECT_EQ(CodeOf([&] { SampleRaster(g, {10.75, 20.75}); }), ErrorCode::kNoDataCell);
}

TEST(FeaturizePoint, DistancesAreNearestHubDistances) {
  Fixture fx(3);
  Rng rng = MakeRng(4, 0);
  for (int i = 0; i < 50; ++i) {
    const GeoPoint p{UniformIn(rng, 65.05, 65.95), UniformIn(rng, 34.05, 34.95)};
    const Eigen::VectorXd v = FeaturizePoint(p, fx.layers, fx.schema);
    const auto check = [&](const char* name, Role role) {
      double best = 1e300;
      for (const auto& h : fx.hubs[role]) best = std::min(best, HaversineDistance(p, h.location));
      EXPECT_EQ(v[static_cast<Eigen::Index>(*fx.schema.IndexOf(name))], best) << name;
    };
    check("dist_building", Role::kBuilding);
    check("dist_road", Role::kRoad);
    check("dist_conflict", Role::kConflict);
    check("dist_border", Role::kBorder);
    EXPECT_EQ(v[static_cast<Eigen::Index>(*fx.schema.IndexOf("population_density"))],
              SampleRaster(fx.population, p));
    EXPECT_EQ(v[static_cast<Eigen::Index>(*fx.schema.IndexOf("elevation"))],
              SampleRaster(fx.elevation, p));
  }
}

TEST(FeaturizePoint, CategoryAndPayloadFollowNearestHub) {
  Fixture fx(5);
  const Hub& target = fx.hubs[Role::kHealth][0];  // "clinic"
  const Eigen::VectorXd v = FeaturizePoint(target.location, fx.layers, fx.schema);
  const auto j = static_cast<Eigen::Index>(*fx.schema.IndexOf("health_type"));
  EXPECT_EQ(v[j], 2.0);  // {"unknown", "hospital", "clinic"}
  const Hub& other = fx.hubs[Role::kHealth][2];  // "other" is out of vocabulary
  EXPECT_EQ(FeaturizePoint(other.location, fx.layers, fx.schema)[j], 0.0);
  const Hub& conflict = fx.hubs[Role::kConflict][7];
  const auto d = static_cast<Eigen::Index>(*fx.schema.IndexOf("estimated_deaths"));
  EXPECT_EQ(FeaturizePoint(conflict.location, fx.layers, fx.schema)[d], 7.0);
}

SampleSet Points(const std::vector<GeoPoint>& pts) {
  SampleSet s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    SamplePoint p;
    p.id = static_cast<SampleId>(100 - i);
    p.location = pts[i];
    p.label = i % 2 ? Label::kHazard : Label::kClear;
    s.points.push_back(p);
  }
  return s;
}

TEST(BuildMatrix, RowsInIdOrderWithTrainingStats) {
  Fixture fx(6);
  Rng rng = MakeRng(7, 0);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({UniformIn(rng, 65.1, 65.9), UniformIn(rng, 34.1, 34.9)});
  const SampleSet s = Points(pts);
  std::vector<bool> mask(pts.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = i < 20;
  const LabeledMatrix m = BuildMatrix(s, fx.layers, fx.schema, mask);
  ASSERT_EQ(m.rows(), 30);
  for (std::size_t r = 0; r + 1 < m.ids.size(); ++r) EXPECT_LT(m.ids[r], m.ids[r + 1]);
  // id 100 - i was sample i; the last row is sample 0.
  EXPECT_EQ(m.locations.back(), pts[0]);
  EXPECT_TRUE(m.training.back());
  EXPECT_FALSE(m.training.front());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m.X.cols());
  int n = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (m.training[static_cast<std::size_t>(r)]) {
      mean += m.X.row(r).transpose();
      ++n;
    }
  }
  mean /= n;
  EXPECT_TRUE(m.mean.isApprox(mean, 1e-12));
}

TEST(BuildMatrix, CollectsFailures) {
  Fixture fx(8);
  const SampleSet s = Points({{65.5, 34.5}, {70, 40}, {71, 41}});
  try {
    BuildMatrix(s, fx.layers, fx.schema);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFeaturizationFailed);
    EXPECT_NE(std::string(e.what()).find("2 of 3"), std::string::npos);
  }
}

TEST(LabeledMatrix, CsvRoundTripAndProjection) {
  testing::TempDir dir;
  Fixture fx(9);
  Rng rng = MakeRng(10, 0);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({UniformIn(rng, 65.1, 65.9), UniformIn(rng, 34.1, 34.9)});
  const LabeledMatrix m = BuildMatrix(Points(pts), fx.layers, fx.schema);
  WriteMatrix(dir / "m.csv", m);
  const LabeledMatrix back = ReadMatrix(dir / "m.csv");
  EXPECT_EQ(back.X, m.X);
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_EQ(back.ids, m.ids);
  EXPECT_EQ(back.locations, m.locations);
  EXPECT_EQ(back.mean, m.mean);
  EXPECT_EQ(back.stddev, m.stddev);
  EXPECT_EQ(back.schema.Fingerprint(), m.schema.Fingerprint());

  const LabeledMatrix base = ProjectColumns(m, MakeSchema(FeatureSet::kBase7));
  EXPECT_EQ(base.X.cols(), 7);
  EXPECT_EQ(base.X.col(1), m.X.col(static_cast<Eigen::Index>(*m.schema.IndexOf("dist_road"))));
  EXPECT_EQ(CodeOf([&] { ProjectColumns(base, fx.schema); }), ErrorCode::kSchemaMismatch);
}

TEST(Hubs, DensifiedLinesAndConflictPayload) {
  PolylineFeature line;
  line.vertices = {{65, 34}, {65.02, 34}};
  const auto sparse = HubsFromLines({line}, false);
  const auto dense = HubsFromLines({line}, true);
  EXPECT_EQ(sparse.size(), 2u);
  EXPECT_GE(dense.size(), 19u);
  for (std::size_t i = 0; i + 1 < dense.size(); ++i) {
    EXPECT_LE(HaversineDistance(dense[i].location, dense[i + 1].location), 100.0 + 1e-9);
  }
  const auto conflicts = HubsFromConflicts({{{65, 34}, 4.0}, {{66, 35}, 0.0}});
  EXPECT_EQ(conflicts[0].payload, 4.0);
  EXPECT_EQ(conflicts[1].id, 1);
}

TEST(PreparedLayers, MissingRole) {
  PreparedLayers layers;
  EXPECT_EQ(CodeOf([&] { layers.hubs(Role::kRoad); }), ErrorCode::kMissingLayer);
  EXPECT_EQ(CodeOf([&] { layers.population(); }), ErrorCode::kMissingLayer);
  EXPECT_EQ(CodeOf([&] { layers.SetRaster(Role::kRoad, Grid(3, 3, 0, 0, 1)); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace deskaid
