// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "deskaid/features.hpp"
#include "deskaid/models.hpp"
#include "deskaid/sampling.hpp"
#include "deskaid/synthworld.hpp"
#include "test_support.hpp"

namespace deskaid {
namespace {

namespace fs = std::filesystem;
using testing::CodeOf;

WorldConfig SmallWorld() {
  WorldConfig c;
  c.seed = 7;
  c.side_km = 60;
  c.hazards = 150;
  c.roads = 12;
  c.waterways = 5;
  c.conflict_clusters = 4;
  c.conflict_events = 200;
  c.towns = 5;
  c.town_buildings = 400;
  c.rural_buildings = 100;
  c.financial = 10;
  c.education = 20;
  c.airports = 3;
  c.health = 15;
  c.controlled_areas = 5;
  c.study_area_km = 10;
  return c;
}

class SmallWorldTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir();
    catalog_ = new LayerCatalog(GenerateWorld(SmallWorld(), dir_->path() / "world"));
  }
  static void TearDownTestSuite() {
    delete catalog_;
    delete dir_;
  }
  static testing::TempDir* dir_;
  static LayerCatalog* catalog_;
};

testing::TempDir* SmallWorldTest::dir_ = nullptr;
LayerCatalog* SmallWorldTest::catalog_ = nullptr;

TEST_F(SmallWorldTest, CatalogCoversEveryRole) {
  for (Role r : {Role::kHazard, Role::kBuilding, Role::kFinancial, Role::kEducation, Role::kAirport,
                 Role::kHealth, Role::kRoad, Role::kWaterway, Role::kControlledArea,
                 Role::kConflict, Role::kBorder, Role::kPopulation, Role::kElevation}) {
    ASSERT_TRUE(catalog_->Has(r)) << RoleName(r);
    EXPECT_TRUE(fs::exists(catalog_->at(r).path)) << RoleName(r);
  }
  EXPECT_TRUE(fs::exists(dir_->path() / "world" / "study_area.geojson"));
}

TEST_F(SmallWorldTest, HazardsLieInsideBorder) {
  const auto border = ReadPolygons(catalog_->at(Role::kBorder).path);
  const auto hazards = ReadPolygons(catalog_->at(Role::kHazard).path);
  ASSERT_EQ(border.size(), 1u);
  EXPECT_EQ(hazards.size(), 150u);
  for (const auto& h : hazards) {
    for (const auto& v : h.exterior) EXPECT_TRUE(PointInPolygon(v, border[0]));
    EXPECT_GT(PlanarArea(h), 0.0);
  }
}

TEST_F(SmallWorldTest, HazardsFavourRoads) {
  const auto border = ReadPolygons(catalog_->at(Role::kBorder).path);
  const auto hazards = ReadPolygons(catalog_->at(Role::kHazard).path);
  SampleSet set;
  for (const auto& p : SamplePositives(hazards, 1)) set.points.push_back(p);
  for (const auto& p : SampleRandomNegatives(border[0], hazards, 300, 2)) set.points.push_back(p);
  const FeatureSchema schema = MakeSchema(FeatureSet::kBase7, *catalog_);
  const LabeledMatrix m = BuildMatrix(set, PreparedLayers::Load(*catalog_, schema), schema);
  const auto road = static_cast<Eigen::Index>(*schema.IndexOf("dist_road"));
  LabeledMatrix only;
  only.schema.set = FeatureSet::kBase7;
  only.schema.features = {schema.features[static_cast<std::size_t>(road)]};
  only.X = m.X.col(road);
  only.labels = m.labels;
  const TrainedModel lr = TrainLogistic(only, {});
  EXPECT_LT(std::get<LogisticParams>(lr.params).weights[0], 0.0);
}

TEST(GenerateWorld, IdenticalConfigsGiveIdenticalBytes) {
  testing::TempDir dir;
  WorldConfig c = SmallWorld();
  c.hazards = 40;
  GenerateWorld(c, dir / "a");
  GenerateWorld(c, dir / "b");
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir / "a");
    std::string a = testing::ReadText(e.path());
    std::string b = testing::ReadText(dir.path() / "b" / rel);
    // The catalog and manifest may record their own directory.
    if (rel == "catalog.json" || rel == "manifest.json") continue;
    EXPECT_EQ(a, b) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 13u);
  c.seed = 8;
  GenerateWorld(c, dir / "c");
  EXPECT_NE(testing::ReadText(dir / "a/hazards.geojson"), testing::ReadText(dir / "c/hazards.geojson"));
}

TEST(GenerateWorld, RejectsBadConfig) {
  WorldConfig c = SmallWorld();
  c.hazards = 0;
  EXPECT_EQ(CodeOf([&] { ValidateWorldConfig(c); }), ErrorCode::kConfig);
  c = SmallWorld();
  c.study_area_km = 100;
  EXPECT_EQ(CodeOf([&] { ValidateWorldConfig(c); }), ErrorCode::kConfig);
  c = SmallWorld();
  c.side_km = -1;
  EXPECT_EQ(CodeOf([&] { ValidateWorldConfig(c); }), ErrorCode::kConfig);
}

}  // namespace
}  // namespace deskaid
