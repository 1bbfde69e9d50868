// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include <numeric>

#include <gtest/gtest.h>
#include <json.hpp>

#include "deskaid/riskmap.hpp"
#include "test_support.hpp"

namespace deskaid {
namespace {

using testing::CodeOf;

TEST(BandProbability, LeftClosedBands) {
  EXPECT_EQ(BandProbability(0.0), RiskBand::kVeryLow);
  EXPECT_EQ(BandProbability(0.0999), RiskBand::kVeryLow);
  EXPECT_EQ(BandProbability(0.1), RiskBand::kLow);
  EXPECT_EQ(BandProbability(0.2), RiskBand::kMedium);
  EXPECT_EQ(BandProbability(0.3999), RiskBand::kMedium);
  EXPECT_EQ(BandProbability(0.4), RiskBand::kHigh);
  EXPECT_EQ(BandProbability(0.6), RiskBand::kVeryHigh);
  EXPECT_EQ(BandProbability(1.0), RiskBand::kVeryHigh);
  EXPECT_EQ(CodeOf([] { BandProbability(1.01); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(CodeOf([] { BandProbability(-0.1); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(BandProbability(0.5, {0.5, 0.6, 0.7, 0.8}), RiskBand::kLow);
}

TEST(BandThresholds, Validation) {
  EXPECT_NO_THROW(ValidateThresholds(kDefaultThresholds));
  EXPECT_EQ(CodeOf([] { ValidateThresholds({0.2, 0.1, 0.4, 0.6}); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(CodeOf([] { ValidateThresholds({0.0, 0.1, 0.4, 0.6}); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(CodeOf([] { ValidateThresholds({0.1, 0.2, 0.4, 1.0}); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(CodeOf([] { ValidateThresholds({0.1, 0.2, 0.2, 0.6}); }), ErrorCode::kOutOfRange);
}

TEST(BandNames, RoundTrip) {
  for (RiskBand b : kAllBands) EXPECT_EQ(ParseRiskBand(RiskBandName(b)), b);
  EXPECT_EQ(RiskBandName(RiskBand::kVeryHigh), "very_high");
  EXPECT_EQ(CodeOf([] { ParseRiskBand("extreme"); }), ErrorCode::kParse);
}

RiskMap RandomMap(std::uint64_t seed, std::size_t n) {
  Rng rng = MakeRng(seed, 0);
  std::vector<SampleId> ids;
  std::vector<GeoPoint> loc;
  std::vector<double> p;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(static_cast<SampleId>(6'000'000'000 + i));
    loc.push_back({UniformIn(rng, 65, 66), UniformIn(rng, 34, 35)});
    p.push_back(std::round(Uniform01(rng) * 1e6) / 1e6);
  }
  return MakeRiskMap(ids, loc, p);
}

TEST(BandSummary, PercentagesSumToHundred) {
  for (std::size_t n : {1u, 7u, 333u}) {
    const auto s = BandSummary(RandomMap(n, n));
    EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 100.0, 1e-9);
  }
  const RiskMap m = MakeRiskMap({1, 2, 3, 4}, {{0, 0}, {0, 0}, {0, 0}, {0, 0}}, {0.05, 0.15, 0.15, 0.9});
  const auto s = BandSummary(m);
  EXPECT_EQ(s[0], 25.0);
  EXPECT_EQ(s[1], 50.0);
  EXPECT_EQ(s[4], 25.0);
  EXPECT_EQ(CodeOf([] { BandSummary(RiskMap{}); }), ErrorCode::kEmptyMap);
}

TEST(MakeRiskMap, Errors) {
  EXPECT_EQ(CodeOf([] { MakeRiskMap({1}, {}, {0.5}); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(CodeOf([] { MakeRiskMap({1}, {{0, 0}}, {1.5}); }), ErrorCode::kOutOfRange);
}

TEST(RiskGeoJson, RoundTrip) {
  testing::TempDir dir;
  RiskMap m = RandomMap(9, 50);
  m.model_kind = "random_forest";
  ExportRiskGeoJson(m, dir / "risk.geojson");
  const RiskMap back = ReadRiskGeoJson(dir / "risk.geojson");
  ASSERT_EQ(back.points.size(), m.points.size());
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    EXPECT_EQ(back.points[i].id, m.points[i].id);
    EXPECT_EQ(back.points[i].location.lon, m.points[i].location.lon);
    EXPECT_EQ(back.points[i].location.lat, m.points[i].location.lat);
    EXPECT_EQ(back.points[i].probability, m.points[i].probability);
    EXPECT_EQ(back.points[i].band, m.points[i].band);
  }
  const auto doc = nlohmann::json::parse(testing::ReadText(dir / "risk.geojson"));
  EXPECT_EQ(doc.at("type"), "FeatureCollection");
  EXPECT_EQ(doc.at("features").at(0).at("geometry").at("type"), "Point");
}

TEST(RiskGeoJson, EmptyMapWritesNothing) {
  testing::TempDir dir;
  EXPECT_EQ(CodeOf([&] { ExportRiskGeoJson(RiskMap{}, dir / "x.geojson"); }), ErrorCode::kEmptyMap);
  EXPECT_FALSE(std::filesystem::exists(dir / "x.geojson"));
}

}  // namespace
}  // namespace deskaid
