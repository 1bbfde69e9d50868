// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Five-band risk classification of point probabilities and GIS export.

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "deskaid/geo.hpp"
#include "deskaid/sampling.hpp"

namespace deskaid {

enum class RiskBand { kVeryLow, kLow, kMedium, kHigh, kVeryHigh };

inline constexpr std::array<RiskBand, 5> kAllBands = {
    RiskBand::kVeryLow, RiskBand::kLow, RiskBand::kMedium, RiskBand::kHigh,
    RiskBand::kVeryHigh};

std::string_view RiskBandName(RiskBand band);
std::string_view RiskBandColor(RiskBand band);
RiskBand ParseRiskBand(std::string_view name);

// Lower edges of low, medium, high and very_high.
using BandThresholds = std::array<double, 4>;
inline constexpr BandThresholds kDefaultThresholds = {0.1, 0.2, 0.4, 0.6};

// Throws OutOfRange unless strictly increasing inside (0, 1).
void ValidateThresholds(const BandThresholds& thresholds);

// Left-closed bands: [t_k, t_{k+1}). Throws OutOfRange for p outside [0, 1].
RiskBand BandProbability(double p, const BandThresholds& thresholds = kDefaultThresholds);

struct RiskPoint {
  SampleId id = 0;
  GeoPoint location;
  double probability = 0.0;
  RiskBand band = RiskBand::kVeryLow;
};

struct RiskMap {
  std::vector<RiskPoint> points;
  BandThresholds thresholds = kDefaultThresholds;
  std::string model_kind;
  std::string schema_fingerprint;
};

RiskMap MakeRiskMap(const std::vector<SampleId>& ids, const std::vector<GeoPoint>& locations,
                    const std::vector<double>& probabilities,
                    const BandThresholds& thresholds = kDefaultThresholds);

// Percent of points per band, in band order. Throws EmptyMap.
std::array<double, 5> BandSummary(const RiskMap& map);

// FeatureCollection of Points with `probability` (6 decimals), `risk_band`
// and `id` properties. Throws EmptyMap before touching the file.
void ExportRiskGeoJson(const RiskMap& map, const std::filesystem::path& path);
RiskMap ReadRiskGeoJson(const std::filesystem::path& path);

// CSV band,percent.
void WriteBandSummaryCsv(const std::filesystem::path& path, const std::array<double, 5>& summary);

}  // namespace deskaid
