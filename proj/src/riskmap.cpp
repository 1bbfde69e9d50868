// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/riskmap.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "deskaid/common.hpp"
#include "deskaid/ingest.hpp"

namespace deskaid {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view RiskBandName(RiskBand band) {
  switch (band) {
    case RiskBand::kVeryLow: return "very_low";
    case RiskBand::kLow: return "low";
    case RiskBand::kMedium: return "medium";
    case RiskBand::kHigh: return "high";
    case RiskBand::kVeryHigh: return "very_high";
  }
  return "?";
}

std::string_view RiskBandColor(RiskBand band) {
  switch (band) {
    case RiskBand::kVeryLow: return "blue";
    case RiskBand::kLow: return "green";
    case RiskBand::kMedium: return "yellow";
    case RiskBand::kHigh: return "orange";
    case RiskBand::kVeryHigh: return "red";
  }
  return "?";
}

RiskBand ParseRiskBand(std::string_view name) {
  for (RiskBand b : kAllBands) {
    if (RiskBandName(b) == name) return b;
  }
  throw Error(ErrorCode::kParse, "unknown risk band '" + std::string(name) + "'");
}

void ValidateThresholds(const BandThresholds& t) {
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] > 0.0 && t[k] < 1.0) || (k > 0 && !(t[k] > t[k - 1]))) {
      throw Error(ErrorCode::kOutOfRange,
                  "band thresholds must be strictly increasing inside (0, 1)");
    }
  }
}

RiskBand BandProbability(double p, const BandThresholds& t) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "probability " + FormatDouble(p) + " outside [0, 1]");
  }
  int band = 0;
  while (band < 4 && p >= t[static_cast<std::size_t>(band)]) ++band;
  return static_cast<RiskBand>(band);
}

RiskMap MakeRiskMap(const std::vector<SampleId>& ids, const std::vector<GeoPoint>& locations,
                    const std::vector<double>& probabilities, const BandThresholds& thresholds) {
  if (ids.size() != locations.size() || ids.size() != probabilities.size()) {
    throw Error(ErrorCode::kLengthMismatch, "risk map inputs disagree in length");
  }
  ValidateThresholds(thresholds);
  RiskMap map;
  map.thresholds = thresholds;
  map.points.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    map.points.push_back(
        {ids[i], locations[i], probabilities[i], BandProbability(probabilities[i], thresholds)});
  }
  return map;
}

std::array<double, 5> BandSummary(const RiskMap& map) {
  if (map.points.empty()) throw Error(ErrorCode::kEmptyMap, "risk map has no points");
  std::array<std::size_t, 5> counts{};
  for (const auto& p : map.points) ++counts[static_cast<std::size_t>(p.band)];
  std::array<double, 5> pct{};
  const double n = static_cast<double>(map.points.size());
  for (std::size_t b = 0; b < 5; ++b) pct[b] = 100.0 * static_cast<double>(counts[b]) / n;
  return pct;
}

void ExportRiskGeoJson(const RiskMap& map, const fs::path& path) {
  if (map.points.empty()) throw Error(ErrorCode::kEmptyMap, "risk map has no points");
  json features = json::array();
  for (const auto& p : map.points) {
    features.push_back(
        {{"type", "Feature"},
         {"properties",
          {{"id", p.id},
           {"probability", std::round(p.probability * 1e6) / 1e6},
           {"risk_band", RiskBandName(p.band)}}},
         {"geometry", {{"type", "Point"}, {"coordinates", {p.location.lon, p.location.lat}}}}});
  }
  json doc{{"type", "FeatureCollection"},
           {"deskaid",
            {{"model_kind", map.model_kind},
             {"schema_fingerprint", map.schema_fingerprint},
             {"thresholds", map.thresholds}}},
           {"features", std::move(features)}};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

RiskMap ReadRiskGeoJson(const fs::path& path) {
  RiskMap map;
  for (const auto& f : ReadPoints(path)) {
    RiskPoint p;
    p.location = f.location;
    auto get = [&](const char* key) -> const std::string& {
      auto it = f.attributes.find(key);
      if (it == f.attributes.end()) {
        throw Error(ErrorCode::kMissingColumn, path.string() + ": feature lacks '" + key + "'");
      }
      return it->second;
    };
    std::int64_t id = 0;
    if (!ParseDouble(get("probability"), p.probability) || !ParseInt64(get("id"), id)) {
      throw Error(ErrorCode::kParse, path.string() + ": bad risk feature properties");
    }
    p.id = id;
    p.band = ParseRiskBand(get("risk_band"));
    map.points.push_back(p);
  }
  return map;
}

void WriteBandSummaryCsv(const fs::path& path, const std::array<double, 5>& summary) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "band,percent\n";
  for (std::size_t b = 0; b < 5; ++b) {
    out << RiskBandName(kAllBands[b]) << ',' << FormatFixed(summary[b], 6) << '\n';
  }
}

}  // namespace deskaid
