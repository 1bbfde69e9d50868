// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Labeled sample generation: positives inside hazard polygons, random and
// buffered hard negatives, balanced training sets, and train/test splits.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

#include "deskaid/geo.hpp"

namespace deskaid {

enum class Label : int { kClear = 0, kHazard = 1 };

enum class Strategy {
  kPositive,
  kRandom,
  kHn50,
  kHn500,
  kHn5000,
  kHnCustom,  // hard negatives at a non-preset buffer distance
  kGrid,      // clear points of an evaluation lattice
};

std::string_view StrategyName(Strategy s);
Strategy ParseStrategy(std::string_view name);

// Preset tag for a buffer distance: 50 -> hn50, 500 -> hn500, 5000 -> hn5000,
// anything else -> hn_custom.
Strategy StrategyForBuffer(double buffer_m);

using SampleId = std::int64_t;

struct SamplePoint {
  SampleId id = 0;
  GeoPoint location;
  Label label = Label::kClear;
  Strategy strategy = Strategy::kRandom;
  std::optional<std::int64_t> source_polygon_id;
};

struct SampleSet {
  std::vector<SamplePoint> points;
  std::uint64_t seed = 0;
  std::map<Strategy, std::size_t> strategy_mix;

  std::size_t CountLabel(Label label) const;
};

// Ids are unique across strategies: each strategy owns a block of 10^9 ids.
SampleId StrategyIdBase(Strategy s);

// Two points per polygon, uniform by rejection in the polygon's local frame
// (at most 1000 trials per point, then a logged centroid fallback).
std::vector<SamplePoint> SamplePositives(const std::vector<PolygonFeature>& hazards,
                                         std::uint64_t seed, int per_polygon = 2);

// n area-uniform points inside `border` and outside every hazard.
std::vector<SamplePoint> SampleRandomNegatives(const PolygonFeature& border,
                                               const std::vector<PolygonFeature>& hazards,
                                               std::size_t n, std::uint64_t seed);

// per_polygon points per hazard drawn from its buffer ring candidates
// (spacing max(buffer, 100 m)) after dropping candidates inside any hazard.
// Deficits are refilled from other polygons' leftover candidates.
std::vector<SamplePoint> SampleHardNegatives(const std::vector<PolygonFeature>& hazards,
                                             double buffer_m, int per_polygon,
                                             std::uint64_t seed);

enum class Mix { kRandom, kHn50, kHn500, kHn5000, kHybrid };

std::string_view MixName(Mix m);
Mix ParseMix(std::string_view name);

// Share of negatives per strategy in a hybrid mix, in the order
// hn50, hn500, hn5000, random.
using HybridWeights = std::array<double, 4>;
inline constexpr HybridWeights kEqualQuarters = {0.25, 0.25, 0.25, 0.25};

using NegativePools = std::map<Strategy, std::vector<SamplePoint>>;

// Balanced set: |negatives| == |positives|, drawn from the pools per `mix`,
// shuffled by seed. Throws InsufficientNegatives(strategy).
SampleSet AssembleTrainingSet(const std::vector<SamplePoint>& positives,
                              const NegativePools& negatives, Mix mix,
                              std::uint64_t seed,
                              const HybridWeights& weights = kEqualQuarters);

// Balanced evaluation set: the given positives plus as many negatives of
// `strategy`, drawn from the pool after removing `exclude` ids.
SampleSet AssembleEvaluationSet(const std::vector<SamplePoint>& positives,
                                const std::vector<SamplePoint>& pool,
                                const std::set<SampleId>& exclude, std::uint64_t seed);

// Stratified by label; each class contributes round(fraction * class size)
// test points. Points keep their relative order within each part.
std::pair<SampleSet, SampleSet> SplitTrainTest(const SampleSet& set,
                                               double test_fraction,
                                               std::uint64_t seed);

// (outside, inside) partition by containment in `region`.
std::pair<SampleSet, SampleSet> SplitByRegion(const SampleSet& set,
                                              const PolygonFeature& region);

// Lattice at `spacing` meters over the region's local frame, keeping points
// inside the region. Labels follow hazard containment.
std::vector<SamplePoint> SampleEvaluationGrid(const PolygonFeature& region,
                                              double spacing_m,
                                              const std::vector<PolygonFeature>& hazards);

// CSV: id,lon,lat,label,strategy,source_polygon_id
void WriteSampleCsv(const std::filesystem::path& path, const SampleSet& set);
SampleSet ReadSampleCsv(const std::filesystem::path& path);

}  // namespace deskaid
