// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Config-driven stages behind the deskaid CLI. Every stage reads and writes
// files under PipelineConfig::out_dir so stages can run independently.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deskaid/features.hpp"
#include "deskaid/models.hpp"
#include "deskaid/riskmap.hpp"
#include "deskaid/sampling.hpp"
#include "deskaid/synthworld.hpp"

namespace deskaid {

struct PipelineConfig {
  std::filesystem::path out_dir = "out";
  std::filesystem::path world_dir;  // synth target; default out_dir/world
  std::filesystem::path catalog;    // default world_dir/catalog.json
  WorldConfig world;

  std::uint64_t seed = 42;
  std::uint64_t sampling_seed = 42;
  std::uint64_t split_seed = 42;

  Mix mix = Mix::kRandom;
  HybridWeights hybrid_weights = kEqualQuarters;
  int positives_per_polygon = 2;
  int hard_negatives_per_polygon = 2;
  double random_pool_factor = 2.0;  // random negatives drawn per positive
  std::vector<Strategy> evaluation_sets = {Strategy::kRandom, Strategy::kHn50};
  double test_fraction = 0.25;
  std::optional<std::filesystem::path> split_region;  // overrides test_fraction

  FeatureSet feature_set = FeatureSet::kExpanded18;
  bool densify_lines = false;

  ModelKind model = ModelKind::kRandomForest;
  TrainConfig train;
  std::size_t graph_k = 5;

  std::optional<std::filesystem::path> target_region;  // default world study area
  double grid_spacing_m = 500.0;
  BandThresholds thresholds = kDefaultThresholds;

  bool force = false;
};

// Parses a config document. Relative paths resolve against `base_dir`.
// Unknown keys and invalid enumerations throw Config.
PipelineConfig ParsePipelineConfig(const nlohmann::json& doc,
                                   const std::filesystem::path& base_dir);
PipelineConfig LoadPipelineConfig(const std::filesystem::path& path,
                                  const std::vector<std::string>& overrides = {});

// Applies `a.b.c=value` to a document; value is JSON when it parses,
// otherwise a string.
void ApplyOverride(nlohmann::json& doc, const std::string& assignment);

nlohmann::json PipelineConfigToJson(const PipelineConfig& cfg);

// Standard artifact locations.
struct ArtifactPaths {
  std::filesystem::path root;
  std::filesystem::path samples() const { return root / "samples"; }
  std::filesystem::path features() const { return root / "features"; }
  std::filesystem::path models() const { return root / "models"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path predictions() const { return root / "predictions"; }
  std::filesystem::path riskmap() const { return root / "riskmap"; }
  std::filesystem::path logs() const { return root / "logs"; }
  std::filesystem::path model_file() const { return models() / "model.json"; }
};

// Stage entry points. Each returns a JSON object listing inputs and outputs.
nlohmann::json RunSynth(const PipelineConfig& cfg);
nlohmann::json RunSample(const PipelineConfig& cfg);
nlohmann::json RunFeaturize(const PipelineConfig& cfg);
nlohmann::json RunTrain(const PipelineConfig& cfg);
nlohmann::json RunEvaluate(const PipelineConfig& cfg);
nlohmann::json RunPredict(const PipelineConfig& cfg);
nlohmann::json RunRiskmap(const PipelineConfig& cfg);
nlohmann::json RunReport(const PipelineConfig& cfg);

// Predictions for the rows of `query`. Graph models build a k-NN graph over
// the training rows and the query rows together.
Eigen::VectorXd PredictRows(const TrainedModel& model, const LabeledMatrix& train,
                            const LabeledMatrix& query, std::size_t graph_k);

// Trains `kind` on `train`; graph kinds get a k-NN graph over `train`.
TrainedModel TrainOn(ModelKind kind, const LabeledMatrix& train, const TrainConfig& cfg,
                     std::size_t graph_k);

// 0 success, 2 config or validation, 3 data, 4 internal.
int ExitCodeFor(ErrorCode code);

}  // namespace deskaid
