// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Classifiers with a common train / predict-probability contract.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "deskaid/features.hpp"
#include "deskaid/geo_graph.hpp"
#include "deskaid/neural.hpp"

namespace deskaid {

enum class ModelKind { kLogistic, kRandomForest, kGradientBoosting, kFnn, kGcnn, kGcnnWeighted };

std::string_view ModelKindName(ModelKind kind);
ModelKind ParseModelKind(std::string_view name);
inline bool IsGraphKind(ModelKind k) {
  return k == ModelKind::kGcnn || k == ModelKind::kGcnnWeighted;
}

struct LogisticConfig {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-8;
};

struct ForestConfig {
  int trees = 200;
  int max_depth = 0;  // 0: grow to purity
  int mtry = 0;       // 0: ceil(sqrt(p))
  int min_leaf = 1;
  bool bootstrap = true;
};

struct BoostingConfig {
  int rounds = 200;
  int max_depth = 3;
  double learning_rate = 0.1;
};

struct NeuralConfig {
  std::vector<int> hidden = {64, 32};  // FNN layers; GCNN head uses the tail
  int graph_width = 64;
  int graph_layers = 2;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  int batch_size = 128;
  int max_epochs = 500;
  int patience = 50;
  double validation_fraction = 0.15;
};

struct TrainConfig {
  std::uint64_t seed = 0;
  LogisticConfig logistic;
  ForestConfig forest;
  BoostingConfig boosting;
  NeuralConfig neural;
};

// z-scores continuous columns and one-hot expands categoricals (continuous
// block first, then one block per categorical in schema order).
struct InputEncoder {
  std::vector<Eigen::Index> continuous;
  Eigen::VectorXd mean, stddev;
  std::vector<Eigen::Index> categorical;
  std::vector<Eigen::Index> cardinality;

  static InputEncoder Fit(const Eigen::MatrixXd& X, const FeatureSchema& schema);
  Eigen::Index width() const;
  Eigen::MatrixXd Encode(const Eigen::MatrixXd& X) const;
};

struct LogisticParams {
  InputEncoder encoder;
  Eigen::VectorXd weights;
  double intercept = 0.0;
  int iterations = 0;
};

// Flat binary tree; a node is a leaf when feature < 0. Rows go left when
// x[feature] <= threshold.
struct Tree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left, right;
  std::vector<double> value;

  std::size_t size() const { return feature.size(); }
  double Predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct ForestParams {
  std::vector<Tree> trees;
  Eigen::VectorXd importance;  // mean decrease in impurity, sums to 1
};

struct BoostingParams {
  double base_score = 0.0;  // log-odds of the base rate
  double learning_rate = 0.1;
  std::vector<Tree> trees;
};

struct NeuralParams {
  InputEncoder encoder;
  nn::Network<double> network;
  double sigma = 1.0;  // edge-distance scale for weighted graphs
  int epochs_run = 0;
  int best_epoch = 0;
  double best_validation_accuracy = 0.0;
};

struct TrainedModel {
  ModelKind kind = ModelKind::kLogistic;
  std::string schema_fingerprint;
  std::vector<std::string> feature_names;
  TrainConfig config;
  std::variant<LogisticParams, ForestParams, BoostingParams, NeuralParams> params;
};

// All trainers throw SingleClassData unless both labels are present.
TrainedModel TrainLogistic(const LabeledMatrix& m, const TrainConfig& cfg);
TrainedModel TrainRandomForest(const LabeledMatrix& m, const TrainConfig& cfg);
TrainedModel TrainGradientBoosting(const LabeledMatrix& m, const TrainConfig& cfg);
TrainedModel TrainFnn(const LabeledMatrix& m, const TrainConfig& cfg);
// Trains on nodes flagged in `train_mask`; the rest of the graph still feeds
// message passing.
TrainedModel TrainGcnn(const GeoGraph& g, const std::vector<bool>& train_mask,
                       const FeatureSchema& schema, const TrainConfig& cfg, bool weighted);

// Tabular kinds only.
TrainedModel Train(ModelKind kind, const LabeledMatrix& m, const TrainConfig& cfg);

// Tabular prediction. Throws SchemaMismatch or UnsupportedModelKind.
Eigen::VectorXd PredictProba(const TrainedModel& model, const LabeledMatrix& m);
// Graph prediction: one probability per node.
Eigen::VectorXd PredictProba(const TrainedModel& model, const GeoGraph& g,
                             const FeatureSchema& schema);

// Row-normalized adjacency with self-loops from the graph's edge list.
// Unweighted graphs use raw weight 1; weighted ones 1 / (1 + d / sigma).
nn::SparseMatrix<double> NormalizedAdjacency(const GeoGraph& g, bool weighted, double sigma);
// Median of non-self edge distances (1 when there are none or it is 0).
double MedianEdgeDistance(const GeoGraph& g);

// Decision-tree internals, exposed for tests.
struct TreeGrowth {
  int max_depth = 0;  // 0: unlimited
  int mtry = 0;       // 0: all features
  int min_leaf = 1;
};
// Gini classification tree on 0/1 labels; `counts` are per-row bootstrap
// multiplicities. Adds the impurity decrease of each split to `importance`.
Tree GrowClassificationTree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const std::vector<int>& counts, const TreeGrowth& growth,
                            Rng& rng, Eigen::VectorXd* importance);
// Squared-error regression tree on all features; leaves hold target means.
Tree GrowRegressionTree(const Eigen::MatrixXd& X, const Eigen::VectorXd& target,
                        int max_depth);

void SaveModel(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel LoadModel(const std::filesystem::path& path);
std::string ModelToJson(const TrainedModel& model);
TrainedModel ModelFromJson(const std::string& text);

}  // namespace deskaid
