// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// FNN and GCNN training: mini-batch AdamW with early stopping on validation
// accuracy.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deskaid/models.hpp"
#include "models_internal.hpp"

namespace deskaid {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kValidationStream = 2;
constexpr std::uint64_t kBatchStream = 3;

using Rows = std::vector<Eigen::Index>;

void CheckConfig(const NeuralConfig& nc) {
  if (nc.patience < 1) throw Error(ErrorCode::kConfig, "patience must be >= 1");
  if (!(nc.learning_rate > 0)) throw Error(ErrorCode::kConfig, "learning rate must be > 0");
  if (nc.batch_size < 1) throw Error(ErrorCode::kConfig, "batch size must be >= 1");
  if (nc.max_epochs < 1) throw Error(ErrorCode::kConfig, "max_epochs must be >= 1");
  if (!(nc.validation_fraction >= 0 && nc.validation_fraction < 1)) {
    throw Error(ErrorCode::kConfig, "validation fraction must lie in [0, 1)");
  }
}

// Splits candidate rows into (train, validation); order-independent.
std::pair<Rows, Rows> CarveValidation(Rows rows, double fraction, std::uint64_t seed) {
  std::sort(rows.begin(), rows.end());
  Rng rng = MakeRng(seed, kValidationStream);
  for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[UniformIndex(rng, i)]);
  const auto n_val = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(rows.size())));
  Rows val(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_val));
  Rows train(rows.begin() + static_cast<std::ptrdiff_t>(n_val), rows.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(val)};
}

double Accuracy(const Eigen::VectorXd& logits, const Eigen::VectorXd& labels, const Rows& rows) {
  std::size_t hit = 0;
  for (Eigen::Index r : rows) {
    const double pred = logits[r] >= 0 ? 1.0 : 0.0;
    if (pred == labels[r]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(rows.size());
}

// `batch_loss` computes the loss and gradient for a list of training rows.
// `all_logits` evaluates every row for accuracy.
template <typename BatchFn, typename LogitFn>
void Fit(nn::Network<double>& net, const Eigen::VectorXd& labels, const Rows& train,
         const Rows& val, const NeuralConfig& nc, std::uint64_t seed, BatchFn batch_loss,
         LogitFn all_logits, NeuralParams& out) {
  Eigen::VectorXd theta = nn::Flatten(net);
  nn::AdamW<double> opt(theta.size(), nc.learning_rate, nc.weight_decay);
  Rng rng = MakeRng(seed, kBatchStream);
  const Rows& monitor = val.empty() ? train : val;

  Eigen::VectorXd best_theta = theta;
  double best_acc = -1.0;
  int best_epoch = 0;
  int epoch = 0;
  Rows order = train;
  nn::Network<double> grad;
  while (epoch < nc.max_epochs) {
    ++epoch;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[UniformIndex(rng, i)]);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(nc.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(nc.batch_size));
      Rows batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                 order.begin() + static_cast<std::ptrdiff_t>(end));
      const double loss = batch_loss(net, batch, grad);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::kDiverged, "non-finite loss at epoch " + std::to_string(epoch));
      }
      opt.Step(theta, nn::Flatten(grad));
      nn::Unflatten(theta, net);
    }
    const double acc = Accuracy(all_logits(net), labels, monitor);
    if (acc > best_acc) {
      best_acc = acc;
      best_epoch = epoch;
      best_theta = theta;
    }
    if (epoch - best_epoch >= nc.patience) break;
  }
  nn::Unflatten(best_theta, net);
  out.network = net;
  out.epochs_run = epoch;
  out.best_epoch = best_epoch;
  out.best_validation_accuracy = best_acc;
}

}  // namespace

TrainedModel TrainFnn(const LabeledMatrix& m, const TrainConfig& cfg) {
  internal::RequireBothClasses(m.labels);
  const NeuralConfig& nc = cfg.neural;
  CheckConfig(nc);
  NeuralParams params;
  params.encoder = InputEncoder::Fit(m.X, m.schema);
  const Eigen::MatrixXd Z = params.encoder.Encode(m.X);

  Rows rows(static_cast<std::size_t>(m.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  auto [train, val] = CarveValidation(rows, nc.validation_fraction, cfg.seed);

  Rng init = MakeRng(cfg.seed, kInitStream);
  nn::Network<double> net = nn::MakeMlp<double>(Z.cols(), nc.hidden, init);
  auto batch_loss = [&](const nn::Network<double>& w, const Rows& batch,
                        nn::Network<double>& grad) {
    Eigen::MatrixXd xb(static_cast<Eigen::Index>(batch.size()), Z.cols());
    Eigen::VectorXd yb(static_cast<Eigen::Index>(batch.size()));
    Rows local(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      xb.row(kk) = Z.row(batch[k]);
      yb[kk] = m.labels[batch[k]];
      local[k] = kk;
    }
    return nn::LossAndGradient<double>(w, xb, nullptr, yb, local, grad);
  };
  auto all_logits = [&](const nn::Network<double>& w) {
    return nn::Forward<double>(w, Z, nullptr);
  };
  Fit(net, m.labels, train, val, nc, cfg.seed, batch_loss, all_logits, params);

  TrainedModel model = internal::Shell(ModelKind::kFnn, m.schema, cfg);
  model.params = std::move(params);
  return model;
}

TrainedModel TrainGcnn(const GeoGraph& g, const std::vector<bool>& train_mask,
                       const FeatureSchema& schema, const TrainConfig& cfg, bool weighted) {
  if (train_mask.size() != static_cast<std::size_t>(g.num_nodes())) {
    throw Error(ErrorCode::kLengthMismatch, "training mask length differs from node count");
  }
  const NeuralConfig& nc = cfg.neural;
  CheckConfig(nc);
  Rows rows;
  for (std::size_t i = 0; i < train_mask.size(); ++i) {
    if (train_mask[i]) rows.push_back(static_cast<Eigen::Index>(i));
  }
  Eigen::VectorXd masked_labels(static_cast<Eigen::Index>(rows.size()));
  Eigen::MatrixXd masked_features(static_cast<Eigen::Index>(rows.size()), g.node_features.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    masked_labels[static_cast<Eigen::Index>(k)] = g.labels[rows[k]];
    masked_features.row(static_cast<Eigen::Index>(k)) = g.node_features.row(rows[k]);
  }
  internal::RequireBothClasses(masked_labels);

  NeuralParams params;
  params.encoder = InputEncoder::Fit(masked_features, schema);
  params.sigma = MedianEdgeDistance(g);
  const Eigen::MatrixXd Z = params.encoder.Encode(g.node_features);
  const auto adj = NormalizedAdjacency(g, weighted, params.sigma);
  auto [train, val] = CarveValidation(rows, nc.validation_fraction, cfg.seed);

  Rng init = MakeRng(cfg.seed, kInitStream);
  const std::vector<int> head(nc.hidden.begin() + (nc.hidden.empty() ? 0 : 1), nc.hidden.end());
  nn::Network<double> net = nn::MakeGcnn<double>(Z.cols(), nc.graph_width, nc.graph_layers,
                                                 head, init);
  auto batch_loss = [&](const nn::Network<double>& w, const Rows& batch,
                        nn::Network<double>& grad) {
    return nn::LossAndGradient<double>(w, Z, &adj, g.labels, batch, grad);
  };
  auto all_logits = [&](const nn::Network<double>& w) {
    return nn::Forward<double>(w, Z, &adj);
  };
  Fit(net, g.labels, train, val, nc, cfg.seed, batch_loss, all_logits, params);

  TrainedModel model = internal::Shell(
      weighted ? ModelKind::kGcnnWeighted : ModelKind::kGcnn, schema, cfg);
  model.params = std::move(params);
  return model;
}

}  // namespace deskaid
