// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "deskaid/models.hpp"
#include "models_internal.hpp"

namespace deskaid {

using internal::RequireBothClasses;
using internal::Shell;

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogistic: return "LR";
    case ModelKind::kRandomForest: return "RF";
    case ModelKind::kGradientBoosting: return "GBT";
    case ModelKind::kFnn: return "FNN";
    case ModelKind::kGcnn: return "GCNN";
    case ModelKind::kGcnnWeighted: return "GCNN_weighted";
  }
  return "?";
}

ModelKind ParseModelKind(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (ModelKind k : {ModelKind::kLogistic, ModelKind::kRandomForest,
                      ModelKind::kGradientBoosting, ModelKind::kFnn, ModelKind::kGcnn,
                      ModelKind::kGcnnWeighted}) {
    std::string candidate(ModelKindName(k));
    for (char& c : candidate) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (candidate == lower) return k;
  }
  throw Error(ErrorCode::kConfig, "unknown model kind '" + std::string(name) + "'");
}

InputEncoder InputEncoder::Fit(const Eigen::MatrixXd& X, const FeatureSchema& schema) {
  if (static_cast<std::size_t>(X.cols()) != schema.size()) {
    throw Error(ErrorCode::kSchemaMismatch, "matrix width differs from schema");
  }
  InputEncoder enc;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    if (schema.IsCategorical(j)) {
      enc.categorical.push_back(col);
      enc.cardinality.push_back(
          std::max<Eigen::Index>(1, static_cast<Eigen::Index>(schema.features[j].vocabulary.size())));
    } else {
      enc.continuous.push_back(col);
    }
  }
  const auto nc = static_cast<Eigen::Index>(enc.continuous.size());
  enc.mean = Eigen::VectorXd::Zero(nc);
  enc.stddev = Eigen::VectorXd::Ones(nc);
  if (X.rows() > 0) {
    for (Eigen::Index k = 0; k < nc; ++k) {
      const auto col = X.col(enc.continuous[static_cast<std::size_t>(k)]);
      const double mu = col.mean();
      const double sd = std::sqrt((col.array() - mu).square().mean());
      enc.mean[k] = mu;
      enc.stddev[k] = sd > 0 ? sd : 1.0;
    }
  }
  return enc;
}

Eigen::Index InputEncoder::width() const {
  Eigen::Index w = static_cast<Eigen::Index>(continuous.size());
  for (Eigen::Index c : cardinality) w += c;
  return w;
}

Eigen::MatrixXd InputEncoder::Encode(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(X.rows(), width());
  for (std::size_t k = 0; k < continuous.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    Z.col(kk) = (X.col(continuous[k]).array() - mean[kk]) / stddev[kk];
  }
  Eigen::Index offset = static_cast<Eigen::Index>(continuous.size());
  for (std::size_t c = 0; c < categorical.size(); ++c) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      auto idx = static_cast<Eigen::Index>(std::llround(X(i, categorical[c])));
      if (idx < 0 || idx >= cardinality[c]) idx = 0;
      Z(i, offset + idx) = 1.0;
    }
    offset += cardinality[c];
  }
  return Z;
}

TrainedModel TrainLogistic(const LabeledMatrix& m, const TrainConfig& cfg) {
  RequireBothClasses(m.labels);
  const LogisticConfig& lc = cfg.logistic;
  LogisticParams params;
  params.encoder = InputEncoder::Fit(m.X, m.schema);
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd A(n, params.encoder.width() + 1);
  A.leftCols(A.cols() - 1) = params.encoder.Encode(m.X);
  A.col(A.cols() - 1).setOnes();

  // The log-loss Hessian is bounded by A^T A / (4 n).
  const Eigen::MatrixXd gram = A.transpose() * A / static_cast<double>(n);
  const double lipschitz =
      0.25 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly)
                 .eigenvalues()
                 .maxCoeff();
  const double step = lipschitz > 0 ? 1.0 / lipschitz : 1.0;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(A.cols());
  int it = 0;
  for (; it < lc.max_iterations; ++it) {
    const Eigen::VectorXd z = A * w;
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = nn::Sigmoid(z[i]) - m.labels[i];
    const Eigen::VectorXd g = A.transpose() * r / static_cast<double>(n);
    if (!g.allFinite()) throw Error(ErrorCode::kNonFinite, "logistic gradient is not finite");
    if (g.norm() < lc.gradient_tolerance) break;
    w -= step * g;
  }
  if (!w.allFinite()) throw Error(ErrorCode::kNonFinite, "logistic coefficients are not finite");
  params.weights = w.head(w.size() - 1);
  params.intercept = w[w.size() - 1];
  params.iterations = it;

  TrainedModel model = Shell(ModelKind::kLogistic, m.schema, cfg);
  model.params = std::move(params);
  return model;
}

TrainedModel Train(ModelKind kind, const LabeledMatrix& m, const TrainConfig& cfg) {
  switch (kind) {
    case ModelKind::kLogistic: return TrainLogistic(m, cfg);
    case ModelKind::kRandomForest: return TrainRandomForest(m, cfg);
    case ModelKind::kGradientBoosting: return TrainGradientBoosting(m, cfg);
    case ModelKind::kFnn: return TrainFnn(m, cfg);
    default:
      throw Error(ErrorCode::kUnsupportedModelKind,
                  std::string(ModelKindName(kind)) + " trains on a graph, not a matrix");
  }
}

Eigen::VectorXd PredictProba(const TrainedModel& model, const LabeledMatrix& m) {
  if (model.schema_fingerprint != m.schema.Fingerprint()) {
    throw Error(ErrorCode::kSchemaMismatch, "model was trained on a different feature schema");
  }
  const Eigen::Index n = m.rows();
  Eigen::VectorXd out(n);
  switch (model.kind) {
    case ModelKind::kLogistic: {
      const auto& p = std::get<LogisticParams>(model.params);
      const Eigen::VectorXd z = p.encoder.Encode(m.X) * p.weights;
      for (Eigen::Index i = 0; i < n; ++i) out[i] = nn::Sigmoid(z[i] + p.intercept);
      break;
    }
    case ModelKind::kRandomForest: {
      const auto& p = std::get<ForestParams>(model.params);
      ParallelFor(static_cast<std::size_t>(n), [&](std::size_t r) {
        const auto i = static_cast<Eigen::Index>(r);
        double s = 0;
        for (const auto& t : p.trees) s += t.Predict(m.X.row(i));
        out[i] = s / static_cast<double>(p.trees.size());
      });
      break;
    }
    case ModelKind::kGradientBoosting: {
      const auto& p = std::get<BoostingParams>(model.params);
      for (Eigen::Index i = 0; i < n; ++i) {
        double s = p.base_score;
        for (const auto& t : p.trees) s += p.learning_rate * t.Predict(m.X.row(i));
        out[i] = nn::Sigmoid(s);
      }
      break;
    }
    case ModelKind::kFnn: {
      const auto& p = std::get<NeuralParams>(model.params);
      const Eigen::VectorXd z = nn::Forward<double>(p.network, p.encoder.Encode(m.X), nullptr);
      for (Eigen::Index i = 0; i < n; ++i) out[i] = nn::Sigmoid(z[i]);
      break;
    }
    default:
      throw Error(ErrorCode::kUnsupportedModelKind,
                  std::string(ModelKindName(model.kind)) + " predicts on a graph");
  }
  return out;
}

Eigen::VectorXd PredictProba(const TrainedModel& model, const GeoGraph& g,
                             const FeatureSchema& schema) {
  if (!IsGraphKind(model.kind)) {
    throw Error(ErrorCode::kUnsupportedModelKind,
                std::string(ModelKindName(model.kind)) + " does not take a graph");
  }
  if (model.schema_fingerprint != schema.Fingerprint()) {
    throw Error(ErrorCode::kSchemaMismatch, "model was trained on a different feature schema");
  }
  const auto& p = std::get<NeuralParams>(model.params);
  const auto adj =
      NormalizedAdjacency(g, model.kind == ModelKind::kGcnnWeighted, p.sigma);
  const Eigen::VectorXd z = nn::Forward<double>(p.network, p.encoder.Encode(g.node_features), &adj);
  Eigen::VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = nn::Sigmoid(z[i]);
  return out;
}

double MedianEdgeDistance(const GeoGraph& g) {
  std::vector<double> d;
  for (Eigen::Index e = 0; e < g.num_edges(); ++e) {
    if (g.edges(0, e) != g.edges(1, e)) d.push_back(g.weights[e]);
  }
  if (d.empty()) return 1.0;
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double median = d[mid];
  if (d.size() % 2 == 0) {
    median = (median + *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid))) / 2;
  }
  return median > 0 ? median : 1.0;
}

nn::SparseMatrix<double> NormalizedAdjacency(const GeoGraph& g, bool weighted, double sigma) {
  const Eigen::Index n = g.num_nodes();
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(n);
  std::vector<double> raw(static_cast<std::size_t>(g.num_edges()));
  for (Eigen::Index e = 0; e < g.num_edges(); ++e) {
    const double w = weighted ? 1.0 / (1.0 + g.weights[e] / sigma) : 1.0;
    raw[static_cast<std::size_t>(e)] = w;
    row_sum[g.edges(0, e)] += w;
  }
  triplets.reserve(raw.size());
  for (Eigen::Index e = 0; e < g.num_edges(); ++e) {
    const Eigen::Index s = g.edges(0, e);
    triplets.emplace_back(s, g.edges(1, e), raw[static_cast<std::size_t>(e)] / row_sum[s]);
  }
  nn::SparseMatrix<double> adj(n, n);
  adj.setFromTriplets(triplets.begin(), triplets.end());
  return adj;
}

}  // namespace deskaid
