// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <Eigen/QR>
#include <json.hpp>

namespace deskaid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void CheckLengths(const Eigen::VectorXd& labels, const Eigen::VectorXd& probs) {
  if (labels.size() != probs.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(labels.size()) + " labels vs " +
                                                std::to_string(probs.size()) + " scores");
  }
  if (labels.size() == 0) throw Error(ErrorCode::kLengthMismatch, "no predictions");
}

double Ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

}  // namespace

EvalReport ClassificationReport(const Eigen::VectorXd& labels, const Eigen::VectorXd& probs,
                                double threshold) {
  CheckLengths(labels, probs);
  EvalReport r;
  r.threshold = threshold;
  r.n_test = static_cast<std::size_t>(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const int actual = labels[i] > 0.5 ? 1 : 0;
    const int predicted = probs[i] >= threshold ? 1 : 0;
    ++r.confusion[actual][predicted];
  }
  const double n = static_cast<double>(r.n_test);
  r.accuracy = static_cast<double>(r.confusion[0][0] + r.confusion[1][1]) / n;
  for (int c = 0; c < 2; ++c) {
    const double tp = static_cast<double>(r.confusion[c][c]);
    const double actual = static_cast<double>(r.confusion[c][0] + r.confusion[c][1]);
    const double predicted = static_cast<double>(r.confusion[0][c] + r.confusion[1][c]);
    ClassMetrics& m = r.per_class[c];
    m.support = static_cast<std::size_t>(actual);
    m.precision = Ratio(tp, predicted);
    m.recall = Ratio(tp, actual);
    m.f1 = Ratio(2 * m.precision * m.recall, m.precision + m.recall);
  }
  r.macro_f1 = (r.per_class[0].f1 + r.per_class[1].f1) / 2;
  r.positive_fraction = static_cast<double>(r.per_class[1].support) / n;
  return r;
}

RocCurve RocAuc(const Eigen::VectorXd& labels, const Eigen::VectorXd& probs) {
  CheckLengths(labels, probs);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(labels.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return probs[a] > probs[b] || (probs[a] == probs[b] && a < b);
  });
  double pos = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) pos += labels[i] > 0.5 ? 1 : 0;
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorCode::kSingleClassData, "ROC needs both classes");
  }
  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double score = probs[order[k]];
    for (; k < order.size() && probs[order[k]] == score; ++k) {
      (labels[order[k]] > 0.5 ? tp : fp) += 1;
    }
    const RocPoint prev = curve.points.back();
    RocPoint pt{fp / neg, tp / pos, score};
    curve.auc += (pt.fpr - prev.fpr) * (pt.tpr + prev.tpr) / 2;
    curve.points.push_back(pt);
  }
  return curve;
}

EvalReport Evaluate(const Eigen::VectorXd& labels, const Eigen::VectorXd& probs,
                    double threshold) {
  EvalReport r = ClassificationReport(labels, probs, threshold);
  if (r.per_class[0].support > 0 && r.per_class[1].support > 0) {
    RocCurve c = RocAuc(labels, probs);
    r.roc = std::move(c.points);
    r.auc = c.auc;
    r.has_roc = true;
  }
  return r;
}

Eigen::MatrixXd CorrelationMatrix(const Eigen::MatrixXd& X) {
  if (X.rows() < 2) throw Error(ErrorCode::kTooFewRows, "correlation needs at least two rows");
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mean;
  const Eigen::VectorXd norms = centered.colwise().norm().transpose();
  const Eigen::Index p = X.cols();
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    if (norms[a] == 0) {
      Log(LogLevel::kWarning, "correlation: column " + std::to_string(a) + " is constant");
      continue;
    }
    for (Eigen::Index b = a + 1; b < p; ++b) {
      if (norms[b] == 0) continue;
      const double c = centered.col(a).dot(centered.col(b)) / (norms[a] * norms[b]);
      corr(a, b) = corr(b, a) = std::clamp(c, -1.0, 1.0);
    }
  }
  return corr;
}

Eigen::MatrixXd CorrelationMatrix(const LabeledMatrix& m, bool include_label) {
  if (!include_label) return CorrelationMatrix(m.X);
  Eigen::MatrixXd A(m.rows(), m.X.cols() + 1);
  A << m.X, m.labels;
  return CorrelationMatrix(A);
}

Eigen::VectorXd Vif(const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (n < p + 2) {
    throw Error(ErrorCode::kTooFewRows, "VIF needs at least " + std::to_string(p + 2) + " rows");
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    if ((X.col(j).array() == X(0, j)).all()) {
      throw Error(ErrorCode::kConstantColumn,
                  static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                             : std::to_string(j));
    }
  }
  Eigen::VectorXd out(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::MatrixXd A(n, p);
    A.col(0).setOnes();
    Eigen::Index k = 1;
    for (Eigen::Index c = 0; c < p; ++c) {
      if (c != j) A.col(k++) = X.col(c);
    }
    const Eigen::VectorXd y = X.col(j);
    const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(y);
    const double ssr = (y - A * beta).squaredNorm();
    const double sst = (y.array() - y.mean()).square().sum();
    const double r2 = 1.0 - ssr / sst;
    out[j] = r2 >= 1.0 - 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
  }
  return out;
}

Eigen::VectorXd Vif(const LabeledMatrix& m) { return Vif(m.X, m.schema.Names()); }

std::vector<NamedImportance> FeatureImportance(const TrainedModel& model) {
  const auto* forest = std::get_if<ForestParams>(&model.params);
  if (model.kind != ModelKind::kRandomForest || !forest) {
    throw Error(ErrorCode::kUnsupportedModelKind,
                "feature importance needs RF, got " + std::string(ModelKindName(model.kind)));
  }
  std::vector<NamedImportance> out;
  for (Eigen::Index j = 0; j < forest->importance.size(); ++j) {
    const auto r = static_cast<std::size_t>(j);
    out.push_back({r < model.feature_names.size() ? model.feature_names[r] : std::to_string(j),
                   forest->importance[j]});
  }
  std::stable_sort(out.begin(), out.end(), [](const NamedImportance& a, const NamedImportance& b) {
    return a.importance > b.importance;
  });
  return out;
}

std::string ReportToJson(const EvalReport& r) {
  json j;
  j["threshold"] = r.threshold;
  j["n_test"] = r.n_test;
  j["positive_fraction"] = r.positive_fraction;
  j["accuracy"] = r.accuracy;
  j["macro_f1"] = r.macro_f1;
  const char* names[2] = {"clear", "hazard"};
  for (int c = 0; c < 2; ++c) {
    j["per_class"][names[c]] = {{"precision", r.per_class[c].precision},
                                {"recall", r.per_class[c].recall},
                                {"f1", r.per_class[c].f1},
                                {"support", r.per_class[c].support}};
  }
  j["confusion"] = {{"actual_clear", {{"predicted_clear", r.confusion[0][0]},
                                      {"predicted_hazard", r.confusion[0][1]}}},
                    {"actual_hazard", {{"predicted_clear", r.confusion[1][0]},
                                       {"predicted_hazard", r.confusion[1][1]}}}};
  if (r.has_roc) {
    j["auc"] = r.auc;
  } else {
    j["auc"] = nullptr;
  }
  return j.dump(2) + "\n";
}

void WriteRocCsv(const fs::path& path, const std::vector<RocPoint>& roc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "threshold,fpr,tpr\n";
  for (const auto& p : roc) {
    out << FormatDouble(p.threshold) << ',' << FormatDouble(p.fpr) << ',' << FormatDouble(p.tpr)
        << '\n';
  }
}

}  // namespace deskaid
