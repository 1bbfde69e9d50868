// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Binary classification metrics and feature diagnostics.

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "deskaid/features.hpp"
#include "deskaid/models.hpp"

namespace deskaid {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the first point
};

struct EvalReport {
  double threshold = 0.5;
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> per_class;  // [clear, hazard]
  double macro_f1 = 0.0;
  // confusion[actual][predicted]
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::size_t n_test = 0;
  double positive_fraction = 0.0;
  std::vector<RocPoint> roc;  // empty when only one class is present
  double auc = 0.0;
  bool has_roc = false;
};

// Predicts hazard when p >= threshold. A class with no predicted and no
// actual members has F1 = 0. Throws LengthMismatch.
EvalReport ClassificationReport(const Eigen::VectorXd& labels, const Eigen::VectorXd& probs,
                                double threshold = 0.5);

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Threshold sweep over distinct scores, tied scores in one step, AUC by the
// trapezoidal rule. Throws SingleClassData.
RocCurve RocAuc(const Eigen::VectorXd& labels, const Eigen::VectorXd& probs);

// Classification report plus ROC when both classes are present.
EvalReport Evaluate(const Eigen::VectorXd& labels, const Eigen::VectorXd& probs,
                    double threshold = 0.5);

// Pearson correlation of the columns. Constant columns get 0 off the
// diagonal. Throws TooFewRows below two rows.
Eigen::MatrixXd CorrelationMatrix(const Eigen::MatrixXd& X);
// Feature columns (categoricals as indices) and optionally the label last.
Eigen::MatrixXd CorrelationMatrix(const LabeledMatrix& m, bool include_label);

// VIF_j = 1 / (1 - R_j^2) from regressing column j on the others plus an
// intercept; +inf when R_j^2 >= 1 - 1e-12. Throws ConstantColumn(name) or
// TooFewRows (needs p + 2 rows).
Eigen::VectorXd Vif(const Eigen::MatrixXd& X, const std::vector<std::string>& names);
Eigen::VectorXd Vif(const LabeledMatrix& m);

struct NamedImportance {
  std::string name;
  double importance = 0.0;
};

// Forest importances sorted descending, ties in schema order. Throws
// UnsupportedModelKind for other kinds.
std::vector<NamedImportance> FeatureImportance(const TrainedModel& model);

std::string ReportToJson(const EvalReport& report);
void WriteRocCsv(const std::filesystem::path& path, const std::vector<RocPoint>& roc);

}  // namespace deskaid
