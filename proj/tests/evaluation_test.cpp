// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>
#include <json.hpp>

#include "deskaid/evaluation.hpp"
#include "test_support.hpp"

namespace deskaid {
namespace {

using testing::CodeOf;

// Probability that a random positive outranks a random negative, ties half.
double PairwiseAuc(const Eigen::VectorXd& y, const Eigen::VectorXd& p) {
  double wins = 0, pairs = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      wins += p[i] > p[j] ? 1.0 : (p[i] == p[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

TEST(RocAuc, MatchesPairCountingWithTies) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = MakeRng(seed, 3);
    const Eigen::Index n = 150;
    Eigen::VectorXd y(n), p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y[i] = Uniform01(rng) < 0.4 ? 1 : 0;
      p[i] = std::round(10 * (0.3 * y[i] + 0.7 * Uniform01(rng))) / 10;  // heavy ties
    }
    const RocCurve roc = RocAuc(y, p);
    EXPECT_NEAR(roc.auc, PairwiseAuc(y, p), 1e-12);
    EXPECT_EQ(roc.points.front().fpr, 0.0);
    EXPECT_EQ(roc.points.front().tpr, 0.0);
    EXPECT_TRUE(std::isinf(roc.points.front().threshold));
    EXPECT_EQ(roc.points.back().fpr, 1.0);
    EXPECT_EQ(roc.points.back().tpr, 1.0);
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
      EXPECT_GE(roc.points[k].fpr, roc.points[k - 1].fpr);
      EXPECT_GE(roc.points[k].tpr, roc.points[k - 1].tpr);
      EXPECT_LT(roc.points[k].threshold, roc.points[k - 1].threshold);
    }
  }
}

TEST(RocAuc, PerfectAndSingleClass) {
  Eigen::VectorXd y(4), p(4);
  y << 0, 0, 1, 1;
  p << 0.1, 0.2, 0.8, 0.9;
  EXPECT_EQ(RocAuc(y, p).auc, 1.0);
  EXPECT_EQ(RocAuc(y, Eigen::VectorXd::Constant(4, 0.5)).auc, 0.5);
  EXPECT_EQ(CodeOf([&] { RocAuc(Eigen::VectorXd::Ones(4), p); }), ErrorCode::kSingleClassData);
}

TEST(ClassificationReport, ConfusionAndF1ByHand) {
  Eigen::VectorXd y(8), p(8);
  y << 1, 1, 1, 0, 0, 0, 0, 0;
  p << 0.9, 0.5, 0.2, 0.7, 0.1, 0.3, 0.49, 0.0;
  const EvalReport r = ClassificationReport(y, p);
  // Hazard: TP 2, FN 1, FP 1. Clear: TP 4, FN 1, FP 1.
  EXPECT_EQ(r.confusion[1][1], 2u);
  EXPECT_EQ(r.confusion[1][0], 1u);
  EXPECT_EQ(r.confusion[0][1], 1u);
  EXPECT_EQ(r.confusion[0][0], 4u);
  EXPECT_DOUBLE_EQ(r.per_class[1].precision, 2.0 / 3);
  EXPECT_DOUBLE_EQ(r.per_class[1].recall, 2.0 / 3);
  EXPECT_DOUBLE_EQ(r.per_class[0].f1, 0.8);
  EXPECT_DOUBLE_EQ(r.macro_f1, (2.0 / 3 + 0.8) / 2);
  EXPECT_DOUBLE_EQ(r.accuracy, 6.0 / 8);
  EXPECT_EQ(r.per_class[1].support, 3u);
  EXPECT_EQ(r.n_test, 8u);
  EXPECT_DOUBLE_EQ(r.positive_fraction, 3.0 / 8);
}

TEST(ClassificationReport, EmptyClassHasZeroF1AndLengthsChecked) {
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(4);
  const EvalReport r = ClassificationReport(y, Eigen::VectorXd::Constant(4, 0.1));
  EXPECT_EQ(r.per_class[1].f1, 0.0);
  EXPECT_EQ(r.per_class[0].f1, 1.0);
  EXPECT_EQ(CodeOf([&] { ClassificationReport(y, Eigen::VectorXd::Zero(3)); }),
            ErrorCode::kLengthMismatch);
  const EvalReport e = Evaluate(y, Eigen::VectorXd::Constant(4, 0.1));
  EXPECT_FALSE(e.has_roc);
}

TEST(CorrelationMatrix, MatchesPearsonByHand) {
  Rng rng = MakeRng(4, 0);
  Eigen::MatrixXd X(50, 4);
  for (Eigen::Index i = 0; i < 50; ++i) {
    X(i, 0) = StandardNormal(rng);
    X(i, 1) = 2 * X(i, 0) + StandardNormal(rng);
    X(i, 2) = StandardNormal(rng);
    X(i, 3) = 7.0;
  }
  const Eigen::MatrixXd c = CorrelationMatrix(X);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double ma = X.col(a).mean(), mb = X.col(b).mean();
      double sab = 0, saa = 0, sbb = 0;
      for (Eigen::Index i = 0; i < 50; ++i) {
        sab += (X(i, a) - ma) * (X(i, b) - mb);
        saa += (X(i, a) - ma) * (X(i, a) - ma);
        sbb += (X(i, b) - mb) * (X(i, b) - mb);
      }
      EXPECT_NEAR(c(a, b), sab / std::sqrt(saa * sbb), 1e-12);
    }
  }
  EXPECT_EQ(c(3, 0), 0.0);
  EXPECT_EQ(c(3, 3), 1.0);
  EXPECT_EQ(CodeOf([] { CorrelationMatrix(Eigen::MatrixXd::Ones(1, 3)); }), ErrorCode::kTooFewRows);
}

TEST(Vif, MatchesNormalEquations) {
  Rng rng = MakeRng(5, 0);
  const Eigen::Index n = 80, p = 4;
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = StandardNormal(rng);
    X(i, 1) = StandardNormal(rng);
    X(i, 2) = X(i, 0) - 0.5 * X(i, 1) + 0.3 * StandardNormal(rng);
    X(i, 3) = 100 + 5 * StandardNormal(rng);
  }
  const Eigen::VectorXd v = Vif(X, {"a", "b", "c", "d"});
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::MatrixXd A(n, p);
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < p; ++c) {
      if (c != j) A.col(k++) = X.col(c);
    }
    A.col(p - 1).setOnes();
    const Eigen::VectorXd beta = (A.transpose() * A).ldlt().solve(A.transpose() * X.col(j));
    const Eigen::VectorXd resid = X.col(j) - A * beta;
    const double tss = (X.col(j).array() - X.col(j).mean()).square().sum();
    const double r2 = 1 - resid.squaredNorm() / tss;
    EXPECT_NEAR(v[j], 1 / (1 - r2), 1e-8) << j;
  }
  EXPECT_GT(v[2], 5.0);
}

TEST(Vif, Errors) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 3);
  X.col(1).setConstant(2);
  try {
    Vif(X, {"a", "flat", "c"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConstantColumn);
    EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
  }
  EXPECT_EQ(CodeOf([] { Vif(Eigen::MatrixXd::Random(4, 3), {"a", "b", "c"}); }),
            ErrorCode::kTooFewRows);
  Eigen::MatrixXd collinear = Eigen::MatrixXd::Random(10, 2);
  collinear.col(1) = 3 * collinear.col(0);
  EXPECT_TRUE(std::isinf(Vif(collinear, {"a", "b"})[0]));
}

TEST(ReportToJson, CarriesMetrics) {
  Eigen::VectorXd y(4), p(4);
  y << 0, 1, 0, 1;
  p << 0.2, 0.7, 0.6, 0.9;
  const EvalReport r = Evaluate(y, p);
  const auto doc = nlohmann::json::parse(ReportToJson(r));
  EXPECT_DOUBLE_EQ(doc.at("accuracy").get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(doc.at("auc").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(doc.at("macro_f1").get<double>(), r.macro_f1);
}

}  // namespace
}  // namespace deskaid
