// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deskaid/models.hpp"

namespace deskaid::internal {

inline void RequireBothClasses(const Eigen::VectorXd& y) {
  if (y.size() < 2) throw Error(ErrorCode::kSingleClassData, "fewer than two rows");
  const double pos = y.sum();
  if (pos <= 0 || pos >= static_cast<double>(y.size())) {
    throw Error(ErrorCode::kSingleClassData, "training labels contain one class only");
  }
}

inline TrainedModel Shell(ModelKind kind, const FeatureSchema& schema, const TrainConfig& cfg) {
  TrainedModel model;
  model.kind = kind;
  model.schema_fingerprint = schema.Fingerprint();
  model.feature_names = schema.Names();
  model.config = cfg;
  return model;
}

}  // namespace deskaid::internal
