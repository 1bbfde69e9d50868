// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include "deskaid/models.hpp"

namespace deskaid::internal {

nlohmann::json TrainConfigToJson(const TrainConfig& cfg);
// Missing keys keep the values already in `cfg`; unknown keys are errors.
void MergeTrainConfig(const nlohmann::json& j, TrainConfig& cfg);

}  // namespace deskaid::internal
