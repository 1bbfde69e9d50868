// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Location-based k-NN graph over sample points.

#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "deskaid/features.hpp"

namespace deskaid {

using EdgeList = Eigen::Matrix<Eigen::Index, 2, Eigen::Dynamic>;

struct GeoGraph {
  Eigen::MatrixXd node_features;  // one row per node
  EdgeList edges;                 // row 0 source, row 1 target
  Eigen::VectorXd weights;        // great-circle meters per edge; 0 on self-loops
  Eigen::VectorXd labels;
  std::vector<SampleId> ids;
  std::vector<GeoPoint> locations;

  Eigen::Index num_nodes() const { return node_features.rows(); }
  Eigen::Index num_edges() const { return edges.cols(); }
};

// Directed edges from each node to its k nearest others (ties by node index),
// made symmetric, plus one self-loop per node; sorted by (source, target).
// Throws TooFewNodes unless there are more than k nodes.
GeoGraph BuildKnnGraph(const std::vector<GeoPoint>& locations,
                       const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                       std::size_t k = 5);
GeoGraph BuildKnnGraph(const LabeledMatrix& m, std::size_t k = 5);

// Writes <prefix>_nodes.csv, <prefix>_edges.csv and <prefix>_weights.csv.
void WriteGraph(const std::filesystem::path& prefix, const GeoGraph& g);

}  // namespace deskaid
