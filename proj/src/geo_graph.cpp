// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/geo_graph.hpp"

#include <algorithm>
#include <fstream>

#include "deskaid/common.hpp"
#include "deskaid/spatial_index.hpp"

namespace deskaid {

namespace fs = std::filesystem;

GeoGraph BuildKnnGraph(const std::vector<GeoPoint>& locations,
                       const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                       std::size_t k) {
  const std::size_t n = locations.size();
  if (static_cast<std::size_t>(features.rows()) != n ||
      static_cast<std::size_t>(labels.size()) != n) {
    throw Error(ErrorCode::kLengthMismatch, "graph inputs disagree on node count");
  }
  if (n <= k) {
    throw Error(ErrorCode::kTooFewNodes, std::to_string(n) + " nodes for k=" + std::to_string(k));
  }
  std::vector<Hub> hubs(n);
  for (std::size_t i = 0; i < n; ++i) {
    hubs[i].location = locations[i];
    hubs[i].id = static_cast<HubId>(i);
  }
  const HubIndex index(std::move(hubs));

  std::vector<std::vector<Neighbor>> raw(n);
  ParallelFor(n, [&](std::size_t i) {
    raw[i] = index.Knn(locations[i], k, static_cast<HubId>(i));
  });

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(2 * n * k + n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    pairs.emplace_back(a, a);
    for (const auto& nb : raw[i]) {
      const auto b = static_cast<Eigen::Index>(nb.id);
      pairs.emplace_back(a, b);
      pairs.emplace_back(b, a);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  GeoGraph g;
  g.node_features = features;
  g.labels = labels;
  g.locations = locations;
  g.edges.resize(2, static_cast<Eigen::Index>(pairs.size()));
  g.weights.resize(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto [s, t] = pairs[e];
    const auto col = static_cast<Eigen::Index>(e);
    g.edges(0, col) = s;
    g.edges(1, col) = t;
    // Canonical endpoint order keeps weight(i,j) bit-identical to weight(j,i).
    const auto lo = static_cast<std::size_t>(std::min(s, t));
    const auto hi = static_cast<std::size_t>(std::max(s, t));
    g.weights[col] = s == t ? 0.0 : HaversineDistance(locations[lo], locations[hi]);
  }
  return g;
}

GeoGraph BuildKnnGraph(const LabeledMatrix& m, std::size_t k) {
  GeoGraph g = BuildKnnGraph(m.locations, m.X, m.labels, k);
  g.ids = m.ids;
  return g;
}

void WriteGraph(const fs::path& prefix, const GeoGraph& g) {
  auto open = [&](const char* suffix) {
    fs::path path = prefix;
    path += suffix;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    return out;
  };
  {
    auto out = open("_nodes.csv");
    out << "node,id,lon,lat,label";
    for (Eigen::Index j = 0; j < g.node_features.cols(); ++j) out << ",f" << j;
    out << '\n';
    for (Eigen::Index i = 0; i < g.num_nodes(); ++i) {
      const auto r = static_cast<std::size_t>(i);
      out << i << ',' << (r < g.ids.size() ? g.ids[r] : i) << ','
          << FormatDouble(g.locations[r].lon) << ',' << FormatDouble(g.locations[r].lat) << ','
          << static_cast<int>(g.labels[i]);
      for (Eigen::Index j = 0; j < g.node_features.cols(); ++j) {
        out << ',' << FormatDouble(g.node_features(i, j));
      }
      out << '\n';
    }
  }
  {
    auto out = open("_edges.csv");
    out << "source,target\n";
    for (Eigen::Index e = 0; e < g.num_edges(); ++e) {
      out << g.edges(0, e) << ',' << g.edges(1, e) << '\n';
    }
  }
  {
    auto out = open("_weights.csv");
    out << "weight_m\n";
    for (Eigen::Index e = 0; e < g.num_edges(); ++e) out << FormatDouble(g.weights[e]) << '\n';
  }
}

}  // namespace deskaid
