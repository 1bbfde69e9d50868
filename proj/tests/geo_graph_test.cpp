// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "deskaid/geo_graph.hpp"
#include "deskaid/models.hpp"
#include "test_support.hpp"

namespace deskaid {
namespace {

using testing::CodeOf;

struct Nodes {
  std::vector<GeoPoint> loc;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Nodes RandomNodes(std::uint64_t seed, int n) {
  Rng rng = MakeRng(seed, 0);
  Nodes d;
  d.X.resize(n, 3);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.loc.push_back({UniformIn(rng, 65, 65.5), UniformIn(rng, 34, 34.5)});
    for (int j = 0; j < 3; ++j) d.X(i, j) = StandardNormal(rng);
    d.y[i] = i % 2;
  }
  return d;
}

TEST(KnnGraph, EdgesAreBruteForceNeighborsSymmetrizedWithSelfLoops) {
  const Nodes d = RandomNodes(1, 120);
  const std::size_t k = 5;
  const GeoGraph g = BuildKnnGraph(d.loc, d.X, d.y, k);

  std::set<std::pair<Eigen::Index, Eigen::Index>> expected;
  for (std::size_t i = 0; i < d.loc.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < d.loc.size(); ++j) {
      if (j != i) all.emplace_back(HaversineDistance(d.loc[i], d.loc[j]), j);
    }
    std::sort(all.begin(), all.end());
    const auto a = static_cast<Eigen::Index>(i);
    expected.insert({a, a});
    for (std::size_t m = 0; m < k; ++m) {
      const auto b = static_cast<Eigen::Index>(all[m].second);
      expected.insert({a, b});
      expected.insert({b, a});
    }
  }
  std::set<std::pair<Eigen::Index, Eigen::Index>> actual;
  for (Eigen::Index e = 0; e < g.num_edges(); ++e) {
    EXPECT_TRUE(actual.insert({g.edges(0, e), g.edges(1, e)}).second) << "duplicate edge";
    const auto s = static_cast<std::size_t>(g.edges(0, e));
    const auto t = static_cast<std::size_t>(g.edges(1, e));
    if (s == t) {
      EXPECT_EQ(g.weights[e], 0.0);
    } else {
      EXPECT_NEAR(g.weights[e], HaversineDistance(d.loc[s], d.loc[t]), 1e-9);
    }
  }
  EXPECT_EQ(actual, expected);
}

TEST(KnnGraph, MirrorEdgesCarryIdenticalWeights) {
  const Nodes d = RandomNodes(2, 60);
  const GeoGraph g = BuildKnnGraph(d.loc, d.X, d.y, 5);
  std::map<std::pair<Eigen::Index, Eigen::Index>, double> w;
  for (Eigen::Index e = 0; e < g.num_edges(); ++e) w[{g.edges(0, e), g.edges(1, e)}] = g.weights[e];
  for (const auto& [edge, weight] : w) {
    EXPECT_EQ(w.at({edge.second, edge.first}), weight);
  }
}

TEST(KnnGraph, Errors) {
  const Nodes d = RandomNodes(3, 5);
  EXPECT_EQ(CodeOf([&] { BuildKnnGraph(d.loc, d.X, d.y, 5); }), ErrorCode::kTooFewNodes);
  EXPECT_EQ(CodeOf([&] { BuildKnnGraph(d.loc, d.X.topRows(4), d.y, 2); }),
            ErrorCode::kLengthMismatch);
}

TEST(NormalizedAdjacency, RowsSumToOneAndWeightsDecayWithDistance) {
  const Nodes d = RandomNodes(4, 80);
  const GeoGraph g = BuildKnnGraph(d.loc, d.X, d.y, 5);
  const double sigma = MedianEdgeDistance(g);
  for (bool weighted : {false, true}) {
    const auto a = NormalizedAdjacency(g, weighted, sigma);
    const Eigen::VectorXd rows = a * Eigen::VectorXd::Ones(a.cols());
    EXPECT_TRUE(rows.isApprox(Eigen::VectorXd::Ones(a.rows()), 1e-12));
  }
  // Unweighted: equal share per neighbor. Weighted: raw 1 / (1 + d / sigma).
  const auto u = NormalizedAdjacency(g, false, sigma);
  const auto w = NormalizedAdjacency(g, true, sigma);
  for (Eigen::Index i = 0; i < 5; ++i) {
    double raw_total = 0;
    int degree = 0;
    for (Eigen::Index e = 0; e < g.num_edges(); ++e) {
      if (g.edges(0, e) != i) continue;
      raw_total += 1.0 / (1.0 + g.weights[e] / sigma);
      ++degree;
    }
    for (Eigen::Index e = 0; e < g.num_edges(); ++e) {
      if (g.edges(0, e) != i) continue;
      const Eigen::Index j = g.edges(1, e);
      EXPECT_NEAR(u.coeff(i, j), 1.0 / degree, 1e-15);
      EXPECT_NEAR(w.coeff(i, j), (1.0 / (1.0 + g.weights[e] / sigma)) / raw_total, 1e-15);
    }
  }
}

TEST(MedianEdgeDistance, IgnoresSelfLoops) {
  GeoGraph g;
  g.node_features = Eigen::MatrixXd::Zero(3, 1);
  g.edges.resize(2, 5);
  g.edges << 0, 1, 2, 0, 1,
             0, 1, 2, 1, 0;
  g.weights.resize(5);
  g.weights << 0, 0, 0, 10, 30;
  EXPECT_EQ(MedianEdgeDistance(g), 20.0);
}

TEST(KnnGraph, WriteGraphFiles) {
  testing::TempDir dir;
  const Nodes d = RandomNodes(5, 20);
  const GeoGraph g = BuildKnnGraph(d.loc, d.X, d.y, 3);
  WriteGraph(dir / "g", g);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    if (e.path().filename().string().rfind("g", 0) == 0) ++files;
  }
  EXPECT_GE(files, 2u);
}

}  // namespace
}  // namespace deskaid
