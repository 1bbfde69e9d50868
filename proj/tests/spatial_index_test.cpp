// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include <gtest/gtest.h>

#include "deskaid/spatial_index.hpp"
#include "test_support.hpp"

namespace deskaid {
namespace {

using testing::CodeOf;

std::vector<Neighbor> BruteForce(const std::vector<Hub>& hubs, const GeoPoint& q,
                                 std::optional<HubId> exclude = std::nullopt) {
  std::vector<Neighbor> all;
  for (const auto& h : hubs) {
    if (exclude && h.id == *exclude) continue;
    all.push_back({h.id, HaversineDistance(q, h.location)});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  });
  return all;
}

std::vector<Hub> RandomHubs(Rng& rng, int n, double lon0, double lon1, double lat0,
                            double lat1) {
  std::vector<Hub> hubs;
  for (int i = 0; i < n; ++i) {
    Hub h;
    h.location = {UniformIn(rng, lon0, lon1), UniformIn(rng, lat0, lat1)};
    h.id = 1000 + 3 * i;
    h.category = i % 2 ? "a" : "b";
    h.payload = i;
    hubs.push_back(h);
  }
  return hubs;
}

TEST(HubIndex, NearestAndKnnMatchBruteForce) {
  Rng rng = MakeRng(10, 0);
  const auto hubs = RandomHubs(rng, 3000, 60, 75, 29, 38);
  const HubIndex index(hubs);
  for (int i = 0; i < 300; ++i) {
    const GeoPoint q{UniformIn(rng, 58, 77), UniformIn(rng, 27, 40)};
    const auto brute = BruteForce(hubs, q);
    const NearestHub n = index.Nearest(q);
    ASSERT_EQ(n.id, brute[0].id);
    ASSERT_EQ(n.distance, brute[0].distance);
    const auto knn = index.Knn(q, 7);
    ASSERT_TRUE(std::equal(knn.begin(), knn.end(), brute.begin()));
  }
}

TEST(HubIndex, GlobalCoverageAcrossAntimeridianAndPoles) {
  Rng rng = MakeRng(11, 0);
  const auto hubs = RandomHubs(rng, 2000, -180, 180, -90, 90);
  const HubIndex index(hubs);
  const GeoPoint queries[] = {{179.99, 0}, {-179.99, 10}, {0, 89.9}, {45, -89.9}, {0, 0}};
  for (const auto& q : queries) {
    const auto brute = BruteForce(hubs, q);
    const auto knn = index.Knn(q, 5);
    EXPECT_TRUE(std::equal(knn.begin(), knn.end(), brute.begin()));
  }
}

TEST(HubIndex, TiesBreakOnSmallerId) {
  std::vector<Hub> hubs(3);
  hubs[0].location = {1, 0};
  hubs[0].id = 9;
  hubs[1].location = {-1, 0};
  hubs[1].id = 4;
  hubs[2].location = {0, 1.5};
  hubs[2].id = 1;
  const HubIndex index(hubs);
  EXPECT_EQ(index.Nearest({0, 0}).id, 4);
  const auto knn = index.Knn({0, 0}, 2);
  EXPECT_EQ(knn[0].id, 4);
  EXPECT_EQ(knn[1].id, 9);
}

TEST(HubIndex, NearestCarriesCategoryAndPayload) {
  Rng rng = MakeRng(12, 0);
  const auto hubs = RandomHubs(rng, 50, 0, 1, 0, 1);
  const HubIndex index(hubs);
  const NearestHub n = index.Nearest(hubs[17].location);
  EXPECT_EQ(n.id, hubs[17].id);
  EXPECT_EQ(n.distance, 0.0);
  EXPECT_EQ(n.category, hubs[17].category);
  EXPECT_EQ(n.payload, hubs[17].payload);
}

TEST(HubIndex, KnnExcludingSelf) {
  Rng rng = MakeRng(13, 0);
  const auto hubs = RandomHubs(rng, 400, 0, 2, 0, 2);
  const HubIndex index(hubs);
  for (const auto& h : hubs) {
    const auto knn = index.Knn(h.location, 5, h.id);
    const auto brute = BruteForce(hubs, h.location, h.id);
    ASSERT_TRUE(std::equal(knn.begin(), knn.end(), brute.begin()));
  }
}

TEST(HubIndex, Errors) {
  EXPECT_EQ(CodeOf([] { HubIndex(std::vector<Hub>{}); }), ErrorCode::kEmptyLayer);
  Rng rng = MakeRng(14, 0);
  const HubIndex index(RandomHubs(rng, 4, 0, 1, 0, 1));
  EXPECT_EQ(CodeOf([&] { index.Knn({0, 0}, 5); }), ErrorCode::kKTooLarge);
  EXPECT_EQ(CodeOf([&] { index.Knn({0, 0}, 4, 1000); }), ErrorCode::kKTooLarge);
  EXPECT_EQ(CodeOf([&] { index.Knn({0, 0}, 0); }), ErrorCode::kInvalidArgument);
}

TEST(HubIndex, DuplicateLocations) {
  std::vector<Hub> hubs(20);
  for (int i = 0; i < 20; ++i) {
    hubs[i].location = {65, 34};
    hubs[i].id = 20 - i;
  }
  const HubIndex index(hubs);
  const auto knn = index.Knn({65.001, 34}, 3);
  EXPECT_EQ(knn[0].id, 1);
  EXPECT_EQ(knn[1].id, 2);
  EXPECT_EQ(knn[2].id, 3);
}

}  // namespace
}  // namespace deskaid
