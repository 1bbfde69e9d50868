// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "deskaid/geo.hpp"

namespace deskaid {

using HubId = std::int64_t;

struct Hub {
  GeoPoint location;
  HubId id = 0;
  std::string category;  // empty when the layer has none
  double payload = 0.0;  // per-hub scalar, e.g. conflict deaths
};

struct NearestHub {
  HubId id = 0;
  std::string category;
  double payload = 0.0;
  double distance = 0.0;  // meters
};

struct Neighbor {
  HubId id = 0;
  double distance = 0.0;  // meters

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Static k-d tree over hub positions on the unit sphere. Chord length is
// monotone in great-circle distance, so node bounds prune exactly; every
// surviving candidate is ranked by HaversineDistance with hub id as the
// tie-break, making answers identical to a brute-force scan.
//
// Immutable after construction; concurrent queries are safe.
class HubIndex {
 public:
  // Throws EmptyLayer when hubs is empty.
  explicit HubIndex(std::vector<Hub> hubs);

  std::size_t size() const { return hubs_.size(); }
  const std::vector<Hub>& hubs() const { return hubs_; }

  NearestHub Nearest(const GeoPoint& q) const;

  // k nearest in nondecreasing (distance, id) order, skipping `exclude`.
  // Throws KTooLarge if fewer than k hubs are eligible.
  std::vector<Neighbor> Knn(const GeoPoint& q, std::size_t k,
                            std::optional<HubId> exclude = std::nullopt) const;

 private:
  struct Node {
    Eigen::Vector3d lo, hi;  // bounds of the subtree's unit vectors
    std::uint32_t begin, end;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t Build(std::uint32_t begin, std::uint32_t end);
  template <typename Visitor>
  void Search(const GeoPoint& query, Visitor& visitor) const;

  std::vector<Hub> hubs_;
  std::vector<Eigen::Vector3d> unit_;  // parallel to hubs_ after reordering
  std::vector<Node> nodes_;
};

inline HubIndex BuildIndex(std::vector<Hub> hubs) { return HubIndex(std::move(hubs)); }

}  // namespace deskaid
