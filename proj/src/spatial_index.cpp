// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>

#include "deskaid/common.hpp"

namespace deskaid {

namespace {

constexpr std::uint32_t kLeafSize = 16;
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Vector3d UnitVector(const GeoPoint& p) {
  constexpr double k = std::numbers::pi / 180.0;
  const double phi = p.lat * k;
  const double lambda = p.lon * k;
  return {std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda),
          std::sin(phi)};
}

// Great-circle meters for a chord on the unit sphere.
double ChordToMeters(double chord) {
  return 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, chord / 2.0));
}

// Candidates are pruned only when their lower bound clearly exceeds the
// current bound, so rounding never hides an equal-distance hub.
bool Prunable(double lower_bound, double bound) {
  return lower_bound > bound * (1.0 + 1e-9) + 1e-9;
}

struct NearestVisitor {
  double best = kInf;
  HubId best_id = std::numeric_limits<HubId>::max();
  std::size_t best_index = 0;

  double Bound() const { return best; }
  void Offer(double d, HubId id, std::size_t index) {
    if (d < best || (d == best && id < best_id)) {
      best = d;
      best_id = id;
      best_index = index;
    }
  }
};

struct KnnVisitor {
  std::size_t k;
  std::optional<HubId> exclude;
  // Max-heap on (distance, id): top is the current worst of the best k.
  std::priority_queue<std::pair<double, HubId>> heap;

  double Bound() const { return heap.size() < k ? kInf : heap.top().first; }
  void Offer(double d, HubId id, std::size_t) {
    if (exclude && id == *exclude) return;
    const std::pair<double, HubId> cand{d, id};
    if (heap.size() < k) {
      heap.push(cand);
    } else if (cand < heap.top()) {
      heap.pop();
      heap.push(cand);
    }
  }
};

}  // namespace

HubIndex::HubIndex(std::vector<Hub> hubs) {
  if (hubs.empty()) throw Error(ErrorCode::kEmptyLayer, "cannot index zero hubs");
  for (const auto& h : hubs) {
    if (!IsValid(h.location)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "hub " + std::to_string(h.id) + " has invalid coordinates");
    }
  }
  hubs_ = std::move(hubs);
  unit_.reserve(hubs_.size());
  for (const auto& h : hubs_) unit_.push_back(UnitVector(h.location));
  nodes_.reserve(2 * hubs_.size() / kLeafSize + 2);
  Build(0, static_cast<std::uint32_t>(hubs_.size()));
}

std::int32_t HubIndex::Build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = unit_[begin];
  node.hi = unit_[begin];
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    node.lo = node.lo.cwiseMin(unit_[i]);
    node.hi = node.hi.cwiseMax(unit_[i]);
  }
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return index;

  int axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;

  // Partition hubs_ and unit_ together through an index permutation.
  std::vector<std::uint32_t> order(end - begin);
  std::iota(order.begin(), order.end(), begin);
  std::nth_element(order.begin(), order.begin() + (mid - begin), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (unit_[a][axis] != unit_[b][axis]) return unit_[a][axis] < unit_[b][axis];
                     return hubs_[a].id < hubs_[b].id;
                   });
  std::vector<Hub> hub_tmp;
  std::vector<Eigen::Vector3d> unit_tmp;
  hub_tmp.reserve(order.size());
  unit_tmp.reserve(order.size());
  for (std::uint32_t i : order) {
    hub_tmp.push_back(std::move(hubs_[i]));
    unit_tmp.push_back(unit_[i]);
  }
  std::move(hub_tmp.begin(), hub_tmp.end(), hubs_.begin() + begin);
  std::copy(unit_tmp.begin(), unit_tmp.end(), unit_.begin() + begin);

  const std::int32_t left = Build(begin, mid);
  const std::int32_t right = Build(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

template <typename Visitor>
void HubIndex::Search(const GeoPoint& query, Visitor& visitor) const {
  const Eigen::Vector3d q = UnitVector(query);
  auto lower_bound = [&](const Node& n) {
    const Eigen::Vector3d gap =
        (n.lo - q).cwiseMax(q - n.hi).cwiseMax(Eigen::Vector3d::Zero());
    return ChordToMeters(gap.norm());
  };
  // Depth-first, nearer child first.
  std::vector<std::pair<double, std::int32_t>> stack;
  stack.emplace_back(lower_bound(nodes_[0]), 0);
  while (!stack.empty()) {
    const auto [lb, idx] = stack.back();
    stack.pop_back();
    if (Prunable(lb, visitor.Bound())) continue;
    const Node& node = nodes_[idx];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        visitor.Offer(HaversineDistance(query, hubs_[i].location), hubs_[i].id, i);
      }
      continue;
    }
    const double lb_left = lower_bound(nodes_[node.left]);
    const double lb_right = lower_bound(nodes_[node.right]);
    if (lb_left <= lb_right) {
      stack.emplace_back(lb_right, node.right);
      stack.emplace_back(lb_left, node.left);
    } else {
      stack.emplace_back(lb_left, node.left);
      stack.emplace_back(lb_right, node.right);
    }
  }
}

NearestHub HubIndex::Nearest(const GeoPoint& q) const {
  NearestVisitor visitor;
  Search(q, visitor);
  const Hub& h = hubs_[visitor.best_index];
  return {h.id, h.category, h.payload, visitor.best};
}

std::vector<Neighbor> HubIndex::Knn(const GeoPoint& q, std::size_t k,
                                    std::optional<HubId> exclude) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (k > hubs_.size()) {
    throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(k) + " exceeds " +
                                           std::to_string(hubs_.size()) + " hubs");
  }
  KnnVisitor visitor{k, exclude, {}};
  Search(q, visitor);
  if (visitor.heap.size() < k) {
    throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(k) + " exceeds " +
                                           std::to_string(visitor.heap.size()) +
                                           " eligible hubs");
  }
  std::vector<Neighbor> out(visitor.heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = {visitor.heap.top().second, visitor.heap.top().first};
    visitor.heap.pop();
  }
  return out;
}

}  // namespace deskaid
