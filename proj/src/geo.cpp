// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "deskaid/common.hpp"

namespace deskaid {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMinArea = 1e-9;
constexpr double kBoundaryEps = 1e-12;  // degrees

enum class RingSide { kOutside, kInside, kBoundary };

bool OnSegment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  if (p.lon < std::min(a.lon, b.lon) - kBoundaryEps ||
      p.lon > std::max(a.lon, b.lon) + kBoundaryEps ||
      p.lat < std::min(a.lat, b.lat) - kBoundaryEps ||
      p.lat > std::max(a.lat, b.lat) + kBoundaryEps) {
    return false;
  }
  const double cross =
      (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  const double scale = std::hypot(b.lon - a.lon, b.lat - a.lat);
  return std::abs(cross) <= kBoundaryEps * std::max(scale, 1.0);
}

RingSide Classify(const GeoPoint& p, const Ring& ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const GeoPoint& a = ring[j];
    const GeoPoint& b = ring[i];
    if (OnSegment(p, a, b)) return RingSide::kBoundary;
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < x) inside = !inside;
    }
  }
  return inside ? RingSide::kInside : RingSide::kOutside;
}

std::vector<Eigen::Vector2d> ProjectRing(const Ring& ring, const LocalFrame& frame) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(ring.size());
  for (const auto& p : ring) out.push_back(frame.Project(p));
  if (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

// Twice the signed area (positive for counter-clockwise).
double SignedArea2(const std::vector<Eigen::Vector2d>& pts) {
  double s = 0;
  for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % n];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return s;
}

double SegmentDistance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                       const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double Cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace

bool IsValid(const GeoPoint& p) {
  return std::isfinite(p.lon) && std::isfinite(p.lat) && p.lon >= -180.0 &&
         p.lon <= 180.0 && p.lat >= -90.0 && p.lat <= 90.0;
}

BoundingBox BoundsOf(const Ring& ring) {
  BoundingBox b{std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  for (const auto& p : ring) {
    b.min_lon = std::min(b.min_lon, p.lon);
    b.min_lat = std::min(b.min_lat, p.lat);
    b.max_lon = std::max(b.max_lon, p.lon);
    b.max_lat = std::max(b.max_lat, p.lat);
  }
  return b;
}

BoundingBox BoundsOf(const PolygonFeature& poly) { return BoundsOf(poly.exterior); }

LocalFrame::LocalFrame(const GeoPoint& origin)
    : origin_(origin),
      meters_per_deg_lon_(kDegToRad * kEarthRadiusMeters *
                          std::cos(origin.lat * kDegToRad)),
      meters_per_deg_lat_(kDegToRad * kEarthRadiusMeters) {}

Eigen::Vector2d LocalFrame::Project(const GeoPoint& p) const {
  return {(p.lon - origin_.lon) * meters_per_deg_lon_,
          (p.lat - origin_.lat) * meters_per_deg_lat_};
}

GeoPoint LocalFrame::Unproject(const Eigen::Vector2d& xy) const {
  return {origin_.lon + xy.x() / meters_per_deg_lon_,
          origin_.lat + xy.y() / meters_per_deg_lat_};
}

LocalFrame FrameFor(const PolygonFeature& poly) {
  return LocalFrame(BoundsOf(poly).Center());
}

double HaversineDistance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2);
  const double s2 = std::sin(dlambda / 2);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

bool PointInPolygon(const GeoPoint& p, const PolygonFeature& poly) {
  if (poly.exterior.size() < 3) return false;
  const RingSide outer = Classify(p, poly.exterior);
  if (outer == RingSide::kOutside) return false;
  if (outer == RingSide::kBoundary) return true;
  for (const auto& hole : poly.holes) {
    const RingSide side = Classify(p, hole);
    if (side == RingSide::kInside) return false;
  }
  return true;
}

double PlanarArea(const PolygonFeature& poly) {
  const LocalFrame frame = FrameFor(poly);
  double area = std::abs(SignedArea2(ProjectRing(poly.exterior, frame))) / 2;
  for (const auto& hole : poly.holes) {
    area -= std::abs(SignedArea2(ProjectRing(hole, frame))) / 2;
  }
  return area;
}

GeoPoint PolygonCentroid(const PolygonFeature& poly) {
  const LocalFrame frame = FrameFor(poly);
  double total_area = 0;
  Eigen::Vector2d moment = Eigen::Vector2d::Zero();
  auto accumulate = [&](const Ring& ring, double sign) {
    const auto pts = ProjectRing(ring, frame);
    const double a2 = SignedArea2(pts);
    if (a2 == 0.0) return;
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
      const auto& p = pts[i];
      const auto& q = pts[(i + 1) % n];
      c += (p + q) * Cross(p, q);
    }
    c /= 3.0 * a2;  // ring centroid, orientation-independent
    const double area = std::abs(a2) / 2;
    total_area += sign * area;
    moment += sign * area * c;
  };
  accumulate(poly.exterior, 1.0);
  for (const auto& hole : poly.holes) accumulate(hole, -1.0);
  if (total_area < kMinArea) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "polygon planar area " + FormatDouble(total_area) + " m^2");
  }
  return frame.Unproject(moment / total_area);
}

std::vector<GeoPoint> ExtractVertices(const PolylineFeature& line) {
  return ExtractVertices(line.vertices);
}

std::vector<GeoPoint> ExtractVertices(const Ring& ring) {
  std::vector<GeoPoint> out;
  out.reserve(ring.size());
  for (const auto& p : ring) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  if (out.size() > 2 && out.front() == out.back()) out.pop_back();
  return out;
}

std::vector<GeoPoint> Densify(const std::vector<GeoPoint>& vertices,
                              double max_spacing) {
  if (max_spacing <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "densify spacing must be positive");
  }
  std::vector<GeoPoint> out;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (i > 0) {
      const GeoPoint& a = vertices[i - 1];
      const GeoPoint& b = vertices[i];
      const int pieces =
          static_cast<int>(std::ceil(HaversineDistance(a, b) / max_spacing));
      for (int k = 1; k < pieces; ++k) {
        const double t = static_cast<double>(k) / pieces;
        out.push_back({a.lon + t * (b.lon - a.lon), a.lat + t * (b.lat - a.lat)});
      }
    }
    out.push_back(vertices[i]);
  }
  return out;
}

double DistanceToBoundary(const GeoPoint& p, const PolygonFeature& poly,
                          const LocalFrame& frame) {
  const Eigen::Vector2d q = frame.Project(p);
  double best = std::numeric_limits<double>::infinity();
  auto scan = [&](const Ring& ring) {
    for (std::size_t i = 1; i < ring.size(); ++i) {
      best = std::min(best, SegmentDistance(q, frame.Project(ring[i - 1]),
                                            frame.Project(ring[i])));
    }
  };
  scan(poly.exterior);
  for (const auto& hole : poly.holes) scan(hole);
  return best;
}

std::vector<GeoPoint> BufferChainagePoints(const PolygonFeature& poly,
                                           double distance, double spacing) {
  if (!(distance > 0) || !(spacing > 0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "buffer distance and spacing must be positive");
  }
  if (PlanarArea(poly) < kMinArea) {
    throw Error(ErrorCode::kDegenerateGeometry, "buffer of a zero-area polygon");
  }
  const LocalFrame frame = FrameFor(poly);
  std::vector<Eigen::Vector2d> pts;
  for (const auto& p : ProjectRing(poly.exterior, frame)) {
    if (pts.empty() || (p - pts.back()).norm() > 1e-9) pts.push_back(p);
  }
  while (pts.size() > 1 && (pts.front() - pts.back()).norm() <= 1e-9) pts.pop_back();
  if (SignedArea2(pts) < 0) std::reverse(pts.begin(), pts.end());
  const std::size_t n = pts.size();

  auto outward_normal = [&](std::size_t i) {
    const Eigen::Vector2d d = (pts[(i + 1) % n] - pts[i]).normalized();
    return Eigen::Vector2d(d.y(), -d.x());
  };

  // Offset ring. Reflex corners take the bisector (miter) vertex; convex
  // corners take a round join so every ring point stays at `distance`.
  constexpr double kMaxArcStep = 5.0 * kDegToRad;
  std::vector<Eigen::Vector2d> ring;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d n_in = outward_normal((i + n - 1) % n);
    const Eigen::Vector2d n_out = outward_normal(i);
    const double turn = Cross(n_in, n_out);
    if (turn > 1e-12) {
      const double a0 = std::atan2(n_in.y(), n_in.x());
      double sweep = std::atan2(n_out.y(), n_out.x()) - a0;
      while (sweep <= 0) sweep += 2 * std::numbers::pi;
      const int steps = std::max(1, static_cast<int>(std::ceil(sweep / kMaxArcStep)));
      for (int s = 0; s <= steps; ++s) {
        const double a = a0 + sweep * s / steps;
        ring.push_back(pts[i] + distance * Eigen::Vector2d(std::cos(a), std::sin(a)));
      }
    } else {
      const double denom = 1.0 + n_in.dot(n_out);
      if (denom < 1e-6) {
        ring.push_back(pts[i] + distance * n_in);
        ring.push_back(pts[i] + distance * n_out);
      } else {
        ring.push_back(pts[i] + distance * (n_in + n_out) / denom);
      }
    }
  }

  double perimeter = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    perimeter += (ring[(i + 1) % ring.size()] - ring[i]).norm();
  }

  std::vector<GeoPoint> out;
  double next = 0;
  double walked = 0;
  for (std::size_t i = 0; i < ring.size() && next < perimeter; ++i) {
    const Eigen::Vector2d& a = ring[i];
    const Eigen::Vector2d& b = ring[(i + 1) % ring.size()];
    const double len = (b - a).norm();
    while (next < walked + len && next < perimeter) {
      const Eigen::Vector2d q = a + (b - a) * ((next - walked) / len);
      const GeoPoint g = frame.Unproject(q);
      const double d = DistanceToBoundary(g, poly, frame);
      if (std::abs(d - distance) <= 0.01 * distance && !PointInPolygon(g, poly)) {
        out.push_back(g);
      }
      next += spacing;
    }
    walked += len;
  }
  return out;
}

PolygonSet::PolygonSet(const std::vector<PolygonFeature>& polygons)
    : polygons_(&polygons) {
  bounds_.reserve(polygons.size());
  extent_ = {std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (const auto& poly : polygons) {
    const BoundingBox b = BoundsOf(poly);
    bounds_.push_back(b);
    extent_.min_lon = std::min(extent_.min_lon, b.min_lon);
    extent_.min_lat = std::min(extent_.min_lat, b.min_lat);
    extent_.max_lon = std::max(extent_.max_lon, b.max_lon);
    extent_.max_lat = std::max(extent_.max_lat, b.max_lat);
  }
  if (polygons.empty()) return;
  const int side = std::clamp(
      static_cast<int>(std::sqrt(static_cast<double>(polygons.size()))), 1, 512);
  cols_ = rows_ = side;
  cell_lon_ = std::max((extent_.max_lon - extent_.min_lon) / cols_, 1e-12);
  cell_lat_ = std::max((extent_.max_lat - extent_.min_lat) / rows_, 1e-12);
  buckets_.assign(static_cast<std::size_t>(cols_) * rows_, {});
  auto col_of = [&](double lon) {
    return std::clamp(static_cast<int>((lon - extent_.min_lon) / cell_lon_), 0, cols_ - 1);
  };
  auto row_of = [&](double lat) {
    return std::clamp(static_cast<int>((lat - extent_.min_lat) / cell_lat_), 0, rows_ - 1);
  };
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    const auto& b = bounds_[i];
    for (int r = row_of(b.min_lat); r <= row_of(b.max_lat); ++r) {
      for (int c = col_of(b.min_lon); c <= col_of(b.max_lon); ++c) {
        buckets_[static_cast<std::size_t>(r) * cols_ + c].push_back(i);
      }
    }
  }
}

std::vector<std::size_t> PolygonSet::Candidates(const GeoPoint& p) const {
  if (buckets_.empty() || !extent_.Contains(p)) return {};
  const int c = std::clamp(static_cast<int>((p.lon - extent_.min_lon) / cell_lon_), 0, cols_ - 1);
  const int r = std::clamp(static_cast<int>((p.lat - extent_.min_lat) / cell_lat_), 0, rows_ - 1);
  return buckets_[static_cast<std::size_t>(r) * cols_ + c];
}

long PolygonSet::FirstContaining(const GeoPoint& p) const {
  for (std::size_t i : Candidates(p)) {
    if (bounds_[i].Contains(p) && PointInPolygon(p, (*polygons_)[i])) {
      return static_cast<long>(i);
    }
  }
  return -1;
}

bool PolygonSet::ContainsAny(const GeoPoint& p) const { return FirstContaining(p) >= 0; }

}  // namespace deskaid
