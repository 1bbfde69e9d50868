// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Geodesic and planar geometry on WGS84 coordinates. Distances are
// great-circle meters on a sphere; planar work (areas, centroids, buffers)
// happens in a per-feature equirectangular LocalFrame.

#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace deskaid {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

struct GeoPoint {
  double lon = 0.0;  // degrees, [-180, 180]
  double lat = 0.0;  // degrees, [-90, 90]

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool IsValid(const GeoPoint& p);

using Attributes = std::map<std::string, std::string>;
using Ring = std::vector<GeoPoint>;

struct PolygonFeature {
  Ring exterior;  // closed: front() == back(), >= 4 vertices
  std::vector<Ring> holes;
  Attributes attributes;
};

struct PolylineFeature {
  std::vector<GeoPoint> vertices;  // >= 2, consecutive vertices distinct
  Attributes attributes;
};

struct PointFeature {
  GeoPoint location;
  Attributes attributes;
};

struct BoundingBox {
  double min_lon, min_lat, max_lon, max_lat;

  bool Contains(const GeoPoint& p) const {
    return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat &&
           p.lat <= max_lat;
  }
  GeoPoint Center() const {
    return {(min_lon + max_lon) / 2, (min_lat + max_lat) / 2};
  }
};

BoundingBox BoundsOf(const Ring& ring);
BoundingBox BoundsOf(const PolygonFeature& poly);

// Equirectangular projection about an origin: x east, y north, meters.
class LocalFrame {
 public:
  explicit LocalFrame(const GeoPoint& origin);

  const GeoPoint& origin() const { return origin_; }
  double meters_per_deg_lon() const { return meters_per_deg_lon_; }
  double meters_per_deg_lat() const { return meters_per_deg_lat_; }

  Eigen::Vector2d Project(const GeoPoint& p) const;
  GeoPoint Unproject(const Eigen::Vector2d& xy) const;

 private:
  GeoPoint origin_;
  double meters_per_deg_lon_;
  double meters_per_deg_lat_;
};

// Frame centered on the polygon's bounding box.
LocalFrame FrameFor(const PolygonFeature& poly);

double HaversineDistance(const GeoPoint& a, const GeoPoint& b);

// Even-odd rule over the exterior minus holes; points on any boundary
// segment count as inside.
bool PointInPolygon(const GeoPoint& p, const PolygonFeature& poly);

// Shoelace area in the polygon's LocalFrame, holes subtracted (m^2).
double PlanarArea(const PolygonFeature& poly);

// Area-weighted centroid. Throws DegenerateGeometry when the planar area is
// below 1e-9 m^2.
GeoPoint PolygonCentroid(const PolygonFeature& poly);

// Vertices in order with repeated join vertices removed; a closed ring drops
// its duplicate endpoint.
std::vector<GeoPoint> ExtractVertices(const PolylineFeature& line);
std::vector<GeoPoint> ExtractVertices(const Ring& ring);

// Inserts vertices so no segment is longer than max_spacing meters.
std::vector<GeoPoint> Densify(const std::vector<GeoPoint>& vertices,
                              double max_spacing);

// Points on the outward offset ring at `distance` meters from the exterior
// boundary, emitted every `spacing` meters of arc length. Each point's planar
// distance to the boundary is within 1% of `distance` and no point lies
// inside the polygon.
std::vector<GeoPoint> BufferChainagePoints(const PolygonFeature& poly,
                                           double distance, double spacing);

// Planar distance (meters, in `frame`) from p to the closest exterior or
// hole segment.
double DistanceToBoundary(const GeoPoint& p, const PolygonFeature& poly,
                          const LocalFrame& frame);

// Grid-bucketed containment queries over a fixed polygon set.
class PolygonSet {
 public:
  explicit PolygonSet(const std::vector<PolygonFeature>& polygons);

  bool ContainsAny(const GeoPoint& p) const;
  // Index of the first polygon containing p, or -1.
  long FirstContaining(const GeoPoint& p) const;
  std::size_t size() const { return polygons_->size(); }

 private:
  std::vector<std::size_t> Candidates(const GeoPoint& p) const;

  const std::vector<PolygonFeature>* polygons_;
  std::vector<BoundingBox> bounds_;
  BoundingBox extent_{};
  int cols_ = 1, rows_ = 1;
  double cell_lon_ = 1, cell_lat_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace deskaid
