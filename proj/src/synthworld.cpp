// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "deskaid/common.hpp"
#include "deskaid/features.hpp"
#include "deskaid/spatial_index.hpp"

namespace deskaid {

namespace fs = std::filesystem;
using nlohmann::json;
using Eigen::Vector2d;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRoadStep = 500.0;
constexpr double kBuildingHalf = 6.0;
constexpr double kHazardGap = 100.0;
constexpr long kMaxHazardTrials = 5'000'000;

const std::vector<std::string> kEducationTypes = {"school", "madrasa", "university"};
const std::vector<std::string> kAirportTypes = {"international", "domestic", "military"};
const std::vector<std::string> kHealthTypes = {"clinic", "hospital", "pharmacy"};
const std::vector<std::string> kAuthorities = {"government", "opposition", "contested"};

struct Hill {
  Vector2d center;
  double amplitude, width;
};

struct Builder {
  const WorldConfig& cfg;
  Rng rng;
  LocalFrame frame;
  double half;

  Builder(const WorldConfig& c)
      : cfg(c), rng(MakeRng(c.seed, 0)), frame(c.center), half(c.side_km * 500.0) {}

  double U(double lo, double hi) { return UniformIn(rng, lo, hi); }
  Vector2d UniformPoint(double inset) { return {U(-half + inset, half - inset), U(-half + inset, half - inset)}; }
  bool Inside(const Vector2d& p, double inset) const {
    return std::abs(p.x()) <= half - inset && std::abs(p.y()) <= half - inset;
  }
  GeoPoint Geo(const Vector2d& p) const { return frame.Unproject(p); }

  PolygonFeature Polygon(const std::vector<Vector2d>& corners) const {
    PolygonFeature poly;
    for (const auto& c : corners) poly.exterior.push_back(Geo(c));
    poly.exterior.push_back(poly.exterior.front());
    return poly;
  }

  PolygonFeature Square(const Vector2d& c, double h) const {
    return Polygon({c + Vector2d(-h, -h), c + Vector2d(h, -h), c + Vector2d(h, h),
                    c + Vector2d(-h, h)});
  }

  std::vector<PolylineFeature> Lines(int count, double min_len, double max_len, double wiggle) {
    std::vector<PolylineFeature> lines;
    while (static_cast<int>(lines.size()) < count) {
      Vector2d p = UniformPoint(0.0);
      double heading = U(0, 2 * kPi);
      const double length = U(min_len, max_len);
      PolylineFeature line;
      line.vertices.push_back(Geo(p));
      for (double walked = 0; walked < length; walked += kRoadStep) {
        heading += wiggle * StandardNormal(rng);
        const Vector2d next = p + kRoadStep * Vector2d(std::cos(heading), std::sin(heading));
        if (!Inside(next, 0.0)) break;
        p = next;
        line.vertices.push_back(Geo(p));
      }
      if (line.vertices.size() >= 4) lines.push_back(std::move(line));
    }
    return lines;
  }

  RasterGrid Grid() const {
    const GeoPoint sw = Geo({-half - cfg.raster_margin_km * 1000, -half - cfg.raster_margin_km * 1000});
    const GeoPoint ne = Geo({half + cfg.raster_margin_km * 1000, half + cfg.raster_margin_km * 1000});
    RasterGrid g;
    g.cellsize = cfg.raster_cellsize_deg;
    g.xllcorner = std::floor(sw.lon / g.cellsize) * g.cellsize;
    g.yllcorner = std::floor(sw.lat / g.cellsize) * g.cellsize;
    g.ncols = static_cast<int>(std::ceil((ne.lon - g.xllcorner) / g.cellsize));
    g.nrows = static_cast<int>(std::ceil((ne.lat - g.yllcorner) / g.cellsize));
    g.values.assign(static_cast<std::size_t>(g.ncols) * g.nrows, 0.0);
    return g;
  }
};

double Gaussian(const Vector2d& p, const Vector2d& c, double w) {
  return std::exp(-(p - c).squaredNorm() / (2 * w * w));
}

// Rounds to six significant digits so in-memory rasters equal what a reader
// of the written grid sees.
double SixDigits(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

LayerBinding Bind(const fs::path& dir, const char* file, LayerFormat format, GeometryKind kind,
                  std::optional<std::string> category = std::nullopt,
                  std::vector<std::string> vocabulary = {}) {
  LayerBinding b;
  b.path = dir / file;
  b.format = format;
  b.kind = kind;
  b.category_attribute = std::move(category);
  b.vocabulary = std::move(vocabulary);
  return b;
}

}  // namespace

void ValidateWorldConfig(const WorldConfig& c) {
  const int counts[] = {c.hazards,   c.roads,           c.waterways, c.conflict_clusters,
                        c.conflict_events, c.towns,     c.town_buildings, c.rural_buildings,
                        c.financial, c.education,       c.airports,  c.health,
                        c.controlled_areas};
  for (int n : counts) {
    if (n < 1) throw Error(ErrorCode::kConfig, "world layer counts must be >= 1");
  }
  if (!(c.side_km > 0) || !(c.raster_cellsize_deg > 0) || !(c.border_spacing_m > 0)) {
    throw Error(ErrorCode::kConfig, "world side, cell size and border spacing must be > 0");
  }
  if (!(c.hazard_min_extent_m > 0) || !(c.hazard_max_extent_m >= c.hazard_min_extent_m)) {
    throw Error(ErrorCode::kConfig, "hazard extents must satisfy 0 < min <= max");
  }
  if (!(c.hazard_min_aspect > 0) || !(c.hazard_max_aspect >= c.hazard_min_aspect) ||
      !(c.hazard_min_width_m > 0) || !(c.hazard_max_width_m >= c.hazard_min_width_m)) {
    throw Error(ErrorCode::kConfig, "hazard aspect and width bounds must satisfy 0 < min <= max");
  }
  if (!(c.strength >= 0) || !(c.road_scale_m > 0) || !(c.conflict_scale_m > 0) ||
      !(c.slope_scale_pct > 0)) {
    throw Error(ErrorCode::kConfig, "planted-signal scales must be > 0 and strength >= 0");
  }
  if (!(c.study_area_km > 0 && c.study_area_km < c.side_km)) {
    throw Error(ErrorCode::kConfig, "study area must be smaller than the world");
  }
  if (!IsValid(c.center)) throw Error(ErrorCode::kConfig, "world center is not a valid point");
}

LayerCatalog GenerateWorld(const WorldConfig& cfg, const fs::path& out_dir) {
  ValidateWorldConfig(cfg);
  fs::create_directories(out_dir);
  Builder b(cfg);
  const double half = b.half;

  // Border, densified so border distances see a fine ring of vertices.
  PolygonFeature border;
  {
    std::vector<GeoPoint> ring = {b.Geo({-half, -half}), b.Geo({half, -half}),
                                  b.Geo({half, half}), b.Geo({-half, half}),
                                  b.Geo({-half, -half})};
    border.exterior = Densify(ring, cfg.border_spacing_m);
    border.attributes["name"] = "synthland";
  }

  auto roads = b.Lines(cfg.roads, 20000, 60000, 0.15);
  for (std::size_t i = 0; i < roads.size(); ++i) roads[i].attributes["id"] = std::to_string(i);
  auto waterways = b.Lines(cfg.waterways, 30000, 80000, 0.08);

  std::vector<Vector2d> clusters;
  for (int k = 0; k < cfg.conflict_clusters; ++k) clusters.push_back(b.UniformPoint(5000));
  std::vector<ConflictEvent> conflicts;
  while (static_cast<int>(conflicts.size()) < cfg.conflict_events) {
    Vector2d p;
    if (Uniform01(b.rng) < 0.85) {
      const Vector2d& c = clusters[UniformIndex(b.rng, clusters.size())];
      p = c + 3000.0 * Vector2d(StandardNormal(b.rng), StandardNormal(b.rng));
      if (!b.Inside(p, 0.0)) continue;
    } else {
      p = b.UniformPoint(0.0);
    }
    const double deaths = 1.0 + std::floor(-5.0 * std::log(1.0 - Uniform01(b.rng)));
    conflicts.push_back({b.Geo(p), deaths});
  }

  std::vector<Hill> hills;
  for (int k = 0; k < 8; ++k) {
    hills.push_back({b.UniformPoint(-cfg.raster_margin_km * 500), b.U(200, 1200), b.U(4000, 15000)});
  }
  RasterGrid elevation = b.Grid();
  for (int r = 0; r < elevation.nrows; ++r) {
    for (int c = 0; c < elevation.ncols; ++c) {
      const Vector2d p = b.frame.Project(
          {elevation.xllcorner + (c + 0.5) * elevation.cellsize, elevation.RowCenterLat(r)});
      double z = 1200.0 + 150.0 * std::sin(p.x() / 9000.0) * std::cos(p.y() / 13000.0);
      for (const auto& h : hills) z += h.amplitude * Gaussian(p, h.center, h.width);
      elevation.at(r, c) = SixDigits(z);
    }
  }

  std::vector<Vector2d> towns;
  std::vector<std::pair<double, double>> town_shape;  // peak density, width
  for (int k = 0; k < cfg.towns; ++k) {
    towns.push_back(b.UniformPoint(3000));
    town_shape.emplace_back(b.U(300, 3000), b.U(1000, 3000));
  }
  RasterGrid population = b.Grid();
  for (int r = 0; r < population.nrows; ++r) {
    for (int c = 0; c < population.ncols; ++c) {
      const Vector2d p = b.frame.Project(
          {population.xllcorner + (c + 0.5) * population.cellsize, population.RowCenterLat(r)});
      double d = 8.0;
      for (std::size_t k = 0; k < towns.size(); ++k) {
        d += town_shape[k].first * Gaussian(p, towns[k], town_shape[k].second);
      }
      population.at(r, c) = SixDigits(d);
    }
  }

  // Hazard placement by thinning uniform candidates with the planted rule.
  const HubIndex road_index(HubsFromLines(roads, false));
  const HubIndex conflict_index(HubsFromConflicts(conflicts));
  const RasterGrid slope = DeriveSlopeRaster(elevation);
  std::vector<PolygonFeature> hazards;
  std::vector<std::vector<Vector2d>> hazard_corners;
  std::vector<std::pair<Vector2d, double>> occupied;  // center, circumradius
  long trials = 0;
  const double log_min = std::log(cfg.hazard_min_extent_m);
  const double log_max = std::log(cfg.hazard_max_extent_m);
  while (static_cast<int>(hazards.size()) < cfg.hazards) {
    if (++trials > kMaxHazardTrials) {
      throw Error(ErrorCode::kSamplingExhausted, "could not place all hazard polygons");
    }
    const Vector2d c = b.UniformPoint(1000 + cfg.hazard_max_extent_m);
    const GeoPoint g = b.Geo(c);
    const double score = road_index.Nearest(g).distance / cfg.road_scale_m +
                         conflict_index.Nearest(g).distance / cfg.conflict_scale_m +
                         std::abs(SampleRaster(slope, g) - cfg.preferred_slope_pct) /
                             cfg.slope_scale_pct;
    if (Uniform01(b.rng) >= std::exp(-cfg.strength * score)) continue;

    const double length = std::exp(b.U(log_min, log_max));
    const double width =
        std::clamp(length * b.U(cfg.hazard_min_aspect, cfg.hazard_max_aspect),
                   cfg.hazard_min_width_m, std::min(cfg.hazard_max_width_m, length));
    const double theta = b.U(0, kPi);
    const double shear = Uniform01(b.rng) < 0.5 ? 0.0 : b.U(-0.4, 0.4);
    const Vector2d u(std::cos(theta), std::sin(theta));
    const Vector2d v = Vector2d(-u.y(), u.x()) + shear * u;
    const double a = length / 2, h = width / 2;
    std::vector<Vector2d> corners = {c - a * u - h * v, c + a * u - h * v, c + a * u + h * v,
                                     c - a * u + h * v};
    double radius = 0;
    for (const auto& q : corners) radius = std::max(radius, (q - c).norm());
    const bool clash = std::any_of(occupied.begin(), occupied.end(), [&](const auto& o) {
      return (o.first - c).norm() < o.second + radius + kHazardGap;
    });
    if (clash) continue;
    occupied.emplace_back(c, radius);
    PolygonFeature poly = b.Polygon(corners);
    poly.attributes["id"] = std::to_string(hazards.size());
    hazards.push_back(std::move(poly));
    hazard_corners.push_back(std::move(corners));
  }
  const PolygonSet hazard_set(hazards);
  auto clear_of_hazards = [&](const Vector2d& c, double h) {
    for (const Vector2d& d : {Vector2d(0, 0), Vector2d(-h, -h), Vector2d(h, -h),
                              Vector2d(h, h), Vector2d(-h, h)}) {
      if (hazard_set.ContainsAny(b.Geo(c + d))) return false;
    }
    return true;
  };

  std::vector<PolygonFeature> buildings;
  int planted = 0;
  for (const auto& corners : hazard_corners) {
    double perimeter = 0;
    for (std::size_t k = 0; k < 4; ++k) perimeter += (corners[(k + 1) % 4] - corners[k]).norm();
    const int count =
        std::max(2, static_cast<int>(std::lround(perimeter / cfg.planted_building_spacing_m)));
    const double step = perimeter / count;
    for (int n = 0; n < count; ++n) {
      double t = (n + Uniform01(b.rng)) * step;
      std::size_t k = 0;
      while (t > (corners[(k + 1) % 4] - corners[k]).norm() && k < 3) {
        t -= (corners[(k + 1) % 4] - corners[k]).norm();
        ++k;
      }
      const Vector2d edge = corners[(k + 1) % 4] - corners[k];
      const Vector2d dir = edge.normalized();
      const Vector2d outward(dir.y(), -dir.x());  // corners run counter-clockwise
      const Vector2d at = corners[k] + std::min(t, edge.norm()) * dir +
                          b.U(cfg.planted_building_min_offset_m,
                              cfg.planted_building_max_offset_m) * outward;
      if (!clear_of_hazards(at, kBuildingHalf)) continue;
      buildings.push_back(b.Square(at, kBuildingHalf));
      ++planted;
    }
  }
  for (int n = 0; n < cfg.town_buildings; ++n) {
    const std::size_t k = UniformIndex(b.rng, towns.size());
    const Vector2d at = towns[k] + 0.6 * town_shape[k].second *
                                       Vector2d(StandardNormal(b.rng), StandardNormal(b.rng));
    if (!b.Inside(at, 0.0) || !clear_of_hazards(at, kBuildingHalf)) continue;
    buildings.push_back(b.Square(at, kBuildingHalf));
  }
  for (int n = 0; n < cfg.rural_buildings; ++n) {
    const Vector2d at = b.UniformPoint(0.0);
    if (!clear_of_hazards(at, kBuildingHalf)) continue;
    buildings.push_back(b.Square(at, kBuildingHalf));
  }

  auto near_town = [&](double spread) {
    const std::size_t k = UniformIndex(b.rng, towns.size());
    Vector2d at = towns[k] + spread * Vector2d(StandardNormal(b.rng), StandardNormal(b.rng));
    if (!b.Inside(at, 0.0)) at = towns[k];
    return at;
  };
  std::vector<PointFeature> financial, education, airports, health;
  for (int n = 0; n < cfg.financial; ++n) financial.push_back({b.Geo(near_town(1500)), {}});
  for (int n = 0; n < cfg.education; ++n) {
    const Vector2d at = Uniform01(b.rng) < 0.7 ? near_town(3000) : b.UniformPoint(0.0);
    education.push_back({b.Geo(at), {{"type", kEducationTypes[UniformIndex(b.rng, 3)]}}});
  }
  for (int n = 0; n < cfg.airports; ++n) {
    airports.push_back({b.Geo(near_town(6000)), {{"type", kAirportTypes[UniformIndex(b.rng, 3)]}}});
  }
  for (int n = 0; n < cfg.health; ++n) {
    const Vector2d at = Uniform01(b.rng) < 0.8 ? near_town(2500) : b.UniformPoint(0.0);
    PointFeature f{b.Geo(at), {}};
    // Some facilities carry no type and fall into "unknown".
    if (Uniform01(b.rng) >= 0.15) f.attributes["type"] = kHealthTypes[UniformIndex(b.rng, 3)];
    health.push_back(std::move(f));
  }
  std::vector<PolygonFeature> controlled;
  for (int n = 0; n < cfg.controlled_areas; ++n) {
    const Vector2d at = b.UniformPoint(5000);
    PolygonFeature poly = b.Square(at, b.U(500, 2500));
    poly.attributes["authority"] = kAuthorities[UniformIndex(b.rng, 3)];
    controlled.push_back(std::move(poly));
  }

  const double study = cfg.study_area_km * 1000.0;
  PolygonFeature study_area = b.Polygon({{-half + 2000, -half + 2000},
                                         {-half + 2000 + study, -half + 2000},
                                         {-half + 2000 + study, -half + 2000 + study},
                                         {-half + 2000, -half + 2000 + study}});
  study_area.attributes["name"] = "study_area_1";

  WriteGeoJson(out_dir / "border.geojson", std::vector<PolygonFeature>{border});
  WriteGeoJson(out_dir / "hazards.geojson", hazards);
  WriteGeoJson(out_dir / "buildings.geojson", buildings);
  WriteGeoJson(out_dir / "financial.geojson", financial);
  WriteGeoJson(out_dir / "education.geojson", education);
  WriteGeoJson(out_dir / "airports.geojson", airports);
  WriteGeoJson(out_dir / "health.geojson", health);
  WriteGeoJson(out_dir / "roads.geojson", roads);
  WriteGeoJson(out_dir / "waterways.geojson", waterways);
  WriteGeoJson(out_dir / "controlled_areas.geojson", controlled);
  WriteGeoJson(out_dir / "study_area.geojson", std::vector<PolygonFeature>{study_area});
  WriteConflictCsv(out_dir / "conflicts.csv", conflicts);
  WriteAsciiGrid(out_dir / "population.asc", population);
  WriteAsciiGrid(out_dir / "elevation.asc", elevation);

  LayerCatalog catalog;
  const auto geo = LayerFormat::kGeoJson;
  catalog.layers[Role::kHazard] = Bind(out_dir, "hazards.geojson", geo, GeometryKind::kPolygon);
  catalog.layers[Role::kBuilding] = Bind(out_dir, "buildings.geojson", geo, GeometryKind::kPolygon);
  catalog.layers[Role::kFinancial] = Bind(out_dir, "financial.geojson", geo, GeometryKind::kPoint);
  catalog.layers[Role::kEducation] =
      Bind(out_dir, "education.geojson", geo, GeometryKind::kPoint, "type", kEducationTypes);
  catalog.layers[Role::kAirport] =
      Bind(out_dir, "airports.geojson", geo, GeometryKind::kPoint, "type", kAirportTypes);
  catalog.layers[Role::kHealth] =
      Bind(out_dir, "health.geojson", geo, GeometryKind::kPoint, "type", kHealthTypes);
  catalog.layers[Role::kRoad] = Bind(out_dir, "roads.geojson", geo, GeometryKind::kLine);
  catalog.layers[Role::kWaterway] = Bind(out_dir, "waterways.geojson", geo, GeometryKind::kLine);
  catalog.layers[Role::kControlledArea] = Bind(out_dir, "controlled_areas.geojson", geo,
                                               GeometryKind::kPolygon, "authority", kAuthorities);
  catalog.layers[Role::kConflict] =
      Bind(out_dir, "conflicts.csv", LayerFormat::kConflictCsv, GeometryKind::kPoint);
  catalog.layers[Role::kBorder] = Bind(out_dir, "border.geojson", geo, GeometryKind::kPolygon);
  catalog.layers[Role::kPopulation] =
      Bind(out_dir, "population.asc", LayerFormat::kAsciiGrid, GeometryKind::kPoint);
  catalog.layers[Role::kElevation] =
      Bind(out_dir, "elevation.asc", LayerFormat::kAsciiGrid, GeometryKind::kPoint);
  SaveCatalog(out_dir / "catalog.json", catalog);

  json manifest;
  manifest["generator"] = "deskaid synthworld";
  manifest["seed"] = cfg.seed;
  manifest["side_km"] = cfg.side_km;
  manifest["center"] = {cfg.center.lon, cfg.center.lat};
  manifest["planted_signal"] = {
      {"rule",
       "p_accept = exp(-strength * (d_road/road_scale_m + d_conflict/conflict_scale_m + "
       "|slope - preferred_slope_pct|/slope_scale_pct))"},
      {"strength", cfg.strength},
      {"road_scale_m", cfg.road_scale_m},
      {"conflict_scale_m", cfg.conflict_scale_m},
      {"preferred_slope_pct", cfg.preferred_slope_pct},
      {"slope_scale_pct", cfg.slope_scale_pct},
      {"distances", "nearest road vertex and nearest conflict event, great-circle meters"},
      {"candidate_trials", trials}};
  manifest["planted_buildings"] = {{"count", planted},
                                   {"spacing_m", cfg.planted_building_spacing_m},
                                   {"min_offset_m", cfg.planted_building_min_offset_m},
                                   {"max_offset_m", cfg.planted_building_max_offset_m}};
  manifest["hazard_shape"] = {{"extent_m", {cfg.hazard_min_extent_m, cfg.hazard_max_extent_m}},
                              {"aspect", {cfg.hazard_min_aspect, cfg.hazard_max_aspect}},
                              {"width_m", {cfg.hazard_min_width_m, cfg.hazard_max_width_m}}};
  manifest["counts"] = {{"hazards", hazards.size()},
                        {"buildings", buildings.size()},
                        {"roads", roads.size()},
                        {"waterways", waterways.size()},
                        {"conflict_events", conflicts.size()},
                        {"financial", financial.size()},
                        {"education", education.size()},
                        {"airports", airports.size()},
                        {"health", health.size()},
                        {"controlled_areas", controlled.size()}};
  manifest["raster"] = {{"cellsize_deg", cfg.raster_cellsize_deg},
                        {"ncols", elevation.ncols},
                        {"nrows", elevation.nrows},
                        {"margin_km", cfg.raster_margin_km}};
  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (out_dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';

  return LoadCatalog(out_dir / "catalog.json");
}

}  // namespace deskaid
