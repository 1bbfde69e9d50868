// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Deterministic synthetic country with a planted hazard-placement rule.

#pragma once

#include <cstdint>
#include <filesystem>

#include "deskaid/geo.hpp"
#include "deskaid/ingest.hpp"

namespace deskaid {

struct WorldConfig {
  std::uint64_t seed = 1;
  double side_km = 200.0;
  GeoPoint center{65.0, 34.0};
  double border_spacing_m = 500.0;

  int hazards = 1000;
  double hazard_min_extent_m = 100.0;
  double hazard_max_extent_m = 2000.0;
  // Width is length times a uniform aspect, clamped to [min, max] width.
  double hazard_min_aspect = 0.2;
  double hazard_max_aspect = 0.6;
  double hazard_min_width_m = 50.0;
  double hazard_max_width_m = 400.0;

  int roads = 55;
  int waterways = 20;
  int conflict_clusters = 12;
  int conflict_events = 800;
  int towns = 20;
  int town_buildings = 3000;
  int rural_buildings = 800;
  int financial = 80;
  int education = 240;
  int airports = 10;
  int health = 160;
  int controlled_areas = 30;

  // Hazard acceptance probability at a candidate center:
  // exp(-strength * (d_road / road_scale + d_conflict / conflict_scale
  //                  + |slope - preferred_slope| / slope_scale)).
  double strength = 3.0;
  double road_scale_m = 3000.0;
  double conflict_scale_m = 8000.0;
  double preferred_slope_pct = 6.0;
  double slope_scale_pct = 6.0;

  // Buildings planted just outside every hazard, one per this much perimeter
  // (stratified along the boundary).
  double planted_building_spacing_m = 60.0;
  double planted_building_min_offset_m = 40.0;
  double planted_building_max_offset_m = 60.0;

  double raster_cellsize_deg = 0.0025;
  double raster_margin_km = 10.0;

  // Study area: square of this side in the south-west quadrant.
  double study_area_km = 30.0;
};

// Checks counts >= 1 and positive extents. Throws Config.
void ValidateWorldConfig(const WorldConfig& cfg);

// Writes every layer, catalog.json, study_area.geojson and manifest.json
// into out_dir and returns the catalog. Identical configs give identical
// bytes.
LayerCatalog GenerateWorld(const WorldConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace deskaid
