// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Readers and writers for the on-disk layer formats: GeoJSON vector layers,
// ESRI ASCII grids, and the conflict-event CSV. LayerCatalog binds files to
// source roles.

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "deskaid/geo.hpp"

namespace deskaid {

enum class GeometryKind { kPoint, kLine, kPolygon };

std::string_view GeometryKindName(GeometryKind kind);
GeometryKind ParseGeometryKind(std::string_view name);

using VectorLayer = std::variant<std::vector<PointFeature>,
                                 std::vector<PolylineFeature>,
                                 std::vector<PolygonFeature>>;

// Multi* geometries are flattened to one feature per part. Throws
// ParseError, GeometryKindMismatch, or EmptyLayer.
VectorLayer ParseGeoJsonLayer(const std::filesystem::path& path, GeometryKind kind);

std::vector<PolygonFeature> ReadPolygons(const std::filesystem::path& path);
std::vector<PolylineFeature> ReadPolylines(const std::filesystem::path& path);
std::vector<PointFeature> ReadPoints(const std::filesystem::path& path);

// Same as ParseGeoJsonLayer but from in-memory text; `source` names the
// input in diagnostics.
VectorLayer ParseGeoJsonText(const std::string& text, GeometryKind kind,
                             const std::string& source = "<memory>");

void WriteGeoJson(const std::filesystem::path& path,
                  const std::vector<PolygonFeature>& features);
void WriteGeoJson(const std::filesystem::path& path,
                  const std::vector<PolylineFeature>& features);
void WriteGeoJson(const std::filesystem::path& path,
                  const std::vector<PointFeature>& features);

struct RasterGrid {
  int ncols = 0;
  int nrows = 0;
  double xllcorner = 0.0;  // degrees
  double yllcorner = 0.0;  // degrees
  double cellsize = 0.0;   // degrees
  double nodata = -9999.0;
  std::vector<double> values;  // row-major, row 0 northernmost

  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * ncols + col];
  }
  double& at(int row, int col) {
    return values[static_cast<std::size_t>(row) * ncols + col];
  }
  // Latitude of the center of `row`.
  double RowCenterLat(int row) const {
    return yllcorner + (nrows - row - 0.5) * cellsize;
  }
};

RasterGrid ParseAsciiGrid(const std::filesystem::path& path);
RasterGrid ParseAsciiGridText(const std::string& text);
// Values are written with 6 significant digits.
void WriteAsciiGrid(const std::filesystem::path& path, const RasterGrid& grid);

struct ConflictEvent {
  GeoPoint location;
  double estimated_deaths = 0.0;
};

std::vector<ConflictEvent> ParseConflictCsv(const std::filesystem::path& path);
void WriteConflictCsv(const std::filesystem::path& path,
                      const std::vector<ConflictEvent>& events);

// The thirteen source roles.
enum class Role {
  kHazard,
  kBuilding,
  kFinancial,
  kEducation,
  kAirport,
  kHealth,
  kRoad,
  kWaterway,
  kControlledArea,
  kConflict,
  kBorder,
  kPopulation,
  kElevation,
};

inline constexpr std::array<Role, 13> kAllRoles = {
    Role::kHazard,   Role::kBuilding,       Role::kFinancial, Role::kEducation,
    Role::kAirport,  Role::kHealth,         Role::kRoad,      Role::kWaterway,
    Role::kControlledArea, Role::kConflict, Role::kBorder,    Role::kPopulation,
    Role::kElevation};

std::string_view RoleName(Role role);
Role ParseRole(std::string_view name);

enum class LayerFormat { kGeoJson, kConflictCsv, kAsciiGrid };

struct LayerBinding {
  std::filesystem::path path;  // absolute after loading
  LayerFormat format = LayerFormat::kGeoJson;
  GeometryKind kind = GeometryKind::kPoint;  // GeoJSON layers only
  std::optional<std::string> category_attribute;
  std::vector<std::string> vocabulary;
};

struct LayerCatalog {
  std::map<Role, LayerBinding> layers;

  bool Has(Role role) const { return layers.count(role) > 0; }
  const LayerBinding& at(Role role) const;
};

// Relative paths in the document resolve against the catalog's directory.
LayerCatalog LoadCatalog(const std::filesystem::path& path);
// Paths are written relative to the catalog's directory when possible.
void SaveCatalog(const std::filesystem::path& path, const LayerCatalog& catalog);

}  // namespace deskaid
