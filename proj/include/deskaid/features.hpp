// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// Location -> feature vector: nearest-hub distances, categorical types of the
// nearest hub, raster samples and derived slope.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "deskaid/geo.hpp"
#include "deskaid/ingest.hpp"
#include "deskaid/sampling.hpp"
#include "deskaid/spatial_index.hpp"

namespace deskaid {

enum class FeatureKind { kContinuous, kCategorical };

enum class FeatureSet { kBase7, kExpanded18 };

std::string_view FeatureSetName(FeatureSet set);
FeatureSet ParseFeatureSet(std::string_view name);

struct FeatureDescriptor {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  std::string unit;
  Role role = Role::kBuilding;
  // Categoricals only; index 0 is always "unknown".
  std::vector<std::string> vocabulary;
};

struct FeatureSchema {
  FeatureSet set = FeatureSet::kExpanded18;
  std::vector<FeatureDescriptor> features;

  std::size_t size() const { return features.size(); }
  bool IsCategorical(std::size_t j) const {
    return features[j].kind == FeatureKind::kCategorical;
  }
  std::optional<std::size_t> IndexOf(std::string_view name) const;
  std::vector<std::string> Names() const;
  // Stable hash of names, kinds and vocabularies.
  std::string Fingerprint() const;
};

// Vocabularies come from the catalog's layer bindings; roles without one get
// {"unknown"} only.
FeatureSchema MakeSchema(FeatureSet set, const LayerCatalog& catalog);
FeatureSchema MakeSchema(FeatureSet set);

// Horn 3x3 slope in percent. Border cells and cells touching nodata are
// nodata. Throws GridTooSmall below 3x3.
RasterGrid DeriveSlopeRaster(const RasterGrid& elevation);

// Nearest-cell lookup; the east and south edges belong to the last cell.
// Throws OutOfExtent or NoDataCell.
double SampleRaster(const RasterGrid& grid, const GeoPoint& p);

struct PrepareOptions {
  bool densify_lines = false;  // insert vertices every 100 m along lines
};

// Hub indexes and rasters for every role the schema needs.
class PreparedLayers {
 public:
  PreparedLayers() = default;

  // Loads the roles `schema` needs from `catalog`. Throws MissingLayer.
  static PreparedLayers Load(const LayerCatalog& catalog, const FeatureSchema& schema,
                             const PrepareOptions& options = {});

  void SetHubs(Role role, std::vector<Hub> hubs);
  void SetRaster(Role role, RasterGrid grid);  // kPopulation or kElevation

  const HubIndex& hubs(Role role) const;
  const RasterGrid& population() const;
  const RasterGrid& elevation() const;
  const RasterGrid& slope() const;

 private:
  std::map<Role, std::shared_ptr<const HubIndex>> hubs_;
  std::optional<RasterGrid> population_, elevation_, slope_;
};

// Hub sets per geometry kind: polygon centroids, line vertices (optionally
// densified), points as-is. `category_attribute` fills Hub::category.
std::vector<Hub> HubsFromPolygons(const std::vector<PolygonFeature>& polys,
                                  const std::optional<std::string>& category_attribute);
std::vector<Hub> HubsFromLines(const std::vector<PolylineFeature>& lines, bool densify);
std::vector<Hub> HubsFromPoints(const std::vector<PointFeature>& points,
                                const std::optional<std::string>& category_attribute);
std::vector<Hub> HubsFromBorder(const std::vector<PolygonFeature>& border);
std::vector<Hub> HubsFromConflicts(const std::vector<ConflictEvent>& events);

// Values aligned to the schema; categoricals as vocabulary indices.
Eigen::VectorXd FeaturizePoint(const GeoPoint& p, const PreparedLayers& layers,
                               const FeatureSchema& schema);

struct LabeledMatrix {
  FeatureSchema schema;
  Eigen::MatrixXd X;       // rows x features
  Eigen::VectorXd labels;  // 0 or 1
  std::vector<SampleId> ids;
  std::vector<GeoPoint> locations;
  std::vector<bool> training;
  Eigen::VectorXd mean, stddev;  // over training rows; stddev 0 is stored as 1

  Eigen::Index rows() const { return X.rows(); }
};

// Rows in id order. Every failing sample is collected and reported through
// one FeaturizationFailed error. An empty mask marks every row as training.
LabeledMatrix BuildMatrix(const SampleSet& samples, const PreparedLayers& layers,
                          const FeatureSchema& schema,
                          const std::vector<bool>& training_mask = {});

// Recomputes mean/stddev from the rows flagged in `training`.
void ComputeColumnStats(LabeledMatrix& m);

// Subset of rows, keeping schema and stats.
LabeledMatrix SelectRows(const LabeledMatrix& m, const std::vector<Eigen::Index>& rows);

// Keeps only the named columns in the given order (base7 from expanded18).
LabeledMatrix ProjectColumns(const LabeledMatrix& m, const FeatureSchema& target);

// CSV id,lon,lat,label,<features> plus `<path>.json` with schema and stats.
void WriteMatrix(const std::filesystem::path& csv_path, const LabeledMatrix& m);
LabeledMatrix ReadMatrix(const std::filesystem::path& csv_path);

}  // namespace deskaid
