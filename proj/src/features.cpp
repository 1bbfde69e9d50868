// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "deskaid/common.hpp"

namespace deskaid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kMetersPerDegree = std::numbers::pi / 180.0 * kEarthRadiusMeters;
constexpr double kDensifySpacing = 100.0;

struct TableRow {
  const char* name;
  FeatureKind kind;
  const char* unit;
  Role role;
  bool base;
};

// Expanded order: continuous features first, categoricals last.
constexpr TableRow kTable[] = {
    {"dist_building", FeatureKind::kContinuous, "m", Role::kBuilding, true},
    {"dist_financial", FeatureKind::kContinuous, "m", Role::kFinancial, false},
    {"dist_education", FeatureKind::kContinuous, "m", Role::kEducation, false},
    {"dist_airport", FeatureKind::kContinuous, "m", Role::kAirport, false},
    {"dist_health", FeatureKind::kContinuous, "m", Role::kHealth, false},
    {"dist_road", FeatureKind::kContinuous, "m", Role::kRoad, true},
    {"dist_waterway", FeatureKind::kContinuous, "m", Role::kWaterway, true},
    {"dist_controlled_area", FeatureKind::kContinuous, "m", Role::kControlledArea, false},
    {"dist_conflict", FeatureKind::kContinuous, "m", Role::kConflict, false},
    {"estimated_deaths", FeatureKind::kContinuous, "count", Role::kConflict, false},
    {"dist_border", FeatureKind::kContinuous, "m", Role::kBorder, true},
    {"population_density", FeatureKind::kContinuous, "persons/km2", Role::kPopulation, true},
    {"elevation", FeatureKind::kContinuous, "m", Role::kElevation, true},
    {"slope", FeatureKind::kContinuous, "%", Role::kElevation, true},
    {"education_type", FeatureKind::kCategorical, "", Role::kEducation, false},
    {"airport_type", FeatureKind::kCategorical, "", Role::kAirport, false},
    {"health_type", FeatureKind::kCategorical, "", Role::kHealth, false},
    {"controlled_area_authority", FeatureKind::kCategorical, "", Role::kControlledArea, false},
};

bool IsRasterRole(Role r) { return r == Role::kPopulation || r == Role::kElevation; }

bool IsNoData(const RasterGrid& g, double v) {
  return std::abs(v - g.nodata) <= 1e-9 * std::max(1.0, std::abs(g.nodata));
}

std::size_t VocabularyIndex(const FeatureDescriptor& d, const std::string& category) {
  for (std::size_t k = 1; k < d.vocabulary.size(); ++k) {
    if (d.vocabulary[k] == category) return k;
  }
  return 0;
}

std::optional<std::string> Category(const Attributes& attrs,
                                    const std::optional<std::string>& key) {
  if (!key) return std::nullopt;
  auto it = attrs.find(*key);
  if (it == attrs.end()) return std::nullopt;
  return it->second;
}

}  // namespace

std::string_view FeatureSetName(FeatureSet set) {
  return set == FeatureSet::kBase7 ? "base7" : "expanded18";
}

FeatureSet ParseFeatureSet(std::string_view name) {
  if (name == "base7") return FeatureSet::kBase7;
  if (name == "expanded18") return FeatureSet::kExpanded18;
  throw Error(ErrorCode::kConfig, "unknown feature set '" + std::string(name) + "'");
}

std::optional<std::size_t> FeatureSchema::IndexOf(std::string_view name) const {
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (features[j].name == name) return j;
  }
  return std::nullopt;
}

std::vector<std::string> FeatureSchema::Names() const {
  std::vector<std::string> names;
  for (const auto& f : features) names.push_back(f.name);
  return names;
}

std::string FeatureSchema::Fingerprint() const {
  std::string text(FeatureSetName(set));
  for (const auto& f : features) {
    text += '|' + f.name + (f.kind == FeatureKind::kCategorical ? ":c" : ":n");
    for (const auto& v : f.vocabulary) text += ',' + v;
  }
  return deskaid::Fingerprint(text);
}

FeatureSchema MakeSchema(FeatureSet set, const LayerCatalog& catalog) {
  FeatureSchema schema;
  schema.set = set;
  for (const auto& row : kTable) {
    if (set == FeatureSet::kBase7 && !row.base) continue;
    FeatureDescriptor d{row.name, row.kind, row.unit, row.role, {}};
    if (row.kind == FeatureKind::kCategorical) {
      d.vocabulary.push_back("unknown");
      if (catalog.Has(row.role)) {
        for (const auto& v : catalog.at(row.role).vocabulary) {
          if (v != "unknown") d.vocabulary.push_back(v);
        }
      }
    }
    schema.features.push_back(std::move(d));
  }
  return schema;
}

FeatureSchema MakeSchema(FeatureSet set) { return MakeSchema(set, LayerCatalog{}); }

RasterGrid DeriveSlopeRaster(const RasterGrid& elevation) {
  if (elevation.nrows < 3 || elevation.ncols < 3) {
    throw Error(ErrorCode::kGridTooSmall, "slope needs at least a 3x3 elevation grid");
  }
  RasterGrid slope = elevation;
  std::fill(slope.values.begin(), slope.values.end(), elevation.nodata);
  const double dy = elevation.cellsize * kMetersPerDegree;
  for (int r = 1; r + 1 < elevation.nrows; ++r) {
    const double dx = dy * std::cos(elevation.RowCenterLat(r) * std::numbers::pi / 180.0);
    for (int c = 1; c + 1 < elevation.ncols; ++c) {
      double z[3][3];
      bool valid = true;
      for (int i = 0; i < 3 && valid; ++i) {
        for (int j = 0; j < 3; ++j) {
          z[i][j] = elevation.at(r - 1 + i, c - 1 + j);
          if (IsNoData(elevation, z[i][j])) {
            valid = false;
            break;
          }
        }
      }
      if (!valid) continue;
      const double dzdx = ((z[0][2] + 2 * z[1][2] + z[2][2]) - (z[0][0] + 2 * z[1][0] + z[2][0])) /
                          (8 * dx);
      const double dzdy = ((z[2][0] + 2 * z[2][1] + z[2][2]) - (z[0][0] + 2 * z[0][1] + z[0][2])) /
                          (8 * dy);
      slope.at(r, c) = 100.0 * std::sqrt(dzdx * dzdx + dzdy * dzdy);
    }
  }
  return slope;
}

double SampleRaster(const RasterGrid& grid, const GeoPoint& p) {
  const double east = grid.xllcorner + grid.ncols * grid.cellsize;
  const double north = grid.yllcorner + grid.nrows * grid.cellsize;
  if (!(p.lon >= grid.xllcorner && p.lon <= east && p.lat >= grid.yllcorner &&
        p.lat <= north)) {
    throw Error(ErrorCode::kOutOfExtent, "point (" + FormatDouble(p.lon) + ", " +
                                             FormatDouble(p.lat) + ") outside raster extent");
  }
  const int col = std::min(grid.ncols - 1,
                           static_cast<int>(std::floor((p.lon - grid.xllcorner) / grid.cellsize)));
  const int row = std::min(grid.nrows - 1,
                           static_cast<int>(std::floor((north - p.lat) / grid.cellsize)));
  const double v = grid.at(row, col);
  if (IsNoData(grid, v)) {
    throw Error(ErrorCode::kNoDataCell, "nodata cell at row " + std::to_string(row) +
                                            ", col " + std::to_string(col));
  }
  return v;
}

std::vector<Hub> HubsFromPolygons(const std::vector<PolygonFeature>& polys,
                                  const std::optional<std::string>& category_attribute) {
  std::vector<Hub> hubs;
  hubs.reserve(polys.size());
  for (std::size_t i = 0; i < polys.size(); ++i) {
    Hub h;
    h.location = PolygonCentroid(polys[i]);
    h.id = static_cast<HubId>(i);
    h.category = Category(polys[i].attributes, category_attribute).value_or("");
    hubs.push_back(std::move(h));
  }
  return hubs;
}

std::vector<Hub> HubsFromLines(const std::vector<PolylineFeature>& lines, bool densify) {
  std::vector<Hub> hubs;
  for (const auto& line : lines) {
    std::vector<GeoPoint> v = ExtractVertices(line);
    if (densify) v = Densify(v, kDensifySpacing);
    for (const auto& p : v) {
      Hub h;
      h.location = p;
      h.id = static_cast<HubId>(hubs.size());
      hubs.push_back(std::move(h));
    }
  }
  return hubs;
}

std::vector<Hub> HubsFromPoints(const std::vector<PointFeature>& points,
                                const std::optional<std::string>& category_attribute) {
  std::vector<Hub> hubs;
  hubs.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    Hub h;
    h.location = points[i].location;
    h.id = static_cast<HubId>(i);
    h.category = Category(points[i].attributes, category_attribute).value_or("");
    hubs.push_back(std::move(h));
  }
  return hubs;
}

std::vector<Hub> HubsFromBorder(const std::vector<PolygonFeature>& border) {
  std::vector<Hub> hubs;
  auto add_ring = [&](const Ring& ring) {
    for (const auto& p : ExtractVertices(ring)) {
      Hub h;
      h.location = p;
      h.id = static_cast<HubId>(hubs.size());
      hubs.push_back(std::move(h));
    }
  };
  for (const auto& poly : border) {
    add_ring(poly.exterior);
    for (const auto& hole : poly.holes) add_ring(hole);
  }
  return hubs;
}

std::vector<Hub> HubsFromConflicts(const std::vector<ConflictEvent>& events) {
  std::vector<Hub> hubs;
  hubs.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    Hub h;
    h.location = events[i].location;
    h.id = static_cast<HubId>(i);
    h.payload = events[i].estimated_deaths;
    hubs.push_back(std::move(h));
  }
  return hubs;
}

PreparedLayers PreparedLayers::Load(const LayerCatalog& catalog, const FeatureSchema& schema,
                                    const PrepareOptions& options) {
  std::vector<Role> roles;
  for (const auto& f : schema.features) {
    if (std::find(roles.begin(), roles.end(), f.role) == roles.end()) roles.push_back(f.role);
  }
  PreparedLayers layers;
  for (Role role : roles) {
    const LayerBinding& b = catalog.at(role);
    if (IsRasterRole(role)) {
      layers.SetRaster(role, ParseAsciiGrid(b.path));
      continue;
    }
    if (role == Role::kConflict) {
      layers.SetHubs(role, HubsFromConflicts(ParseConflictCsv(b.path)));
      continue;
    }
    const VectorLayer layer = ParseGeoJsonLayer(b.path, b.kind);
    std::vector<Hub> hubs;
    if (const auto* polys = std::get_if<std::vector<PolygonFeature>>(&layer)) {
      hubs = role == Role::kBorder ? HubsFromBorder(*polys)
                                   : HubsFromPolygons(*polys, b.category_attribute);
    } else if (const auto* lines = std::get_if<std::vector<PolylineFeature>>(&layer)) {
      hubs = HubsFromLines(*lines, options.densify_lines);
    } else {
      hubs = HubsFromPoints(std::get<std::vector<PointFeature>>(layer), b.category_attribute);
    }
    layers.SetHubs(role, std::move(hubs));
  }
  return layers;
}

void PreparedLayers::SetHubs(Role role, std::vector<Hub> hubs) {
  hubs_[role] = std::make_shared<const HubIndex>(std::move(hubs));
}

void PreparedLayers::SetRaster(Role role, RasterGrid grid) {
  if (role == Role::kPopulation) {
    population_ = std::move(grid);
  } else if (role == Role::kElevation) {
    slope_ = DeriveSlopeRaster(grid);
    elevation_ = std::move(grid);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "role '" + std::string(RoleName(role)) + "' is not a raster role");
  }
}

const HubIndex& PreparedLayers::hubs(Role role) const {
  auto it = hubs_.find(role);
  if (it == hubs_.end()) {
    throw Error(ErrorCode::kMissingLayer, std::string(RoleName(role)));
  }
  return *it->second;
}

const RasterGrid& PreparedLayers::population() const {
  if (!population_) throw Error(ErrorCode::kMissingLayer, "population");
  return *population_;
}

const RasterGrid& PreparedLayers::elevation() const {
  if (!elevation_) throw Error(ErrorCode::kMissingLayer, "elevation");
  return *elevation_;
}

const RasterGrid& PreparedLayers::slope() const {
  if (!slope_) throw Error(ErrorCode::kMissingLayer, "elevation");
  return *slope_;
}

Eigen::VectorXd FeaturizePoint(const GeoPoint& p, const PreparedLayers& layers,
                               const FeatureSchema& schema) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(schema.size()));
  std::map<Role, NearestHub> nearest;
  auto nearest_for = [&](Role role) -> const NearestHub& {
    auto it = nearest.find(role);
    if (it == nearest.end()) it = nearest.emplace(role, layers.hubs(role).Nearest(p)).first;
    return it->second;
  };
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const FeatureDescriptor& d = schema.features[j];
    double v = 0;
    if (d.kind == FeatureKind::kCategorical) {
      v = static_cast<double>(VocabularyIndex(d, nearest_for(d.role).category));
    } else if (d.name == "population_density") {
      v = SampleRaster(layers.population(), p);
    } else if (d.name == "elevation") {
      v = SampleRaster(layers.elevation(), p);
    } else if (d.name == "slope") {
      v = SampleRaster(layers.slope(), p);
    } else if (d.name == "estimated_deaths") {
      v = nearest_for(d.role).payload;
    } else {
      v = nearest_for(d.role).distance;
    }
    out[static_cast<Eigen::Index>(j)] = v;
  }
  return out;
}

void ComputeColumnStats(LabeledMatrix& m) {
  const Eigen::Index p = m.X.cols();
  m.mean = Eigen::VectorXd::Zero(p);
  m.stddev = Eigen::VectorXd::Ones(p);
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m.training[i]) {
      m.mean += m.X.row(i).transpose();
      ++n;
    }
  }
  if (n == 0) return;
  m.mean /= static_cast<double>(n);
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m.training[i]) ss += (m.X.row(i).transpose() - m.mean).cwiseAbs2();
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd = std::sqrt(ss[j] / static_cast<double>(n));
    m.stddev[j] = sd > 0 ? sd : 1.0;
  }
}

LabeledMatrix BuildMatrix(const SampleSet& samples, const PreparedLayers& layers,
                          const FeatureSchema& schema,
                          const std::vector<bool>& training_mask) {
  if (samples.points.empty()) throw Error(ErrorCode::kInvalidArgument, "no samples");
  if (!training_mask.empty() && training_mask.size() != samples.points.size()) {
    throw Error(ErrorCode::kLengthMismatch, "training mask length differs from sample count");
  }
  std::vector<std::size_t> order(samples.points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples.points[a].id < samples.points[b].id;
  });

  const auto n = static_cast<Eigen::Index>(order.size());
  LabeledMatrix m;
  m.schema = schema;
  m.X.resize(n, static_cast<Eigen::Index>(schema.size()));
  m.labels.resize(n);
  m.ids.resize(order.size());
  m.locations.resize(order.size());
  m.training.resize(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    m.training[r] = training_mask.empty() || training_mask[order[r]];
  }
  std::vector<std::string> failures(order.size());
  ParallelFor(order.size(), [&](std::size_t r) {
    const SamplePoint& s = samples.points[order[r]];
    const auto row = static_cast<Eigen::Index>(r);
    m.ids[r] = s.id;
    m.locations[r] = s.location;
    m.labels[row] = s.label == Label::kHazard ? 1.0 : 0.0;
    try {
      m.X.row(row) = FeaturizePoint(s.location, layers, schema).transpose();
    } catch (const Error& e) {
      failures[r] = e.what();
    }
  });

  std::string report;
  std::size_t failed = 0;
  for (std::size_t r = 0; r < failures.size(); ++r) {
    if (failures[r].empty()) continue;
    if (failed < 10) report += "\n  sample " + std::to_string(m.ids[r]) + ": " + failures[r];
    ++failed;
  }
  if (failed > 0) {
    throw Error(ErrorCode::kFeaturizationFailed,
                std::to_string(failed) + " of " + std::to_string(order.size()) +
                    " samples failed" + report);
  }
  ComputeColumnStats(m);
  return m;
}

LabeledMatrix SelectRows(const LabeledMatrix& m, const std::vector<Eigen::Index>& rows) {
  LabeledMatrix out;
  out.schema = m.schema;
  out.mean = m.mean;
  out.stddev = m.stddev;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.X.resize(n, m.X.cols());
  out.labels.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index r = rows[static_cast<std::size_t>(k)];
    out.X.row(k) = m.X.row(r);
    out.labels[k] = m.labels[r];
    out.ids.push_back(m.ids[static_cast<std::size_t>(r)]);
    out.locations.push_back(m.locations[static_cast<std::size_t>(r)]);
    out.training.push_back(m.training[static_cast<std::size_t>(r)]);
  }
  return out;
}

LabeledMatrix ProjectColumns(const LabeledMatrix& m, const FeatureSchema& target) {
  std::vector<Eigen::Index> cols;
  for (const auto& f : target.features) {
    auto j = m.schema.IndexOf(f.name);
    if (!j) throw Error(ErrorCode::kSchemaMismatch, "column '" + f.name + "' not in matrix");
    cols.push_back(static_cast<Eigen::Index>(*j));
  }
  LabeledMatrix out = m;
  out.schema = target;
  out.X = m.X(Eigen::all, cols);
  out.mean = m.mean(cols);
  out.stddev = m.stddev(cols);
  return out;
}

void WriteMatrix(const fs::path& csv_path, const LabeledMatrix& m) {
  if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + csv_path.string());
    out << "id,lon,lat,label";
    for (const auto& f : m.schema.features) out << ',' << f.name;
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const auto r = static_cast<std::size_t>(i);
      out << m.ids[r] << ',' << FormatDouble(m.locations[r].lon) << ','
          << FormatDouble(m.locations[r].lat) << ',' << static_cast<int>(m.labels[i]);
      for (Eigen::Index j = 0; j < m.X.cols(); ++j) out << ',' << FormatDouble(m.X(i, j));
      out << '\n';
    }
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + csv_path.string());
  }

  json side;
  side["set"] = FeatureSetName(m.schema.set);
  side["fingerprint"] = m.schema.Fingerprint();
  json features = json::array();
  for (const auto& f : m.schema.features) {
    json jf;
    jf["name"] = f.name;
    jf["kind"] = f.kind == FeatureKind::kCategorical ? "categorical" : "continuous";
    jf["unit"] = f.unit;
    jf["role"] = RoleName(f.role);
    if (f.kind == FeatureKind::kCategorical) jf["vocabulary"] = f.vocabulary;
    features.push_back(std::move(jf));
  }
  side["features"] = std::move(features);
  side["mean"] = std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size());
  side["stddev"] = std::vector<double>(m.stddev.data(), m.stddev.data() + m.stddev.size());
  std::vector<int> mask(m.training.begin(), m.training.end());
  side["training"] = mask;
  fs::path side_path = csv_path;
  side_path += ".json";
  std::ofstream out(side_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + side_path.string());
  out << side.dump(2) << '\n';
}

LabeledMatrix ReadMatrix(const fs::path& csv_path) {
  fs::path side_path = csv_path;
  side_path += ".json";
  std::ifstream side_in(side_path, std::ios::binary);
  if (!side_in) throw Error(ErrorCode::kIo, "cannot open " + side_path.string());
  json side;
  try {
    side = json::parse(side_in);
  } catch (const json::parse_error& e) {
    throw ParseError(side_path.string() + ": " + e.what(), 0, e.byte);
  }

  LabeledMatrix m;
  try {
    m.schema.set = ParseFeatureSet(side.at("set").get<std::string>());
    for (const auto& jf : side.at("features")) {
      FeatureDescriptor d;
      d.name = jf.at("name").get<std::string>();
      d.kind = jf.at("kind").get<std::string>() == "categorical" ? FeatureKind::kCategorical
                                                                 : FeatureKind::kContinuous;
      d.unit = jf.value("unit", "");
      d.role = ParseRole(jf.at("role").get<std::string>());
      if (jf.contains("vocabulary")) d.vocabulary = jf["vocabulary"].get<std::vector<std::string>>();
      m.schema.features.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, side_path.string() + ": " + e.what());
  }

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + csv_path.string());
  std::string line;
  std::getline(in, line);
  const std::size_t p = m.schema.size();
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != p + 4) {
      throw ParseError(csv_path.string() + ": expected " + std::to_string(p + 4) + " cells",
                       line_no, 0);
    }
    std::int64_t id = 0;
    GeoPoint loc;
    double label = 0;
    std::vector<double> values(p);
    bool ok = ParseInt64(cells[0], id) && ParseDouble(cells[1], loc.lon) &&
              ParseDouble(cells[2], loc.lat) && ParseDouble(cells[3], label);
    for (std::size_t j = 0; ok && j < p; ++j) ok = ParseDouble(cells[4 + j], values[j]);
    if (!ok) throw ParseError(csv_path.string() + ": bad matrix row", line_no, 0);
    m.ids.push_back(id);
    m.locations.push_back(loc);
    labels.push_back(label);
    rows.push_back(std::move(values));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  m.X.resize(n, static_cast<Eigen::Index>(p));
  m.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m.labels[i] = labels[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < p; ++j) {
      m.X(i, static_cast<Eigen::Index>(j)) = rows[static_cast<std::size_t>(i)][j];
    }
  }
  const auto mask = side.value("training", std::vector<int>(rows.size(), 1));
  if (mask.size() != rows.size()) {
    throw Error(ErrorCode::kCountMismatch, side_path.string() + ": training mask length");
  }
  m.training.assign(mask.begin(), mask.end());
  const auto mean = side.value("mean", std::vector<double>{});
  const auto sd = side.value("stddev", std::vector<double>{});
  if (mean.size() == p && sd.size() == p) {
    m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(p));
    m.stddev = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(p));
  } else {
    ComputeColumnStats(m);
  }
  return m;
}

}  // namespace deskaid
