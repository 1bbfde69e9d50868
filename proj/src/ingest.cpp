// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "deskaid/common.hpp"
#include "json.hpp"

namespace deskaid {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::size_t LineOfOffset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + offset, '\n'));
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

[[noreturn]] void Invalid(const std::string& source, std::size_t feature,
                          const std::string& what) {
  throw Error(ErrorCode::kParse,
              source + ": feature " + std::to_string(feature) + ": " + what);
}

GeoPoint ToPoint(const json& coord, const std::string& source, std::size_t feature) {
  if (!coord.is_array() || coord.size() < 2 || !coord[0].is_number() ||
      !coord[1].is_number()) {
    Invalid(source, feature, "coordinate is not a [lon, lat] pair");
  }
  GeoPoint p{coord[0].get<double>(), coord[1].get<double>()};
  if (!IsValid(p)) Invalid(source, feature, "coordinate out of WGS84 range");
  return p;
}

std::vector<GeoPoint> ToPoints(const json& coords, const std::string& source,
                               std::size_t feature) {
  if (!coords.is_array()) Invalid(source, feature, "coordinates must be an array");
  std::vector<GeoPoint> out;
  out.reserve(coords.size());
  for (const auto& c : coords) out.push_back(ToPoint(c, source, feature));
  return out;
}

Ring ToRing(const json& coords, const std::string& source, std::size_t feature) {
  Ring ring = ToPoints(coords, source, feature);
  if (ring.size() < 4) Invalid(source, feature, "ring has fewer than 4 vertices");
  if (!(ring.front() == ring.back())) Invalid(source, feature, "ring is not closed");
  return ring;
}

PolygonFeature ToPolygon(const json& rings, Attributes attrs,
                         const std::string& source, std::size_t feature) {
  if (!rings.is_array() || rings.empty()) {
    Invalid(source, feature, "polygon without rings");
  }
  PolygonFeature poly;
  poly.exterior = ToRing(rings[0], source, feature);
  for (std::size_t i = 1; i < rings.size(); ++i) {
    poly.holes.push_back(ToRing(rings[i], source, feature));
  }
  poly.attributes = std::move(attrs);
  if (!(PlanarArea(poly) > 0.0)) Invalid(source, feature, "polygon has zero area");
  return poly;
}

PolylineFeature ToPolyline(const json& coords, Attributes attrs,
                           const std::string& source, std::size_t feature) {
  PolylineFeature line;
  line.vertices = ToPoints(coords, source, feature);
  if (line.vertices.size() < 2) Invalid(source, feature, "line has fewer than 2 vertices");
  for (std::size_t i = 1; i < line.vertices.size(); ++i) {
    if (line.vertices[i] == line.vertices[i - 1]) {
      Invalid(source, feature, "line repeats a vertex consecutively");
    }
  }
  line.attributes = std::move(attrs);
  return line;
}

Attributes ToAttributes(const json& props) {
  Attributes out;
  if (!props.is_object()) return out;
  for (const auto& [key, value] : props.items()) {
    if (value.is_null()) continue;
    out[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return out;
}

json PointCoords(const GeoPoint& p) { return json::array({p.lon, p.lat}); }

json LineCoords(const std::vector<GeoPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(PointCoords(p));
  return arr;
}

json Properties(const Attributes& attrs) {
  json props = json::object();
  for (const auto& [k, v] : attrs) props[k] = v;
  return props;
}

json Feature(json geometry, const Attributes& attrs) {
  return json{{"type", "Feature"},
              {"properties", Properties(attrs)},
              {"geometry", std::move(geometry)}};
}

void WriteCollection(const fs::path& path, json features) {
  json doc{{"type", "FeatureCollection"}, {"features", std::move(features)}};
  WriteFile(path, doc.dump() + "\n");
}

}  // namespace

std::string_view GeometryKindName(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::kPoint: return "point";
    case GeometryKind::kLine: return "line";
    case GeometryKind::kPolygon: return "polygon";
  }
  return "?";
}

GeometryKind ParseGeometryKind(std::string_view name) {
  const std::string n = Lower(name);
  if (n == "point") return GeometryKind::kPoint;
  if (n == "line") return GeometryKind::kLine;
  if (n == "polygon") return GeometryKind::kPolygon;
  throw Error(ErrorCode::kConfig, "unknown geometry kind '" + std::string(name) + "'");
}

VectorLayer ParseGeoJsonText(const std::string& text, GeometryKind kind,
                             const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what(), LineOfOffset(text, e.byte), e.byte);
  }
  const json* features = nullptr;
  json single;
  if (doc.is_object() && doc.value("type", "") == "FeatureCollection") {
    auto it = doc.find("features");
    if (it == doc.end() || !it->is_array()) {
      throw Error(ErrorCode::kParse, source + ": FeatureCollection without features array");
    }
    features = &*it;
  } else if (doc.is_object() && doc.value("type", "") == "Feature") {
    single = json::array({doc});
    features = &single;
  } else {
    throw Error(ErrorCode::kParse, source + ": not a GeoJSON FeatureCollection");
  }

  std::vector<PointFeature> points;
  std::vector<PolylineFeature> lines;
  std::vector<PolygonFeature> polygons;
  for (std::size_t i = 0; i < features->size(); ++i) {
    const json& f = (*features)[i];
    if (!f.is_object()) Invalid(source, i, "feature is not an object");
    const json& geom = f.contains("geometry") ? f["geometry"] : json();
    const std::string type = geom.is_object() ? geom.value("type", "") : "";
    const json coords = geom.is_object() && geom.contains("coordinates")
                            ? geom["coordinates"]
                            : json();
    Attributes attrs = ToAttributes(f.contains("properties") ? f["properties"] : json());
    auto mismatch = [&] {
      throw Error(ErrorCode::kGeometryKindMismatch,
                  source + ": feature " + std::to_string(i) + " has geometry '" +
                      (type.empty() ? "null" : type) + "', expected " +
                      std::string(GeometryKindName(kind)));
    };
    switch (kind) {
      case GeometryKind::kPoint:
        if (type == "Point") {
          points.push_back({ToPoint(coords, source, i), attrs});
        } else if (type == "MultiPoint") {
          for (const auto& p : ToPoints(coords, source, i)) points.push_back({p, attrs});
        } else {
          mismatch();
        }
        break;
      case GeometryKind::kLine:
        if (type == "LineString") {
          lines.push_back(ToPolyline(coords, attrs, source, i));
        } else if (type == "MultiLineString" && coords.is_array()) {
          for (const auto& part : coords) lines.push_back(ToPolyline(part, attrs, source, i));
        } else {
          mismatch();
        }
        break;
      case GeometryKind::kPolygon:
        if (type == "Polygon") {
          polygons.push_back(ToPolygon(coords, attrs, source, i));
        } else if (type == "MultiPolygon" && coords.is_array()) {
          for (const auto& part : coords) polygons.push_back(ToPolygon(part, attrs, source, i));
        } else {
          mismatch();
        }
        break;
    }
  }
  const std::size_t count = points.size() + lines.size() + polygons.size();
  if (count == 0) throw Error(ErrorCode::kEmptyLayer, source + ": layer has no features");
  switch (kind) {
    case GeometryKind::kPoint: return points;
    case GeometryKind::kLine: return lines;
    case GeometryKind::kPolygon: return polygons;
  }
  return points;
}

VectorLayer ParseGeoJsonLayer(const fs::path& path, GeometryKind kind) {
  return ParseGeoJsonText(ReadFile(path), kind, path.string());
}

std::vector<PolygonFeature> ReadPolygons(const fs::path& path) {
  return std::get<std::vector<PolygonFeature>>(ParseGeoJsonLayer(path, GeometryKind::kPolygon));
}

std::vector<PolylineFeature> ReadPolylines(const fs::path& path) {
  return std::get<std::vector<PolylineFeature>>(ParseGeoJsonLayer(path, GeometryKind::kLine));
}

std::vector<PointFeature> ReadPoints(const fs::path& path) {
  return std::get<std::vector<PointFeature>>(ParseGeoJsonLayer(path, GeometryKind::kPoint));
}

void WriteGeoJson(const fs::path& path, const std::vector<PolygonFeature>& features) {
  json arr = json::array();
  for (const auto& f : features) {
    json rings = json::array({LineCoords(f.exterior)});
    for (const auto& h : f.holes) rings.push_back(LineCoords(h));
    arr.push_back(Feature(json{{"type", "Polygon"}, {"coordinates", rings}}, f.attributes));
  }
  WriteCollection(path, std::move(arr));
}

void WriteGeoJson(const fs::path& path, const std::vector<PolylineFeature>& features) {
  json arr = json::array();
  for (const auto& f : features) {
    arr.push_back(Feature(
        json{{"type", "LineString"}, {"coordinates", LineCoords(f.vertices)}},
        f.attributes));
  }
  WriteCollection(path, std::move(arr));
}

void WriteGeoJson(const fs::path& path, const std::vector<PointFeature>& features) {
  json arr = json::array();
  for (const auto& f : features) {
    arr.push_back(Feature(
        json{{"type", "Point"}, {"coordinates", PointCoords(f.location)}},
        f.attributes));
  }
  WriteCollection(path, std::move(arr));
}

RasterGrid ParseAsciiGridText(const std::string& text) {
  std::istringstream in(text);
  std::map<std::string, double> header;
  std::string line;
  std::size_t line_no = 0;
  std::streampos body_start = 0;
  while (true) {
    body_start = in.tellg();
    if (!std::getline(in, line)) break;
    ++line_no;
    std::string_view t = Trim(line);
    if (t.empty()) continue;
    if (!std::isalpha(static_cast<unsigned char>(t.front()))) break;
    std::istringstream ls{std::string(t)};
    std::string key, value;
    ls >> key >> value;
    double v = 0;
    if (!ParseDouble(value, v)) {
      throw ParseError("bad header value for '" + key + "'", line_no,
                       static_cast<std::size_t>(body_start));
    }
    header[Lower(key)] = v;
  }

  auto require = [&](const std::string& key) {
    auto it = header.find(key);
    if (it == header.end()) throw Error(ErrorCode::kHeaderMissing, key);
    return it->second;
  };
  RasterGrid grid;
  grid.ncols = static_cast<int>(require("ncols"));
  grid.nrows = static_cast<int>(require("nrows"));
  grid.cellsize = require("cellsize");
  if (header.count("xllcenter")) {
    grid.xllcorner = header["xllcenter"] - grid.cellsize / 2;
  } else {
    grid.xllcorner = require("xllcorner");
  }
  if (header.count("yllcenter")) {
    grid.yllcorner = header["yllcenter"] - grid.cellsize / 2;
  } else {
    grid.yllcorner = require("yllcorner");
  }
  if (header.count("nodata_value")) grid.nodata = header["nodata_value"];
  if (grid.ncols <= 0 || grid.nrows <= 0 || !(grid.cellsize > 0)) {
    throw ParseError("non-positive grid dimensions", 1, 0);
  }

  const std::size_t expected = static_cast<std::size_t>(grid.ncols) * grid.nrows;
  grid.values.reserve(expected);
  const std::size_t begin = body_start < 0 ? text.size() : static_cast<std::size_t>(body_start);
  std::size_t pos = begin;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) break;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    double v = 0;
    if (!ParseDouble(std::string_view(text).substr(pos, end - pos), v)) {
      throw ParseError("bad grid value '" + text.substr(pos, end - pos) + "'",
                       LineOfOffset(text, pos), pos);
    }
    grid.values.push_back(v);
    pos = end;
  }
  if (grid.values.size() != expected) {
    throw Error(ErrorCode::kCountMismatch,
                "expected " + std::to_string(expected) + " values, found " +
                    std::to_string(grid.values.size()));
  }
  return grid;
}

RasterGrid ParseAsciiGrid(const fs::path& path) {
  try {
    return ParseAsciiGridText(ReadFile(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line(), e.offset());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void WriteAsciiGrid(const fs::path& path, const RasterGrid& grid) {
  std::string out;
  out += "ncols " + std::to_string(grid.ncols) + "\n";
  out += "nrows " + std::to_string(grid.nrows) + "\n";
  out += "xllcorner " + FormatDouble(grid.xllcorner) + "\n";
  out += "yllcorner " + FormatDouble(grid.yllcorner) + "\n";
  out += "cellsize " + FormatDouble(grid.cellsize) + "\n";
  out += "NODATA_value " + FormatDouble(grid.nodata) + "\n";
  char buf[32];
  for (int r = 0; r < grid.nrows; ++r) {
    for (int c = 0; c < grid.ncols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.6g", grid.at(r, c));
      if (c > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  WriteFile(path, out);
}

std::vector<ConflictEvent> ParseConflictCsv(const fs::path& path) {
  const std::string text = ReadFile(path);
  std::vector<ConflictEvent> events;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  int lon_col = -1, lat_col = -1, deaths_col = -1;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::size_t line_start = pos;
    std::string_view line = std::string_view(text).substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t s = 0;
    while (true) {
      const std::size_t comma = line.find(',', s);
      cells.push_back(Trim(line.substr(s, comma == std::string_view::npos ? line.npos : comma - s)));
      if (comma == std::string_view::npos) break;
      s = comma + 1;
    }
    if (!have_header) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string name = Lower(cells[i]);
        if (name == "lon") lon_col = static_cast<int>(i);
        if (name == "lat") lat_col = static_cast<int>(i);
        if (name == "deaths") deaths_col = static_cast<int>(i);
      }
      if (lon_col < 0) throw Error(ErrorCode::kMissingColumn, "lon");
      if (lat_col < 0) throw Error(ErrorCode::kMissingColumn, "lat");
      if (deaths_col < 0) throw Error(ErrorCode::kMissingColumn, "deaths");
      have_header = true;
      continue;
    }
    const int needed = std::max({lon_col, lat_col, deaths_col});
    ConflictEvent ev;
    if (static_cast<int>(cells.size()) <= needed ||
        !ParseDouble(cells[lon_col], ev.location.lon) ||
        !ParseDouble(cells[lat_col], ev.location.lat) ||
        !ParseDouble(cells[deaths_col], ev.estimated_deaths)) {
      throw ParseError(path.string() + ": unparseable row", line_no, line_start);
    }
    if (!IsValid(ev.location)) {
      throw ParseError(path.string() + ": coordinate out of range", line_no, line_start);
    }
    if (!std::isfinite(ev.estimated_deaths) || ev.estimated_deaths < 0) {
      throw ParseError(path.string() + ": deaths must be non-negative", line_no, line_start);
    }
    events.push_back(ev);
  }
  if (!have_header) throw Error(ErrorCode::kMissingColumn, "lon");
  return events;
}

void WriteConflictCsv(const fs::path& path, const std::vector<ConflictEvent>& events) {
  std::string out = "lon,lat,deaths\n";
  for (const auto& e : events) {
    out += FormatDouble(e.location.lon) + "," + FormatDouble(e.location.lat) + "," +
           FormatDouble(e.estimated_deaths) + "\n";
  }
  WriteFile(path, out);
}

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kHazard: return "hazard";
    case Role::kBuilding: return "building";
    case Role::kFinancial: return "financial";
    case Role::kEducation: return "education";
    case Role::kAirport: return "airport";
    case Role::kHealth: return "health";
    case Role::kRoad: return "road";
    case Role::kWaterway: return "waterway";
    case Role::kControlledArea: return "controlled_area";
    case Role::kConflict: return "conflict";
    case Role::kBorder: return "border";
    case Role::kPopulation: return "population";
    case Role::kElevation: return "elevation";
  }
  return "?";
}

Role ParseRole(std::string_view name) {
  for (Role r : kAllRoles) {
    if (RoleName(r) == name) return r;
  }
  throw Error(ErrorCode::kConfig, "unknown layer role '" + std::string(name) + "'");
}

const LayerBinding& LayerCatalog::at(Role role) const {
  auto it = layers.find(role);
  if (it == layers.end()) {
    throw Error(ErrorCode::kMissingLayer, std::string(RoleName(role)));
  }
  return it->second;
}

namespace {

LayerFormat DefaultFormat(Role role, const fs::path& path) {
  if (role == Role::kConflict) return LayerFormat::kConflictCsv;
  if (role == Role::kPopulation || role == Role::kElevation) return LayerFormat::kAsciiGrid;
  const std::string ext = Lower(path.extension().string());
  if (ext == ".csv") return LayerFormat::kConflictCsv;
  if (ext == ".asc") return LayerFormat::kAsciiGrid;
  return LayerFormat::kGeoJson;
}

GeometryKind DefaultKind(Role role) {
  switch (role) {
    case Role::kHazard:
    case Role::kBuilding:
    case Role::kControlledArea:
    case Role::kBorder:
      return GeometryKind::kPolygon;
    case Role::kRoad:
    case Role::kWaterway:
      return GeometryKind::kLine;
    default:
      return GeometryKind::kPoint;
  }
}

std::string_view FormatName(LayerFormat f) {
  switch (f) {
    case LayerFormat::kGeoJson: return "geojson";
    case LayerFormat::kConflictCsv: return "conflict_csv";
    case LayerFormat::kAsciiGrid: return "ascii_grid";
  }
  return "?";
}

LayerFormat ParseFormat(std::string_view s) {
  if (s == "geojson") return LayerFormat::kGeoJson;
  if (s == "conflict_csv") return LayerFormat::kConflictCsv;
  if (s == "ascii_grid") return LayerFormat::kAsciiGrid;
  throw Error(ErrorCode::kConfig, "unknown layer format '" + std::string(s) + "'");
}

}  // namespace

LayerCatalog LoadCatalog(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kConfig, "catalog file not found: " + path.string());
  }
  json doc;
  try {
    doc = json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  const fs::path base = fs::absolute(path).parent_path();
  if (!doc.contains("layers") || !doc["layers"].is_object()) {
    throw Error(ErrorCode::kConfig, path.string() + ": missing 'layers' object");
  }
  LayerCatalog catalog;
  for (const auto& [name, spec] : doc["layers"].items()) {
    const Role role = ParseRole(name);
    if (!spec.is_object() || !spec.contains("path")) {
      throw Error(ErrorCode::kConfig, "layer '" + name + "' has no path");
    }
    LayerBinding b;
    b.path = spec["path"].get<std::string>();
    if (b.path.is_relative()) b.path = (base / b.path).lexically_normal();
    b.format = spec.contains("format") ? ParseFormat(spec["format"].get<std::string>())
                                       : DefaultFormat(role, b.path);
    b.kind = spec.contains("kind") ? ParseGeometryKind(spec["kind"].get<std::string>())
                                   : DefaultKind(role);
    if (spec.contains("category_attribute")) {
      b.category_attribute = spec["category_attribute"].get<std::string>();
      if (!spec.contains("vocabulary") || !spec["vocabulary"].is_array() ||
          spec["vocabulary"].empty()) {
        throw Error(ErrorCode::kConfig,
                    "layer '" + name + "' declares a category without a vocabulary");
      }
    }
    if (spec.contains("vocabulary")) {
      b.vocabulary = spec["vocabulary"].get<std::vector<std::string>>();
    }
    if (!fs::exists(b.path)) {
      throw Error(ErrorCode::kConfig,
                  "layer '" + name + "' file not found: " + b.path.string());
    }
    catalog.layers[role] = std::move(b);
  }
  return catalog;
}

void SaveCatalog(const fs::path& path, const LayerCatalog& catalog) {
  const fs::path base = fs::absolute(path).parent_path();
  json layers = json::object();
  for (const auto& [role, b] : catalog.layers) {
    json spec;
    fs::path p = b.path;
    if (p.is_absolute()) {
      const fs::path rel = p.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    spec["path"] = p.generic_string();
    spec["format"] = FormatName(b.format);
    if (b.format == LayerFormat::kGeoJson) spec["kind"] = GeometryKindName(b.kind);
    if (b.category_attribute) spec["category_attribute"] = *b.category_attribute;
    if (!b.vocabulary.empty()) spec["vocabulary"] = b.vocabulary;
    layers[std::string(RoleName(role))] = spec;
  }
  WriteFile(path, json{{"layers", layers}}.dump(2) + "\n");
}

}  // namespace deskaid
