// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "deskaid/evaluation.hpp"
#include "deskaid/geo_graph.hpp"
#include "model_json.hpp"

namespace deskaid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Shallow walker over a JSON object that remembers which keys were read.
class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw Error(ErrorCode::kConfig, Name("") + " must be an object");
  }
  bool Has(const char* key) {
    if (!obj_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }
  const json& At(const char* key) { return obj_.at(key); }

  template <typename T>
  void Take(const char* key, T& dst) {
    if (!Has(key)) return;
    try {
      dst = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::kConfig, "bad value for " + Name(key));
    }
  }

  void Finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw Error(ErrorCode::kConfig, "unknown key " + Name(it.key()));
    }
  }

  std::string Name(const std::string& key) const {
    return "'" + where_ + (where_.empty() || key.empty() ? "" : ".") + key + "'";
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename Fn>
void ForEachWorldField(WorldConfig& w, Fn fn) {
  fn("side_km", w.side_km);
  fn("border_spacing_m", w.border_spacing_m);
  fn("hazards", w.hazards);
  fn("hazard_min_extent_m", w.hazard_min_extent_m);
  fn("hazard_max_extent_m", w.hazard_max_extent_m);
  fn("hazard_min_aspect", w.hazard_min_aspect);
  fn("hazard_max_aspect", w.hazard_max_aspect);
  fn("hazard_min_width_m", w.hazard_min_width_m);
  fn("hazard_max_width_m", w.hazard_max_width_m);
  fn("roads", w.roads);
  fn("waterways", w.waterways);
  fn("conflict_clusters", w.conflict_clusters);
  fn("conflict_events", w.conflict_events);
  fn("towns", w.towns);
  fn("town_buildings", w.town_buildings);
  fn("rural_buildings", w.rural_buildings);
  fn("financial", w.financial);
  fn("education", w.education);
  fn("airports", w.airports);
  fn("health", w.health);
  fn("controlled_areas", w.controlled_areas);
  fn("strength", w.strength);
  fn("road_scale_m", w.road_scale_m);
  fn("conflict_scale_m", w.conflict_scale_m);
  fn("preferred_slope_pct", w.preferred_slope_pct);
  fn("slope_scale_pct", w.slope_scale_pct);
  fn("planted_building_spacing_m", w.planted_building_spacing_m);
  fn("planted_building_min_offset_m", w.planted_building_min_offset_m);
  fn("planted_building_max_offset_m", w.planted_building_max_offset_m);
  fn("raster_cellsize_deg", w.raster_cellsize_deg);
  fn("raster_margin_km", w.raster_margin_km);
  fn("study_area_km", w.study_area_km);
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void RequireFile(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kConfig, what + " not found: " + path.string());
  }
}

// Refuses to overwrite a stage's outputs unless forced.
void CheckFresh(const PipelineConfig& cfg, const std::vector<fs::path>& outputs) {
  if (cfg.force) return;
  for (const auto& p : outputs) {
    if (fs::exists(p)) {
      throw Error(ErrorCode::kConfig, p.string() + " already exists; rerun with --force");
    }
  }
}

ArtifactPaths Paths(const PipelineConfig& cfg) { return {cfg.out_dir}; }

LayerCatalog OpenCatalog(const PipelineConfig& cfg) {
  RequireFile(cfg.catalog, "catalog file");
  return LoadCatalog(cfg.catalog);
}

PolygonFeature FirstPolygon(const fs::path& path) {
  auto polys = ReadPolygons(path);
  return polys.front();
}

std::string SampleFileStem(Strategy s) { return "eval_" + std::string(StrategyName(s)); }

// Names of the sample sets written by the sample stage, in processing order.
std::vector<std::string> SampleSetNames(const PipelineConfig& cfg) {
  std::vector<std::string> names = {"train", "test"};
  for (Strategy s : cfg.evaluation_sets) names.push_back(SampleFileStem(s));
  names.push_back("target");
  return names;
}

json Listing(const std::vector<fs::path>& paths) {
  json out = json::array();
  for (const auto& p : paths) out.push_back(p.generic_string());
  return out;
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

struct Prediction {
  SampleId id;
  GeoPoint location;
  int label;
  double probability;
};

std::vector<Prediction> ReadPredictions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (Trim(line) != "id,lon,lat,label,probability") {
    throw ParseError("unexpected header in " + path.string(), 1, 0);
  }
  std::vector<Prediction> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    Prediction p{};
    std::int64_t id = 0, label = 0;
    if (cells.size() != 5 || !ParseInt64(Trim(cells[0]), id) ||
        !ParseDouble(Trim(cells[1]), p.location.lon) ||
        !ParseDouble(Trim(cells[2]), p.location.lat) || !ParseInt64(Trim(cells[3]), label) ||
        !ParseDouble(Trim(cells[4]), p.probability)) {
      throw ParseError("malformed prediction row in " + path.string(), line_no, 0);
    }
    p.id = id;
    p.label = static_cast<int>(label);
    out.push_back(p);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void ApplyOverride(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::kConfig, "override must look like key=value: " + assignment);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw Error(ErrorCode::kConfig, "empty key segment in " + key);
    if (!node->is_object()) *node = json::object();
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

PipelineConfig ParsePipelineConfig(const json& doc, const fs::path& base_dir) {
  PipelineConfig cfg;
  Reader top(doc, "");
  if (top.Has("out_dir")) cfg.out_dir = Resolve(base_dir, top.At("out_dir").get<std::string>());
  else cfg.out_dir = Resolve(base_dir, "out");
  cfg.world_dir = cfg.out_dir / "world";
  if (top.Has("world_dir")) cfg.world_dir = Resolve(base_dir, top.At("world_dir").get<std::string>());
  cfg.catalog = cfg.world_dir / "catalog.json";
  if (top.Has("catalog")) cfg.catalog = Resolve(base_dir, top.At("catalog").get<std::string>());
  top.Take("seed", cfg.seed);
  cfg.sampling_seed = cfg.split_seed = cfg.train.seed = cfg.seed;
  top.Take("force", cfg.force);

  if (top.Has("seeds")) {
    Reader r(top.At("seeds"), "seeds");
    r.Take("sampling", cfg.sampling_seed);
    r.Take("split", cfg.split_seed);
    r.Take("model", cfg.train.seed);
    r.Finish();
  }

  if (top.Has("world")) {
    Reader r(top.At("world"), "world");
    r.Take("seed", cfg.world.seed);
    if (r.Has("center")) {
      std::array<double, 2> c{};
      try {
        c = r.At("center").get<std::array<double, 2>>();
      } catch (const json::exception&) {
        throw Error(ErrorCode::kConfig, "'world.center' must be [lon, lat]");
      }
      cfg.world.center = {c[0], c[1]};
    }
    ForEachWorldField(cfg.world, [&](const char* key, auto& field) { r.Take(key, field); });
    r.Finish();
  }
  ValidateWorldConfig(cfg.world);

  if (top.Has("sampling")) {
    Reader r(top.At("sampling"), "sampling");
    if (r.Has("mix")) cfg.mix = ParseMix(r.At("mix").get<std::string>());
    r.Take("hybrid_weights", cfg.hybrid_weights);
    r.Take("positives_per_polygon", cfg.positives_per_polygon);
    r.Take("hard_negatives_per_polygon", cfg.hard_negatives_per_polygon);
    r.Take("random_pool_factor", cfg.random_pool_factor);
    if (r.Has("evaluation_sets")) {
      cfg.evaluation_sets.clear();
      for (const auto& name : r.At("evaluation_sets")) {
        try {
          cfg.evaluation_sets.push_back(ParseStrategy(name.get<std::string>()));
        } catch (const Error&) {
          throw Error(ErrorCode::kConfig, "unknown evaluation set " + name.dump());
        }
      }
    }
    r.Take("test_fraction", cfg.test_fraction);
    if (r.Has("split_region") && !r.At("split_region").is_null()) {
      cfg.split_region = Resolve(base_dir, r.At("split_region").get<std::string>());
    }
    r.Finish();
  }
  for (Strategy s : cfg.evaluation_sets) {
    if (s == Strategy::kPositive || s == Strategy::kGrid || s == Strategy::kHnCustom) {
      throw Error(ErrorCode::kConfig, "evaluation sets must be random, hn50, hn500 or hn5000");
    }
  }
  if (cfg.positives_per_polygon < 1 || cfg.hard_negatives_per_polygon < 1) {
    throw Error(ErrorCode::kConfig, "per-polygon sample counts must be >= 1");
  }
  if (!(cfg.random_pool_factor >= 1.0)) {
    throw Error(ErrorCode::kConfig, "random_pool_factor must be >= 1");
  }
  if (!(cfg.test_fraction > 0 && cfg.test_fraction < 1)) {
    throw Error(ErrorCode::kConfig, "test_fraction must lie in (0, 1)");
  }

  if (top.Has("features")) {
    Reader r(top.At("features"), "features");
    if (r.Has("set")) {
      try {
        cfg.feature_set = ParseFeatureSet(r.At("set").get<std::string>());
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, e.what());
      }
    }
    r.Take("densify_lines", cfg.densify_lines);
    r.Finish();
  }

  if (top.Has("model")) {
    Reader r(top.At("model"), "model");
    if (r.Has("kind")) cfg.model = ParseModelKind(r.At("kind").get<std::string>());
    r.Take("graph_k", cfg.graph_k);
    if (r.Has("params")) {
      if (r.At("params").contains("seed")) {
        throw Error(ErrorCode::kConfig, "set the model seed through 'seeds.model'");
      }
      internal::MergeTrainConfig(r.At("params"), cfg.train);
    }
    r.Finish();
  }
  if (cfg.graph_k < 1) throw Error(ErrorCode::kConfig, "graph_k must be >= 1");

  if (top.Has("riskmap")) {
    Reader r(top.At("riskmap"), "riskmap");
    if (r.Has("region") && !r.At("region").is_null()) {
      cfg.target_region = Resolve(base_dir, r.At("region").get<std::string>());
    }
    r.Take("grid_spacing_m", cfg.grid_spacing_m);
    r.Take("thresholds", cfg.thresholds);
    r.Finish();
  }
  try {
    ValidateThresholds(cfg.thresholds);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  if (!(cfg.grid_spacing_m > 0)) throw Error(ErrorCode::kConfig, "grid_spacing_m must be > 0");
  top.Finish();
  return cfg;
}

PipelineConfig LoadPipelineConfig(const fs::path& path, const std::vector<std::string>& overrides) {
  RequireFile(path, "config file");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config file " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kConfig, "config is not valid JSON: " + path.string());
  for (const auto& o : overrides) ApplyOverride(doc, o);
  return ParsePipelineConfig(doc, fs::absolute(path).parent_path());
}

json PipelineConfigToJson(const PipelineConfig& cfg) {
  json j;
  j["out_dir"] = cfg.out_dir.generic_string();
  j["world_dir"] = cfg.world_dir.generic_string();
  j["catalog"] = cfg.catalog.generic_string();
  j["seed"] = cfg.seed;
  j["seeds"] = {{"sampling", cfg.sampling_seed},
                {"split", cfg.split_seed},
                {"model", cfg.train.seed}};
  json w;
  WorldConfig world = cfg.world;
  w["seed"] = world.seed;
  w["center"] = {world.center.lon, world.center.lat};
  ForEachWorldField(world, [&](const char* key, auto& field) { w[key] = field; });
  j["world"] = std::move(w);
  json sets = json::array();
  for (Strategy s : cfg.evaluation_sets) sets.push_back(StrategyName(s));
  j["sampling"] = {{"mix", MixName(cfg.mix)},
                   {"hybrid_weights", cfg.hybrid_weights},
                   {"positives_per_polygon", cfg.positives_per_polygon},
                   {"hard_negatives_per_polygon", cfg.hard_negatives_per_polygon},
                   {"random_pool_factor", cfg.random_pool_factor},
                   {"evaluation_sets", sets},
                   {"test_fraction", cfg.test_fraction},
                   {"split_region", cfg.split_region ? json(cfg.split_region->generic_string())
                                                     : json(nullptr)}};
  j["features"] = {{"set", FeatureSetName(cfg.feature_set)},
                   {"densify_lines", cfg.densify_lines}};
  json params = internal::TrainConfigToJson(cfg.train);
  params.erase("seed");
  j["model"] = {{"kind", ModelKindName(cfg.model)},
                {"graph_k", cfg.graph_k},
                {"params", std::move(params)}};
  j["riskmap"] = {{"region", cfg.target_region ? json(cfg.target_region->generic_string())
                                               : json(nullptr)},
                  {"grid_spacing_m", cfg.grid_spacing_m},
                  {"thresholds", cfg.thresholds}};
  j["force"] = cfg.force;
  return j;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMissingLayer:
    case ErrorCode::kUnsupportedModelKind:
      return 2;
    default:
      return 3;
  }
}

// ---------------------------------------------------------------------------
// Models on matrices and graphs

TrainedModel TrainOn(ModelKind kind, const LabeledMatrix& train, const TrainConfig& cfg,
                     std::size_t graph_k) {
  if (!IsGraphKind(kind)) return Train(kind, train, cfg);
  const GeoGraph g = BuildKnnGraph(train, graph_k);
  const std::vector<bool> mask(static_cast<std::size_t>(train.rows()), true);
  return TrainGcnn(g, mask, train.schema, cfg, kind == ModelKind::kGcnnWeighted);
}

Eigen::VectorXd PredictRows(const TrainedModel& model, const LabeledMatrix& train,
                            const LabeledMatrix& query, std::size_t graph_k) {
  if (!IsGraphKind(model.kind)) return PredictProba(model, query);
  const Eigen::Index nt = train.rows(), nq = query.rows();
  Eigen::MatrixXd X(nt + nq, train.X.cols());
  X << train.X, query.X;
  Eigen::VectorXd labels(nt + nq);
  labels << train.labels, query.labels;
  std::vector<GeoPoint> locations = train.locations;
  locations.insert(locations.end(), query.locations.begin(), query.locations.end());
  const GeoGraph g = BuildKnnGraph(locations, X, labels, graph_k);
  return PredictProba(model, g, query.schema).tail(nq);
}

// ---------------------------------------------------------------------------
// Stages

json RunSynth(const PipelineConfig& cfg) {
  const fs::path catalog = cfg.world_dir / "catalog.json";
  CheckFresh(cfg, {catalog});
  GenerateWorld(cfg.world, cfg.world_dir);
  return {{"outputs", Listing({cfg.world_dir})}};
}

json RunSample(const PipelineConfig& cfg) {
  const ArtifactPaths paths = Paths(cfg);
  const LayerCatalog catalog = OpenCatalog(cfg);
  std::vector<fs::path> outputs;
  for (const auto& name : SampleSetNames(cfg)) outputs.push_back(paths.samples() / (name + ".csv"));
  CheckFresh(cfg, outputs);

  const auto hazards = ReadPolygons(catalog.at(Role::kHazard).path);
  const PolygonFeature border = FirstPolygon(catalog.at(Role::kBorder).path);
  const auto positives = SamplePositives(hazards, cfg.sampling_seed, cfg.positives_per_polygon);

  std::set<Strategy> needed(cfg.evaluation_sets.begin(), cfg.evaluation_sets.end());
  switch (cfg.mix) {
    case Mix::kRandom: needed.insert(Strategy::kRandom); break;
    case Mix::kHn50: needed.insert(Strategy::kHn50); break;
    case Mix::kHn500: needed.insert(Strategy::kHn500); break;
    case Mix::kHn5000: needed.insert(Strategy::kHn5000); break;
    case Mix::kHybrid:
      needed.insert({Strategy::kRandom, Strategy::kHn50, Strategy::kHn500, Strategy::kHn5000});
      break;
  }
  NegativePools pools;
  for (Strategy s : needed) {
    if (s == Strategy::kRandom) {
      const auto n = static_cast<std::size_t>(
          std::ceil(cfg.random_pool_factor * static_cast<double>(positives.size())));
      pools[s] = SampleRandomNegatives(border, hazards, n, cfg.sampling_seed);
    } else {
      const double buffer = s == Strategy::kHn50 ? 50.0 : s == Strategy::kHn500 ? 500.0 : 5000.0;
      pools[s] = SampleHardNegatives(hazards, buffer, cfg.hard_negatives_per_polygon,
                                     cfg.sampling_seed);
    }
  }

  const SampleSet training =
      AssembleTrainingSet(positives, pools, cfg.mix, cfg.sampling_seed, cfg.hybrid_weights);
  auto [train, test] = cfg.split_region
                           ? SplitByRegion(training, FirstPolygon(*cfg.split_region))
                           : SplitTrainTest(training, cfg.test_fraction, cfg.split_seed);
  WriteSampleCsv(paths.samples() / "train.csv", train);
  WriteSampleCsv(paths.samples() / "test.csv", test);
  json counts;
  counts["train"] = train.points.size();
  counts["test"] = test.points.size();

  std::set<SampleId> exclude;
  for (const auto& p : train.points) exclude.insert(p.id);
  std::vector<SamplePoint> test_positives;
  for (const auto& p : test.points) {
    if (p.label == Label::kHazard) test_positives.push_back(p);
  }
  for (Strategy s : cfg.evaluation_sets) {
    const SampleSet eval =
        AssembleEvaluationSet(test_positives, pools.at(s), exclude, cfg.sampling_seed);
    WriteSampleCsv(paths.samples() / (SampleFileStem(s) + ".csv"), eval);
    counts[SampleFileStem(s)] = eval.points.size();
  }

  fs::path region_path = cfg.target_region.value_or(cfg.catalog.parent_path() / "study_area.geojson");
  const PolygonFeature region =
      fs::exists(region_path) ? FirstPolygon(region_path) : border;
  SampleSet target;
  target.seed = cfg.sampling_seed;
  target.points = SampleEvaluationGrid(region, cfg.grid_spacing_m, hazards);
  WriteSampleCsv(paths.samples() / "target.csv", target);
  counts["target"] = target.points.size();
  counts["positives"] = positives.size();
  return {{"inputs", Listing({cfg.catalog})}, {"outputs", Listing(outputs)}, {"counts", counts}};
}

json RunFeaturize(const PipelineConfig& cfg) {
  const ArtifactPaths paths = Paths(cfg);
  const LayerCatalog catalog = OpenCatalog(cfg);
  std::vector<fs::path> inputs, outputs;
  for (const auto& name : SampleSetNames(cfg)) {
    inputs.push_back(paths.samples() / (name + ".csv"));
    outputs.push_back(paths.features() / (name + ".csv"));
    RequireFile(inputs.back(), "sample file");
  }
  CheckFresh(cfg, outputs);

  const FeatureSchema schema = MakeSchema(cfg.feature_set, catalog);
  PrepareOptions options;
  options.densify_lines = cfg.densify_lines;
  const PreparedLayers layers = PreparedLayers::Load(catalog, schema, options);

  LabeledMatrix train;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const SampleSet set = ReadSampleCsv(inputs[i]);
    const bool is_train = i == 0;
    LabeledMatrix m =
        BuildMatrix(set, layers, schema, std::vector<bool>(set.points.size(), is_train));
    if (is_train) {
      train = m;
    } else {
      m.mean = train.mean;
      m.stddev = train.stddev;
    }
    WriteMatrix(outputs[i], m);
  }
  return {{"inputs", Listing(inputs)}, {"outputs", Listing(outputs)},
          {"schema_fingerprint", schema.Fingerprint()}};
}

json RunTrain(const PipelineConfig& cfg) {
  const ArtifactPaths paths = Paths(cfg);
  const fs::path input = paths.features() / "train.csv";
  RequireFile(input, "training matrix");
  CheckFresh(cfg, {paths.model_file()});
  const LabeledMatrix train = ReadMatrix(input);
  const TrainedModel model = TrainOn(cfg.model, train, cfg.train, cfg.graph_k);
  fs::create_directories(paths.models());
  SaveModel(paths.model_file(), model);
  return {{"inputs", Listing({input})}, {"outputs", Listing({paths.model_file()})},
          {"model", ModelKindName(model.kind)}};
}

json RunEvaluate(const PipelineConfig& cfg) {
  const ArtifactPaths paths = Paths(cfg);
  RequireFile(paths.model_file(), "model file");
  const fs::path train_path = paths.features() / "train.csv";
  RequireFile(train_path, "training matrix");
  std::vector<std::string> sets = {"test"};
  for (Strategy s : cfg.evaluation_sets) sets.push_back(SampleFileStem(s));
  std::vector<fs::path> inputs = {paths.model_file(), train_path}, outputs;
  for (const auto& name : sets) {
    inputs.push_back(paths.features() / (name + ".csv"));
    RequireFile(inputs.back(), "feature matrix");
    outputs.push_back(paths.reports() / (name + "_report.json"));
  }
  outputs.push_back(paths.reports() / "evaluation.json");
  CheckFresh(cfg, outputs);

  const TrainedModel model = LoadModel(paths.model_file());
  const LabeledMatrix train = ReadMatrix(train_path);
  json summary;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const LabeledMatrix query = ReadMatrix(inputs[i + 2]);
    const Eigen::VectorXd probs = PredictRows(model, train, query, cfg.graph_k);
    const EvalReport report = Evaluate(query.labels, probs);
    WriteText(paths.reports() / (sets[i] + "_report.json"), ReportToJson(report));
    if (report.has_roc) {
      WriteRocCsv(paths.reports() / (sets[i] + "_roc.csv"), report.roc);
      outputs.push_back(paths.reports() / (sets[i] + "_roc.csv"));
    }
    summary[sets[i]] = {{"n", report.n_test},
                        {"accuracy", report.accuracy},
                        {"macro_f1", report.macro_f1},
                        {"auc", report.has_roc ? json(report.auc) : json(nullptr)}};
  }
  json doc = {{"model", ModelKindName(model.kind)}, {"sets", summary}};
  WriteText(paths.reports() / "evaluation.json", doc.dump(2) + "\n");
  return {{"inputs", Listing(inputs)}, {"outputs", Listing(outputs)}, {"summary", summary}};
}

json RunPredict(const PipelineConfig& cfg) {
  const ArtifactPaths paths = Paths(cfg);
  const fs::path train_path = paths.features() / "train.csv";
  const fs::path target_path = paths.features() / "target.csv";
  const fs::path out_path = paths.predictions() / "target.csv";
  RequireFile(paths.model_file(), "model file");
  RequireFile(train_path, "training matrix");
  RequireFile(target_path, "target matrix");
  CheckFresh(cfg, {out_path});

  const TrainedModel model = LoadModel(paths.model_file());
  const LabeledMatrix train = ReadMatrix(train_path);
  const LabeledMatrix target = ReadMatrix(target_path);
  const Eigen::VectorXd probs = PredictRows(model, train, target, cfg.graph_k);
  std::ostringstream out;
  out << "id,lon,lat,label,probability\n";
  for (Eigen::Index i = 0; i < target.rows(); ++i) {
    const auto r = static_cast<std::size_t>(i);
    out << target.ids[r] << ',' << FormatDouble(target.locations[r].lon) << ','
        << FormatDouble(target.locations[r].lat) << ',' << static_cast<int>(target.labels[i])
        << ',' << FormatDouble(probs[i]) << '\n';
  }
  WriteText(out_path, out.str());
  return {{"inputs", Listing({paths.model_file(), train_path, target_path})},
          {"outputs", Listing({out_path})}};
}

json RunRiskmap(const PipelineConfig& cfg) {
  const ArtifactPaths paths = Paths(cfg);
  const fs::path input = paths.predictions() / "target.csv";
  RequireFile(input, "prediction file");
  RequireFile(paths.model_file(), "model file");
  const fs::path geojson = paths.riskmap() / "risk.geojson";
  const fs::path summary_csv = paths.riskmap() / "band_summary.csv";
  CheckFresh(cfg, {geojson, summary_csv});

  const auto preds = ReadPredictions(input);
  std::vector<SampleId> ids;
  std::vector<GeoPoint> locations;
  std::vector<double> probs;
  for (const auto& p : preds) {
    ids.push_back(p.id);
    locations.push_back(p.location);
    probs.push_back(p.probability);
  }
  RiskMap map = MakeRiskMap(ids, locations, probs, cfg.thresholds);
  const TrainedModel model = LoadModel(paths.model_file());
  map.model_kind = ModelKindName(model.kind);
  map.schema_fingerprint = model.schema_fingerprint;
  fs::create_directories(paths.riskmap());
  ExportRiskGeoJson(map, geojson);
  const auto summary = BandSummary(map);
  WriteBandSummaryCsv(summary_csv, summary);
  json bands;
  for (std::size_t b = 0; b < kAllBands.size(); ++b) {
    bands[std::string(RiskBandName(kAllBands[b]))] = summary[b];
  }
  return {{"inputs", Listing({input, paths.model_file()})},
          {"outputs", Listing({geojson, summary_csv})},
          {"bands", bands}};
}

json RunReport(const PipelineConfig& cfg) {
  const ArtifactPaths paths = Paths(cfg);
  const fs::path train_path = paths.features() / "train.csv";
  RequireFile(train_path, "training matrix");
  RequireFile(paths.model_file(), "model file");
  const fs::path corr_path = paths.reports() / "correlation.csv";
  const fs::path vif_path = paths.reports() / "vif.csv";
  const fs::path imp_path = paths.reports() / "importance.csv";
  const fs::path summary_path = paths.reports() / "summary.json";
  CheckFresh(cfg, {corr_path, vif_path, imp_path, summary_path});

  const LabeledMatrix train = ReadMatrix(train_path);
  const TrainedModel model = LoadModel(paths.model_file());
  std::vector<std::string> names = train.schema.Names();
  json summary;
  summary["model"] = ModelKindName(model.kind);
  summary["schema_fingerprint"] = model.schema_fingerprint;

  {
    const Eigen::MatrixXd corr = CorrelationMatrix(train, true);
    std::vector<std::string> header = names;
    header.push_back("label");
    std::ostringstream out;
    out << "feature";
    for (const auto& h : header) out << ',' << h;
    out << '\n';
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
      out << header[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < corr.cols(); ++j) out << ',' << FormatFixed(corr(i, j), 6);
      out << '\n';
    }
    WriteText(corr_path, out.str());
  }

  {
    std::vector<Eigen::Index> cols;
    std::vector<std::string> cont_names;
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (!train.schema.IsCategorical(j)) {
        cols.push_back(static_cast<Eigen::Index>(j));
        cont_names.push_back(names[j]);
      }
    }
    std::ostringstream out;
    out << "feature,vif\n";
    try {
      const Eigen::VectorXd vif = Vif(train.X(Eigen::all, cols), cont_names);
      for (std::size_t j = 0; j < cont_names.size(); ++j) {
        out << cont_names[j] << ',' << FormatDouble(vif[static_cast<Eigen::Index>(j)]) << '\n';
      }
    } catch (const Error& e) {
      summary["vif_error"] = e.what();
    }
    WriteText(vif_path, out.str());
  }

  {
    std::ostringstream out;
    out << "feature,importance\n";
    if (model.kind == ModelKind::kRandomForest) {
      for (const auto& item : FeatureImportance(model)) {
        out << item.name << ',' << FormatFixed(item.importance, 6) << '\n';
      }
    }
    WriteText(imp_path, out.str());
  }

  const fs::path eval_path = paths.reports() / "evaluation.json";
  if (fs::exists(eval_path)) {
    std::ifstream in(eval_path, std::ios::binary);
    summary["evaluation"] = json::parse(in);
  }
  const fs::path bands_path = paths.riskmap() / "band_summary.csv";
  if (fs::exists(bands_path)) {
    std::ifstream in(bands_path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    summary["band_summary_csv"] = ss.str();
  }
  WriteText(summary_path, summary.dump(2) + "\n");
  return {{"inputs", Listing({train_path, paths.model_file()})},
          {"outputs", Listing({corr_path, vif_path, imp_path, summary_path})}};
}

}  // namespace deskaid
