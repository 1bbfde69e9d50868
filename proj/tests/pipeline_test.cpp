// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <numeric>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "deskaid/pipeline.hpp"
#include "test_support.hpp"

namespace deskaid {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::CodeOf;

TEST(PipelineConfig, DefaultsAndPathResolution) {
  const PipelineConfig c = ParsePipelineConfig(json::object(), "/base");
  EXPECT_EQ(c.out_dir, fs::path("/base/out"));
  EXPECT_EQ(c.world_dir, fs::path("/base/out/world"));
  EXPECT_EQ(c.catalog, fs::path("/base/out/world/catalog.json"));
  EXPECT_EQ(c.mix, Mix::kRandom);
  EXPECT_EQ(c.model, ModelKind::kRandomForest);
  EXPECT_EQ(c.feature_set, FeatureSet::kExpanded18);
  EXPECT_EQ(c.test_fraction, 0.25);
  EXPECT_EQ(c.graph_k, 5u);
  EXPECT_EQ(c.grid_spacing_m, 500.0);
}

TEST(PipelineConfig, SeedFansOutUnlessOverridden) {
  const PipelineConfig c =
      ParsePipelineConfig(json::parse(R"({"seed": 9, "seeds": {"split": 4}})"), "/b");
  EXPECT_EQ(c.sampling_seed, 9u);
  EXPECT_EQ(c.split_seed, 4u);
  EXPECT_EQ(c.train.seed, 9u);
}

TEST(PipelineConfig, RejectsUnknownKeysAndBadValues) {
  const char* bad[] = {
      R"({"bogus": 1})",
      R"({"sampling": {"mixx": "random"}})",
      R"({"sampling": {"mix": "stratified"}})",
      R"({"sampling": {"test_fraction": 1.5}})",
      R"({"sampling": {"evaluation_sets": ["positive"]}})",
      R"({"model": {"kind": "svm"}})",
      R"({"model": {"params": {"seed": 3}}})",
      R"({"riskmap": {"thresholds": [0.5, 0.4, 0.6, 0.7]}})",
      R"({"world": {"hazards": "many"}})",
      R"({"seed": "x"})",
  };
  for (const char* text : bad) {
    EXPECT_EQ(CodeOf([&] { ParsePipelineConfig(json::parse(text), "/b"); }), ErrorCode::kConfig)
        << text;
  }
}

TEST(PipelineConfig, RoundTripsThroughJson) {
  const PipelineConfig c = ParsePipelineConfig(
      json::parse(R"({"seed": 3, "sampling": {"mix": "hybrid", "hybrid_weights": [0.4, 0.3, 0.2, 0.1]},
                      "model": {"kind": "gcnn_weighted", "graph_k": 7},
                      "world": {"hazards": 77, "center": [66.5, 33.0]}})"),
      "/b");
  const json once = PipelineConfigToJson(c);
  const json twice = PipelineConfigToJson(ParsePipelineConfig(once, "/elsewhere"));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(c.world.hazards, 77);
  EXPECT_EQ(c.world.center.lon, 66.5);
}

TEST(ApplyOverride, NestedKeysAndValueTypes) {
  json doc = json::parse(R"({"model": {"kind": "lr"}})");
  ApplyOverride(doc, "model.graph_k=9");
  ApplyOverride(doc, "sampling.mix=hn50");
  ApplyOverride(doc, "riskmap.thresholds=[0.1,0.3,0.5,0.7]");
  EXPECT_EQ(doc["model"]["kind"], "lr");
  EXPECT_EQ(doc["model"]["graph_k"], 9);
  EXPECT_EQ(doc["sampling"]["mix"], "hn50");
  EXPECT_EQ(doc["riskmap"]["thresholds"][1], 0.3);
  EXPECT_EQ(CodeOf([&] { ApplyOverride(doc, "novalue"); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([&] { ApplyOverride(doc, "a..b=1"); }), ErrorCode::kConfig);
}

TEST(ExitCodeFor, Categories) {
  EXPECT_EQ(ExitCodeFor(ErrorCode::kConfig), 2);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kMissingLayer), 2);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kParse), 3);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kSamplingExhausted), 3);
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string("'") + DESKAID_CLI_PATH + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  testing::TempDir dir;
  EXPECT_EQ(RunCli(""), 2);
  EXPECT_EQ(RunCli("bogus"), 2);
  EXPECT_EQ(RunCli("sample"), 2);  // --config is required
  EXPECT_EQ(RunCli("--version"), 0);
  EXPECT_EQ(RunCli("sample -c '" + (dir / "absent.json").string() + "'"), 2);
  testing::WriteText(dir / "bad.json", R"({"unknown_key": true})");
  EXPECT_EQ(RunCli("sample -c '" + (dir / "bad.json").string() + "'"), 2);
  testing::WriteText(dir / "ok.json", "{}");
  // No world has been generated: the catalog is missing.
  EXPECT_EQ(RunCli("sample -c '" + (dir / "ok.json").string() + "'"), 2);
}

// Full stage chain on a small world with a fast model.
TEST(Pipeline, StagesChainAndRefuseOverwrite) {
  testing::TempDir dir;
  testing::WriteText(dir / "cfg.json", R"({
    "seed": 5,
    "world": {"seed": 2, "side_km": 60, "hazards": 120, "roads": 12, "waterways": 5,
              "conflict_clusters": 4, "conflict_events": 200, "towns": 5,
              "town_buildings": 400, "rural_buildings": 100, "financial": 10,
              "education": 20, "airports": 3, "health": 15, "controlled_areas": 5,
              "study_area_km": 10},
    "model": {"kind": "lr"},
    "riskmap": {"grid_spacing_m": 1000}
  })");
  const PipelineConfig cfg = LoadPipelineConfig(dir / "cfg.json");
  RunSynth(cfg);
  RunSample(cfg);
  RunFeaturize(cfg);
  RunTrain(cfg);
  const json eval = RunEvaluate(cfg);
  RunPredict(cfg);
  RunRiskmap(cfg);
  RunReport(cfg);
  const ArtifactPaths paths{cfg.out_dir};
  EXPECT_TRUE(fs::exists(paths.model_file()));
  std::size_t riskmaps = 0;
  for (const auto& e : fs::directory_iterator(paths.riskmap())) {
    if (e.path().extension() == ".geojson") {
      ++riskmaps;
      const RiskMap m = ReadRiskGeoJson(e.path());
      const auto s = BandSummary(m);
      EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 100.0, 1e-9);
    }
  }
  EXPECT_EQ(riskmaps, 1u);
  EXPECT_FALSE(eval.empty());

  EXPECT_EQ(CodeOf([&] { RunTrain(cfg); }), ErrorCode::kConfig);
  PipelineConfig forced = cfg;
  forced.force = true;
  EXPECT_NO_THROW(RunTrain(forced));
}

}  // namespace
}  // namespace deskaid
