// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// deskaid: landmine-risk desk assessment pipeline.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "deskaid/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

using Stage = std::function<json(const deskaid::PipelineConfig&)>;

struct Invocation {
  std::string config;
  std::vector<std::string> overrides;
  bool force = false;
};

void Diagnose(const std::string& command, const std::string& kind, const std::string& message) {
  json d = {{"command", command}, {"error", kind}, {"message", message}};
  std::cerr << "deskaid: " << d.dump() << '\n';
}

int Execute(const std::string& command, const Stage& stage, const Invocation& inv,
            const std::vector<std::string>& argv) {
  try {
    deskaid::PipelineConfig cfg = deskaid::LoadPipelineConfig(inv.config, inv.overrides);
    if (inv.force) cfg.force = true;
    const auto start = std::chrono::steady_clock::now();
    json result = stage(cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json log;
    log["command"] = command;
    log["argv"] = argv;
    log["version"] = kVersion;
    log["config_file"] = fs::absolute(inv.config).generic_string();
    log["overrides"] = inv.overrides;
    log["config"] = deskaid::PipelineConfigToJson(cfg);
    log["threads"] = deskaid::WorkerCount();
    log["result"] = std::move(result);
    log["wall_time_s"] = wall;
    const fs::path log_dir = deskaid::ArtifactPaths{cfg.out_dir}.logs();
    fs::create_directories(log_dir);
    std::ofstream out(log_dir / (command + ".json"), std::ios::binary);
    out << log.dump(2) << '\n';
    return 0;
  } catch (const deskaid::Error& e) {
    Diagnose(command, std::string(deskaid::ErrorCodeName(e.code())), e.what());
    return deskaid::ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    Diagnose(command, "Internal", e.what());
    return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deskaid: desk assessment of landmine risk from open geospatial layers"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, Stage>> stages = {
      {"synth", {"generate a synthetic world and its layer catalog", deskaid::RunSynth}},
      {"sample", {"draw positives, negatives and the target grid", deskaid::RunSample}},
      {"featurize", {"compute feature matrices for every sample set", deskaid::RunFeaturize}},
      {"train", {"train the configured model", deskaid::RunTrain}},
      {"evaluate", {"score the test and evaluation sets", deskaid::RunEvaluate}},
      {"predict", {"predict hazard probability on the target grid", deskaid::RunPredict}},
      {"riskmap", {"band predictions and export the risk map", deskaid::RunRiskmap}},
      {"report", {"write correlation, VIF and importance tables", deskaid::RunReport}},
  };

  Invocation inv;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (const auto& [name, entry] : stages) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("-c,--config", inv.config, "pipeline config JSON")->required();
    sub->add_option("--set", inv.overrides, "override a config key: a.b=value")
        ->allow_extra_args(true);
    sub->add_flag("--force", inv.force, "overwrite existing outputs");
    subs.emplace_back(name, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::vector<std::string> args(argv + 1, argv + argc);
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) return Execute(name, stages.at(name).second, inv, args);
  }
  return 2;
}
