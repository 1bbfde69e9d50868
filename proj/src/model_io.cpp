// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <set>
#include <sstream>

#include "deskaid/models.hpp"
#include "model_json.hpp"

namespace deskaid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace internal {

json TrainConfigToJson(const TrainConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["logistic"] = {{"max_iterations", cfg.logistic.max_iterations},
                   {"gradient_tolerance", cfg.logistic.gradient_tolerance}};
  j["forest"] = {{"trees", cfg.forest.trees},       {"max_depth", cfg.forest.max_depth},
                 {"mtry", cfg.forest.mtry},         {"min_leaf", cfg.forest.min_leaf},
                 {"bootstrap", cfg.forest.bootstrap}};
  j["boosting"] = {{"rounds", cfg.boosting.rounds},
                   {"max_depth", cfg.boosting.max_depth},
                   {"learning_rate", cfg.boosting.learning_rate}};
  const NeuralConfig& n = cfg.neural;
  j["neural"] = {{"hidden", n.hidden},
                 {"graph_width", n.graph_width},
                 {"graph_layers", n.graph_layers},
                 {"learning_rate", n.learning_rate},
                 {"weight_decay", n.weight_decay},
                 {"batch_size", n.batch_size},
                 {"max_epochs", n.max_epochs},
                 {"patience", n.patience},
                 {"validation_fraction", n.validation_fraction}};
  return j;
}

namespace {

template <typename T>
void Take(const json& obj, const char* key, T& dst, std::set<std::string>& seen) {
  if (!obj.contains(key)) return;
  seen.insert(key);
  dst = obj.at(key).get<T>();
}

void RejectUnknown(const json& obj, const std::set<std::string>& seen, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!seen.count(it.key())) {
      throw Error(ErrorCode::kConfig, "unknown key '" + where + it.key() + "'");
    }
  }
}

}  // namespace

void MergeTrainConfig(const json& j, TrainConfig& cfg) {
  try {
    std::set<std::string> top;
    Take(j, "seed", cfg.seed, top);
    if (j.contains("logistic")) {
      top.insert("logistic");
      std::set<std::string> s;
      const json& o = j["logistic"];
      Take(o, "max_iterations", cfg.logistic.max_iterations, s);
      Take(o, "gradient_tolerance", cfg.logistic.gradient_tolerance, s);
      RejectUnknown(o, s, "logistic.");
    }
    if (j.contains("forest")) {
      top.insert("forest");
      std::set<std::string> s;
      const json& o = j["forest"];
      Take(o, "trees", cfg.forest.trees, s);
      Take(o, "max_depth", cfg.forest.max_depth, s);
      Take(o, "mtry", cfg.forest.mtry, s);
      Take(o, "min_leaf", cfg.forest.min_leaf, s);
      Take(o, "bootstrap", cfg.forest.bootstrap, s);
      RejectUnknown(o, s, "forest.");
    }
    if (j.contains("boosting")) {
      top.insert("boosting");
      std::set<std::string> s;
      const json& o = j["boosting"];
      Take(o, "rounds", cfg.boosting.rounds, s);
      Take(o, "max_depth", cfg.boosting.max_depth, s);
      Take(o, "learning_rate", cfg.boosting.learning_rate, s);
      RejectUnknown(o, s, "boosting.");
    }
    if (j.contains("neural")) {
      top.insert("neural");
      std::set<std::string> s;
      const json& o = j["neural"];
      NeuralConfig& n = cfg.neural;
      Take(o, "hidden", n.hidden, s);
      Take(o, "graph_width", n.graph_width, s);
      Take(o, "graph_layers", n.graph_layers, s);
      Take(o, "learning_rate", n.learning_rate, s);
      Take(o, "weight_decay", n.weight_decay, s);
      Take(o, "batch_size", n.batch_size, s);
      Take(o, "max_epochs", n.max_epochs, s);
      Take(o, "patience", n.patience, s);
      Take(o, "validation_fraction", n.validation_fraction, s);
      RejectUnknown(o, s, "neural.");
    }
    RejectUnknown(j, top, "");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("training config: ") + e.what());
  }
}

}  // namespace internal

namespace {

json TreeToJson(const Tree& t) {
  return {{"feature", t.feature},
          {"threshold", t.threshold},
          {"left", t.left},
          {"right", t.right},
          {"value", t.value}};
}

Tree TreeFromJson(const json& j) {
  Tree t;
  t.feature = j.at("feature").get<std::vector<int>>();
  t.threshold = j.at("threshold").get<std::vector<double>>();
  t.left = j.at("left").get<std::vector<int>>();
  t.right = j.at("right").get<std::vector<int>>();
  t.value = j.at("value").get<std::vector<double>>();
  const std::size_t n = t.feature.size();
  if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n ||
      t.value.size() != n) {
    throw Error(ErrorCode::kParse, "tree arrays disagree in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t.feature[i] >= 0 &&
        (t.left[i] <= static_cast<int>(i) || t.right[i] <= static_cast<int>(i) ||
         t.left[i] >= static_cast<int>(n) || t.right[i] >= static_cast<int>(n))) {
      throw Error(ErrorCode::kParse, "tree child index out of range");
    }
  }
  return t;
}

std::vector<double> ToStd(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd ToEigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json EncoderToJson(const InputEncoder& e) {
  return {{"continuous", e.continuous},
          {"mean", ToStd(e.mean)},
          {"stddev", ToStd(e.stddev)},
          {"categorical", e.categorical},
          {"cardinality", e.cardinality}};
}

InputEncoder EncoderFromJson(const json& j) {
  InputEncoder e;
  e.continuous = j.at("continuous").get<std::vector<Eigen::Index>>();
  e.mean = ToEigen(j.at("mean").get<std::vector<double>>());
  e.stddev = ToEigen(j.at("stddev").get<std::vector<double>>());
  e.categorical = j.at("categorical").get<std::vector<Eigen::Index>>();
  e.cardinality = j.at("cardinality").get<std::vector<Eigen::Index>>();
  return e;
}

json NetworkToJson(const nn::Network<double>& net) {
  json layers = json::array();
  for (const auto& l : net) {
    std::vector<double> w(l.W.data(), l.W.data() + l.W.size());  // column-major
    layers.push_back({{"type", l.type == nn::LayerType::kGraphConv ? "graph_conv" : "dense"},
                      {"relu", l.relu},
                      {"rows", l.W.rows()},
                      {"cols", l.W.cols()},
                      {"W", w},
                      {"b", ToStd(l.b)}});
  }
  return layers;
}

nn::Network<double> NetworkFromJson(const json& j) {
  nn::Network<double> net;
  for (const auto& jl : j) {
    nn::Layer<double> l;
    l.type = jl.at("type").get<std::string>() == "graph_conv" ? nn::LayerType::kGraphConv
                                                             : nn::LayerType::kDense;
    l.relu = jl.at("relu").get<bool>();
    const auto rows = jl.at("rows").get<Eigen::Index>();
    const auto cols = jl.at("cols").get<Eigen::Index>();
    const auto w = jl.at("W").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols) {
      throw Error(ErrorCode::kParse, "layer weight count mismatch");
    }
    l.W = Eigen::Map<const Eigen::MatrixXd>(w.data(), rows, cols);
    l.b = ToEigen(jl.at("b").get<std::vector<double>>());
    if (l.b.size() != rows) throw Error(ErrorCode::kParse, "layer bias length mismatch");
    net.push_back(std::move(l));
  }
  return net;
}

}  // namespace

std::string ModelToJson(const TrainedModel& model) {
  json j;
  j["format"] = "deskaid-model/1";
  j["kind"] = ModelKindName(model.kind);
  j["schema_fingerprint"] = model.schema_fingerprint;
  j["features"] = model.feature_names;
  j["config"] = internal::TrainConfigToJson(model.config);
  json p;
  std::visit(
      [&](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, LogisticParams>) {
          p["encoder"] = EncoderToJson(params.encoder);
          p["weights"] = ToStd(params.weights);
          p["intercept"] = params.intercept;
          p["iterations"] = params.iterations;
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          p["importance"] = ToStd(params.importance);
          json trees = json::array();
          for (const auto& t : params.trees) trees.push_back(TreeToJson(t));
          p["trees"] = std::move(trees);
        } else if constexpr (std::is_same_v<T, BoostingParams>) {
          p["base_score"] = params.base_score;
          p["learning_rate"] = params.learning_rate;
          json trees = json::array();
          for (const auto& t : params.trees) trees.push_back(TreeToJson(t));
          p["trees"] = std::move(trees);
        } else {
          p["encoder"] = EncoderToJson(params.encoder);
          p["network"] = NetworkToJson(params.network);
          p["sigma"] = params.sigma;
          p["epochs_run"] = params.epochs_run;
          p["best_epoch"] = params.best_epoch;
          p["best_validation_accuracy"] = params.best_validation_accuracy;
        }
      },
      model.params);
  j["parameters"] = std::move(p);
  return j.dump(1) + "\n";
}

TrainedModel ModelFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model: ") + e.what(), 0, e.byte);
  }
  TrainedModel model;
  try {
    model.kind = ParseModelKind(j.at("kind").get<std::string>());
    model.schema_fingerprint = j.at("schema_fingerprint").get<std::string>();
    model.feature_names = j.at("features").get<std::vector<std::string>>();
    internal::MergeTrainConfig(j.at("config"), model.config);
    const json& p = j.at("parameters");
    switch (model.kind) {
      case ModelKind::kLogistic: {
        LogisticParams lp;
        lp.encoder = EncoderFromJson(p.at("encoder"));
        lp.weights = ToEigen(p.at("weights").get<std::vector<double>>());
        lp.intercept = p.at("intercept").get<double>();
        lp.iterations = p.at("iterations").get<int>();
        model.params = std::move(lp);
        break;
      }
      case ModelKind::kRandomForest: {
        ForestParams fp;
        fp.importance = ToEigen(p.at("importance").get<std::vector<double>>());
        for (const auto& t : p.at("trees")) fp.trees.push_back(TreeFromJson(t));
        model.params = std::move(fp);
        break;
      }
      case ModelKind::kGradientBoosting: {
        BoostingParams bp;
        bp.base_score = p.at("base_score").get<double>();
        bp.learning_rate = p.at("learning_rate").get<double>();
        for (const auto& t : p.at("trees")) bp.trees.push_back(TreeFromJson(t));
        model.params = std::move(bp);
        break;
      }
      default: {
        NeuralParams np;
        np.encoder = EncoderFromJson(p.at("encoder"));
        np.network = NetworkFromJson(p.at("network"));
        np.sigma = p.at("sigma").get<double>();
        np.epochs_run = p.at("epochs_run").get<int>();
        np.best_epoch = p.at("best_epoch").get<int>();
        np.best_validation_accuracy = p.at("best_validation_accuracy").get<double>();
        model.params = std::move(np);
        break;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model: ") + e.what());
  }
  return model;
}

void SaveModel(const fs::path& path, const TrainedModel& model) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << ModelToJson(model);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

TrainedModel LoadModel(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ModelFromJson(ss.str());
}

}  // namespace deskaid
