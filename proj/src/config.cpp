// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "compdetect/errors.hpp"

namespace compdetect {

namespace {

void check_keys(const nlohmann::json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string("section '") + section + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(std::string("unknown key '") + key + "' in section '" + section + "'");
    }
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

} // namespace

void to_json(nlohmann::json& j, const GenConfig& c) {
  j = {{"n_subjects", c.n_subjects},
       {"reps_per_action", c.reps_per_action},
       {"views", c.views},
       {"fps", c.fps},
       {"compensation_rate", c.compensation_rate},
       {"noise_sigma", c.noise_sigma},
       {"duration_range", c.duration_range},
       {"tlf_pitch_deg", c.tlf_pitch_deg},
       {"tr_yaw_deg", c.tr_yaw_deg},
       {"se_lift_m", c.se_lift_m},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, GenConfig& c) {
  check_keys(j, "generate", {"n_subjects", "reps_per_action", "views", "fps", "compensation_rate", "noise_sigma",
                             "duration_range", "tlf_pitch_deg", "tr_yaw_deg", "se_lift_m", "seed"});
  read(j, "n_subjects", c.n_subjects);
  read(j, "reps_per_action", c.reps_per_action);
  read(j, "views", c.views);
  read(j, "fps", c.fps);
  read(j, "compensation_rate", c.compensation_rate);
  read(j, "noise_sigma", c.noise_sigma);
  read(j, "duration_range", c.duration_range);
  read(j, "tlf_pitch_deg", c.tlf_pitch_deg);
  read(j, "tr_yaw_deg", c.tr_yaw_deg);
  read(j, "se_lift_m", c.se_lift_m);
  read(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const PreprocessConfig& c) {
  j = {{"keyframe_threshold", c.keyframe_threshold},
       {"window_size", c.window_size},
       {"window_step", c.window_step},
       {"similarity_epsilon", c.similarity_epsilon}};
  if (c.target_length) {
    j["target_length"] = *c.target_length;
  } else {
    j["target_length"] = "auto";
  }
}

void from_json(const nlohmann::json& j, PreprocessConfig& c) {
  check_keys(j, "preprocess", {"keyframe_threshold", "window_size", "window_step", "similarity_epsilon", "target_length"});
  read(j, "keyframe_threshold", c.keyframe_threshold);
  read(j, "window_size", c.window_size);
  read(j, "window_step", c.window_step);
  read(j, "similarity_epsilon", c.similarity_epsilon);
  if (j.contains("target_length")) {
    const auto& t = j.at("target_length");
    if (t.is_string()) {
      if (t.get<std::string>() != "auto") throw ConfigError("preprocess.target_length must be \"auto\" or an integer");
      c.target_length.reset();
    } else {
      c.target_length = t.get<std::size_t>();
    }
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"gcn_channels", c.gcn_channels}, {"lstm_hidden", c.lstm_hidden}, {"attention_dim", c.attention_dim},
       {"n_classes", c.n_classes},       {"dropout", c.dropout},         {"variant", variant_name(c.variant)}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  check_keys(j, "model", {"gcn_channels", "lstm_hidden", "attention_dim", "n_classes", "dropout", "variant"});
  read(j, "gcn_channels", c.gcn_channels);
  read(j, "lstm_hidden", c.lstm_hidden);
  read(j, "attention_dim", c.attention_dim);
  read(j, "n_classes", c.n_classes);
  read(j, "dropout", c.dropout);
  if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"learning_rate", c.learning_rate}, {"beta1", c.beta1},           {"beta2", c.beta2},
       {"eps", c.eps},                     {"batch_size", c.batch_size}, {"epochs", c.epochs},
       {"seed", c.seed},                   {"weight_decay", c.weight_decay}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  check_keys(j, "train", {"learning_rate", "beta1", "beta2", "eps", "batch_size", "epochs", "seed", "weight_decay"});
  read(j, "learning_rate", c.learning_rate);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "eps", c.eps);
  read(j, "batch_size", c.batch_size);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
  read(j, "weight_decay", c.weight_decay);
}

void to_json(nlohmann::json& j, const SvmConfig& c) {
  j = {{"C", c.c}, {"epochs", c.epochs}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, SvmConfig& c) {
  check_keys(j, "baselines.svm", {"C", "epochs", "seed"});
  read(j, "C", c.c);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const RfConfig& c) {
  j = {{"n_trees", c.n_trees},   {"max_depth", c.max_depth}, {"min_leaf", c.min_leaf},
       {"features_per_split", c.features_per_split}, {"bootstrap", c.bootstrap}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, RfConfig& c) {
  check_keys(j, "baselines.rf", {"n_trees", "max_depth", "min_leaf", "features_per_split", "bootstrap", "seed"});
  read(j, "n_trees", c.n_trees);
  read(j, "max_depth", c.max_depth);
  read(j, "min_leaf", c.min_leaf);
  if (j.contains("features_per_split")) {
    const auto& f = j.at("features_per_split");
    c.features_per_split = f.is_number() ? std::to_string(f.get<long long>()) : f.get<std::string>();
  }
  read(j, "bootstrap", c.bootstrap);
  read(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const BaselineConfig& c) {
  j = {{"knn_k", c.knn_k}, {"svm", c.svm}, {"rf", c.rf}};
}

void from_json(const nlohmann::json& j, BaselineConfig& c) {
  check_keys(j, "baselines", {"knn_k", "svm", "rf"});
  read(j, "knn_k", c.knn_k);
  read(j, "svm", c.svm);
  read(j, "rf", c.rf);
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"seed", c.seed},
       {"out", c.out.string()},
       {"split_fraction", c.split_fraction},
       {"split_by", c.split_by == SplitMode::Subject ? "subject" : "sequence"},
       {"repeats", c.repeats},
       {"models", c.models},
       {"generate", c.generate},
       {"preprocess", c.preprocess},
       {"model", c.model},
       {"train", c.train},
       {"baselines", c.baselines}};
  if (c.data) j["data"] = c.data->string();
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  check_keys(j, "<root>", {"seed", "out", "split_fraction", "split_by", "data", "repeats", "models", "generate",
                           "preprocess", "model", "train", "baselines"});
  read(j, "seed", c.seed);
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  read(j, "split_fraction", c.split_fraction);
  if (j.contains("split_by")) {
    const auto s = j.at("split_by").get<std::string>();
    if (s == "sequence") {
      c.split_by = SplitMode::Sequence;
    } else if (s == "subject") {
      c.split_by = SplitMode::Subject;
    } else {
      throw ConfigError("split_by must be \"sequence\" or \"subject\", got '" + s + "'");
    }
  }
  if (j.contains("data")) c.data = j.at("data").get<std::string>();
  read(j, "repeats", c.repeats);
  read(j, "models", c.models);
  read(j, "generate", c.generate);
  read(j, "preprocess", c.preprocess);
  read(j, "model", c.model);
  read(j, "train", c.train);
  read(j, "baselines", c.baselines);
}

void RunConfig::validate() const {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ConfigError("split_fraction must lie in (0, 1)");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (models.empty()) throw ConfigError("models must name at least one model");
  for (const auto& m : models) {
    if (m != "SVM" && m != "KNN" && m != "RF" && m != "GCN-LSTM-ATT") {
      throw ConfigError("unknown model '" + m + "' (expected SVM, KNN, RF or GCN-LSTM-ATT)");
    }
  }
  generate.validate();
  preprocess.validate();
  model.validate();
  train.validate();
  baselines.validate();
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); })) return c;
  try {
    nlohmann::json::parse(text).get_to(c);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

} // namespace compdetect
