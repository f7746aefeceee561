// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "compdetect/config.hpp"
#include "compdetect/errors.hpp"
#include "compdetect/harness.hpp"
#include "compdetect/model_io.hpp"
#include "helpers.hpp"

using namespace compdetect;

namespace {

// Small enough to run every pipeline in well under a second per stage.
RunConfig small_config(const std::string& name) {
  RunConfig c = parse_config(R"({
    "generate": {"n_subjects": 3, "reps_per_action": 2},
    "preprocess": {"target_length": 8},
    "model": {"gcn_channels": [3, 6], "lstm_hidden": 6, "attention_dim": 4},
    "train": {"epochs": 2, "learning_rate": 0.01},
    "baselines": {"rf": {"n_trees": 5}, "svm": {"epochs": 5}}
  })");
  c.out = testutil::scratch_dir(name);
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("empty and whitespace configs give the defaults") {
  for (const char* text : {"", "  \n\t", "{}"}) {
    const auto c = parse_config(text);
    CHECK(c.seed == 0);
    CHECK(c.split_fraction == 0.8);
    CHECK(c.train.epochs == 100);
    CHECK(c.model.gcn_channels == std::vector<std::size_t>{3, 32, 64});
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("config keys are read and unknown keys rejected") {
  const auto c = parse_config(R"({"seed": 4, "split_by": "subject", "preprocess": {"target_length": "auto"},
                                  "model": {"variant": "gcn-lstm"}, "baselines": {"svm": {"C": 2.5},
                                  "rf": {"features_per_split": 7}}})");
  CHECK(c.seed == 4);
  CHECK(c.split_by == SplitMode::Subject);
  CHECK_FALSE(c.preprocess.target_length.has_value());
  CHECK(c.model.variant == Variant::GcnLstm);
  CHECK(c.baselines.svm.c == 2.5);
  CHECK(c.baselines.rf.features_per_split == "7");

  CHECK_THROWS_AS(parse_config(R"({"sed": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"train": {"lr": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"train": {"epochs": "many"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{broken"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"split_by": "view"})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);

  auto bad = parse_config(R"({"models": ["SVM", "LDA"]})");
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config survives a json round trip") {
  auto c = small_config("cfg_rt");
  c.data = "x.jsonl";
  const nlohmann::json j = c;
  const auto back = j.get<RunConfig>();
  CHECK(nlohmann::json(back) == j);
}

TEST_CASE("exit codes by error kind") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(DataError("x")) == 3);
  CHECK(exit_code_for(NumericError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
  CHECK(parse_format("csv") == OutputFormat::Csv);
  CHECK_THROWS_AS(parse_format("xml"), ConfigError);
}

TEST_CASE("gradient check passes and its negative control fails") {
  const auto ok = run_gradient_check(0);
  CHECK(ok.passed);
  CHECK(ok.result.max_rel_error < kGradientTolerance);
  CHECK(run_gradient_check(0).result.max_rel_error == ok.result.max_rel_error);
  const auto bad = run_gradient_check(0, true);
  CHECK_FALSE(bad.passed);
}

TEST_CASE("compare is deterministic and keeps the row order") {
  auto cfg = small_config("compare");
  cfg.models = {"GCN-LSTM-ATT", "KNN", "SVM", "RF"};
  const auto a = run_compare(cfg);
  const auto b = run_compare(cfg);
  REQUIRE(a.rows.size() == 4);
  CHECK(a.rows[0].model == "SVM");
  CHECK(a.rows[1].model == "KNN");
  CHECK(a.rows[2].model == "RF");
  CHECK(a.rows[3].model == "GCN-LSTM-ATT");
  CHECK(a.to_json().dump() == b.to_json().dump());

  cfg.models = {"KNN"};
  CHECK(run_compare(cfg).rows.size() == 1);
}

TEST_CASE("repeats average over consecutive seeds") {
  auto cfg = small_config("repeats");
  cfg.models = {"KNN", "SVM"};
  cfg.repeats = 2;
  cfg.seed = 5;
  const auto res = run_compare(cfg);
  CHECK(res.seeds == std::vector<std::uint64_t>{5, 6});
  REQUIRE(res.per_seed.size() == 2);
  CHECK(res.rows[0].report.accuracy ==
        doctest::Approx((res.per_seed[0][0].report.accuracy + res.per_seed[1][0].report.accuracy) / 2));
  CHECK(res.data_hashes.size() == 2);
  CHECK(res.data_hashes[0] != res.data_hashes[1]);
}

TEST_CASE("ablation trains three variants on identical data") {
  auto cfg = small_config("ablate");
  std::ostringstream log;
  const auto res = run_ablate(cfg, &log);
  REQUIRE(res.rows.size() == 3);
  CHECK(res.rows[0].model == "GCN");
  CHECK(res.rows[1].model == "GCN-LSTM");
  CHECK(res.rows[2].model == "GCN-LSTM-ATT");
  // one data hash line per variant, all identical
  std::istringstream lines(log.str());
  std::string line, hash;
  int seen = 0;
  while (std::getline(lines, line)) {
    const auto at = line.find(": data ");
    if (at == std::string::npos) continue;
    const auto h = line.substr(at + 7, 16);
    if (seen++ == 0) hash = h;
    CHECK(h == hash);
  }
  CHECK(seen == 3);
}

TEST_CASE("train then evaluate reproduces the in-memory report") {
  auto cfg = small_config("train_eval");
  std::ostringstream out, log;
  CHECK(cmd_train(cfg, OutputFormat::Text, out, log) == 0);
  CHECK(std::filesystem::exists(cfg.out / "model" / "model.json"));
  CHECK(std::filesystem::exists(cfg.out / "model" / "model.bin"));
  CHECK(std::filesystem::exists(cfg.out / "model" / "stats.json"));
  CHECK(std::filesystem::exists(cfg.out / "history.csv"));
  const auto trained = slurp(cfg.out / "report.json");

  const auto model = load_model(cfg.out / "model");
  REQUIRE(model.preprocess.has_value());
  auto eval_cfg = cfg;
  eval_cfg.out = cfg.out / "eval";
  std::ostringstream eval_out;
  CHECK(cmd_evaluate(eval_cfg, cfg.out / "model", OutputFormat::Text, eval_out) == 0);
  CHECK(slurp(eval_cfg.out / "report.json") == trained);
  CHECK(eval_out.str() == out.str());
}

TEST_CASE("evaluate refuses preprocessed data of the wrong length") {
  auto cfg = small_config("eval_len");
  std::ostringstream sink;
  cmd_train(cfg, OutputFormat::Text, sink, sink);
  auto pre = cfg;
  pre.preprocess.target_length = 6;
  pre.out = cfg.out / "pre";
  cmd_preprocess(pre, OutputFormat::Text, sink);

  auto eval_cfg = cfg;
  eval_cfg.data = pre.out / "preprocessed.jsonl";
  eval_cfg.out = cfg.out / "eval";
  try {
    run_evaluate(eval_cfg, load_model(cfg.out / "model"));
    FAIL("expected a length error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("target_length 8") != std::string::npos);
  }
}

TEST_CASE("json and csv reports carry the same numbers") {
  auto cfg = small_config("formats");
  cfg.models = {"KNN", "RF"};
  const auto res = run_compare(cfg);
  const auto j = nlohmann::json::parse(render_report(res.rows, OutputFormat::Json));
  std::istringstream csv(render_report(res.rows, OutputFormat::Csv));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "model,accuracy,precision,recall,f1");
  for (std::size_t r = 0; r < res.rows.size(); ++r) {
    std::getline(csv, line);
    std::istringstream fields(line);
    std::string name, v;
    std::getline(fields, name, ',');
    CHECK(name == j["models"][r]["model"].get<std::string>());
    for (const char* key : {"accuracy", "precision", "recall", "f1"}) {
      std::getline(fields, v, ',');
      CHECK(std::stod(v) == j["models"][r][key].get<double>());
    }
  }
}

TEST_CASE("generate and preprocess commands") {
  auto cfg = small_config("gen");
  cfg.seed = 7;
  std::ostringstream out;
  CHECK(cmd_generate(cfg, OutputFormat::Json, out) == 0);
  const auto doc = nlohmann::json::parse(out.str());
  CHECK(doc["sequences"] == 3 * 3 * 2 * 3);
  const auto first = slurp(cfg.out / "data.jsonl");
  std::ostringstream again;
  cmd_generate(cfg, OutputFormat::Json, again);
  CHECK(slurp(cfg.out / "data.jsonl") == first);
  CHECK(std::filesystem::exists(cfg.out / "data.provenance.json"));

  auto pre = cfg;
  pre.data = cfg.out / "data.jsonl";
  pre.out = cfg.out / "pre";
  std::ostringstream pout;
  CHECK(cmd_preprocess(pre, OutputFormat::Json, pout) == 0);
  CHECK(nlohmann::json::parse(pout.str())["target_length"] == 8);
  const auto loaded = load_dataset(pre.out / "preprocessed.jsonl");
  for (const auto& s : loaded.sequences) CHECK(s.preprocessed);

  auto bad = cfg;
  bad.out = "/proc/compdetect_cannot_write_here";
  std::ostringstream sink;
  CHECK_THROWS_AS(cmd_generate(bad, OutputFormat::Text, sink), DataError);
}

TEST_CASE("history csv layout") {
  EpochRecord e;
  e.epoch = 3;
  e.train_loss = 0.5;
  e.train_accuracy = 0.25;
  e.test_accuracy = 0.75;
  const std::vector<HistoryRow> rows{{"GCN", 2, e}};
  CHECK(render_history_csv(rows) == "model,seed,epoch,train_loss,train_accuracy,test_accuracy\nGCN,2,3,0.500000,0.2500,0.7500\n");
}

} // TEST_SUITE
