// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors
//
// Command-line front end. Flags given on the command line override the config file.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "compdetect/config.hpp"
#include "compdetect/errors.hpp"
#include "compdetect/harness.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string format = "text";
  std::optional<std::string> data;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> repeats;
  std::optional<std::string> split_by;
  std::vector<std::string> models;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file (empty file = defaults)");
  cmd->add_option("--seed", f.seed, "global seed (generation, split, training)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--format", f.format, "stdout report format")->check(CLI::IsMember({"text", "csv", "json"}));
  cmd->add_option("--data", f.data, "dataset JSONL; omitted: generate synthetic data");
}

compdetect::RunConfig resolve(const CommonFlags& f) {
  compdetect::RunConfig cfg = f.config.empty() ? compdetect::RunConfig{} : compdetect::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.data) cfg.data = *f.data;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.repeats) cfg.repeats = *f.repeats;
  if (f.split_by) {
    if (*f.split_by == "subject") {
      cfg.split_by = compdetect::SplitMode::Subject;
    } else if (*f.split_by == "sequence") {
      cfg.split_by = compdetect::SplitMode::Sequence;
    } else {
      throw compdetect::ConfigError("--split-by must be sequence or subject");
    }
  }
  if (!f.models.empty()) {
    cfg.models.clear();
    for (const auto& m : f.models) {
      std::string up;
      for (char c : m) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      if (up == "GCN_LSTM_ATT") up = "GCN-LSTM-ATT";
      cfg.models.push_back(up);
    }
  }
  cfg.validate();
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Training allocates and frees multi-megabyte activations every step; keep them on the heap.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"Compensatory-movement detection from skeleton sequences"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string model_path;
  bool corrupt = false;
  std::optional<std::string> variant;

  auto* gen = app.add_subcommand("generate-data", "write a synthetic dataset (JSONL + provenance)");
  auto* pre = app.add_subcommand("preprocess", "split and preprocess a dataset");
  auto* trn = app.add_subcommand("train", "train the GCN-LSTM-ATT model and save it");
  auto* evl = app.add_subcommand("evaluate", "evaluate a saved model on the test split");
  auto* cmp = app.add_subcommand("compare", "SVM / KNN / RF / GCN-LSTM-ATT comparison");
  auto* abl = app.add_subcommand("ablate", "GCN / GCN-LSTM / GCN-LSTM-ATT ablation");
  auto* grd = app.add_subcommand("gradient-check", "finite-difference check of the model gradients");
  for (auto* c : {gen, pre, trn, evl, cmp, abl, grd}) add_common(c, flags);
  for (auto* c : {pre, trn, evl, cmp, abl}) c->add_option("--split-by", flags.split_by, "sequence or subject");
  for (auto* c : {trn, cmp, abl}) c->add_option("--epochs", flags.epochs, "training epochs");
  for (auto* c : {cmp, abl}) c->add_option("--repeats", flags.repeats, "number of seeds to average");
  cmp->add_option("--models", flags.models, "subset of SVM, KNN, RF, GCN-LSTM-ATT")->delimiter(',');
  trn->add_option("--variant", variant, "GCN_ONLY, GCN_LSTM or GCN_LSTM_ATT");
  evl->add_option("--model", model_path, "model directory or manifest")->required();
  grd->add_flag("--corrupt-adjoint", corrupt, "perturb one analytic gradient (negative control)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto cfg = resolve(flags);
    if (variant) cfg.model.variant = compdetect::parse_variant(*variant);
    const auto fmt = compdetect::parse_format(flags.format);
    if (*gen) return compdetect::cmd_generate(cfg, fmt, std::cout);
    if (*pre) return compdetect::cmd_preprocess(cfg, fmt, std::cout);
    if (*trn) return compdetect::cmd_train(cfg, fmt, std::cout, std::cerr);
    if (*evl) return compdetect::cmd_evaluate(cfg, model_path, fmt, std::cout);
    if (*cmp) return compdetect::cmd_compare(cfg, fmt, std::cout, std::cerr);
    if (*abl) return compdetect::cmd_ablate(cfg, fmt, std::cout, std::cerr);
    if (*grd) return compdetect::cmd_gradient_check(cfg, corrupt, fmt, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return compdetect::exit_code_for(e);
  }
  return 1;
}
