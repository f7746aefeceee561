// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "compdetect/baselines.hpp"
#include "compdetect/errors.hpp"
#include "compdetect/model_io.hpp"
#include "compdetect/synthgen.hpp"

namespace compdetect {

OutputFormat parse_format(std::string_view s) {
  if (s == "text") return OutputFormat::Text;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError("format must be text, csv or json, got '" + std::string(s) + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  return 1;
}

namespace {

// Runs one pipeline stage, prefixing its errors with the stage name.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = std::string("[") + name + "] ";
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Prepared {
  Dataset data;
  std::optional<FittedPreprocess> fitted;
};

bool all_preprocessed(const Dataset& ds) {
  return !ds.sequences.empty() &&
         std::all_of(ds.sequences.begin(), ds.sequences.end(), [](const auto& s) { return s.preprocessed; });
}

Prepared prepare(const RunConfig& cfg, std::uint64_t seed) {
  const Dataset raw = stage("load", [&] { return obtain_dataset(cfg, seed); });
  Dataset split =
      stage("split", [&] { return split_dataset(raw, cfg.split_fraction, seed, cfg.split_by); });
  if (all_preprocessed(split)) return {std::move(split), std::nullopt};
  auto res = stage("preprocess", [&] { return preprocess_dataset(split, cfg.preprocess); });
  return {std::move(res.data), std::move(res.fitted)};
}

std::vector<Label> labels_of(std::span<const MotionSequence> seqs) {
  std::vector<Label> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(s.label);
  return out;
}

MetricsReport score(std::span<const MotionSequence> test, std::span<const Label> pred) {
  return compute_metrics(confusion(labels_of(test), pred));
}

std::vector<NamedReport> average_rows(const std::vector<std::vector<NamedReport>>& per_seed) {
  std::vector<NamedReport> rows;
  for (std::size_t m = 0; m < per_seed.front().size(); ++m) {
    std::vector<MetricsReport> reps;
    for (const auto& run : per_seed) reps.push_back(run[m].report);
    rows.push_back({per_seed.front()[m].model, average_reports(reps)});
  }
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("short write to " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

TrainConfig seeded(TrainConfig t, std::uint64_t seed) {
  t.seed = seed;
  return t;
}

} // namespace

Dataset obtain_dataset(const RunConfig& cfg, std::uint64_t seed) {
  if (cfg.data) {
    Dataset ds = load_dataset(*cfg.data);
    if (ds.sequences.empty()) throw DataError("dataset " + cfg.data->string() + " holds no sequences");
    return ds;
  }
  GenConfig g = cfg.generate;
  g.seed = seed;
  return generate(g).dataset;
}

std::uint64_t dataset_hash(const Dataset& ds) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  if (ds.split) {
    for (auto i : ds.split->train) mix(&i, sizeof i);
    const std::uint64_t sep = ~0ULL;
    mix(&sep, sizeof sep);
    for (auto i : ds.split->test) mix(&i, sizeof i);
  }
  for (const auto& s : ds.sequences) {
    const int code = label_code(s.label);
    mix(&code, sizeof code);
    for (const auto& f : s.frames) mix(f.coords.data(), sizeof(double) * kChannelCount);
  }
  return h;
}

std::string render_history_csv(std::span<const HistoryRow> rows) {
  std::ostringstream os;
  os << "model,seed,epoch,train_loss,train_accuracy,test_accuracy\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%llu,%zu,%.6f,%.4f,%.4f\n", r.model.c_str(),
                  static_cast<unsigned long long>(r.seed), r.record.epoch, r.record.train_loss,
                  r.record.train_accuracy, r.record.test_accuracy);
    os << buf;
  }
  return os.str();
}

std::string render_report(std::span<const NamedReport> rows, OutputFormat fmt) {
  switch (fmt) {
  case OutputFormat::Text: return render_text(rows);
  case OutputFormat::Csv: return render_csv(rows);
  case OutputFormat::Json: return render_json(rows);
  }
  return {};
}

nlohmann::json ExperimentResult::to_json() const {
  nlohmann::json doc = report_json(rows);
  doc["seeds"] = seeds;
  nlohmann::json hashes = nlohmann::json::array();
  for (auto h : data_hashes) hashes.push_back(hex(h));
  doc["data_hashes"] = hashes;
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < per_seed.size(); ++i) {
    runs.push_back({{"seed", seeds[i]}, {"models", report_json(per_seed[i])["models"]}});
  }
  doc["per_seed"] = std::move(runs);
  return doc;
}

ExperimentResult run_compare(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  auto wants = [&cfg](const char* m) {
    return std::find(cfg.models.begin(), cfg.models.end(), m) != cfg.models.end();
  };
  ExperimentResult res;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const std::uint64_t seed = cfg.seed + r;
    const Prepared p = prepare(cfg, seed);
    const auto train_seqs = p.data.train_sequences();
    const auto test_seqs = p.data.test_sequences();
    const FeatureMatrix xtr = to_features(train_seqs);
    const FeatureMatrix xte = to_features(test_seqs);
    std::vector<NamedReport> rows;
    auto timed = [&](const char* name, auto&& fit_predict) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::vector<Label> pred = stage(name, fit_predict);
      rows.push_back({name, score(test_seqs, pred)});
      if (log) {
        *log << "seed " << seed << " " << name << ": accuracy " << format_metric(rows.back().report.accuracy)
             << " (" << format_metric(seconds_since(t0)) << " s)\n";
      }
    };
    if (wants("SVM")) {
      timed("SVM", [&] {
        SvmConfig c = cfg.baselines.svm;
        c.seed = seed;
        return predict_all(svm_train(xtr, c), xte);
      });
    }
    if (wants("KNN")) {
      timed("KNN", [&] { return predict_all(KnnModel{cfg.baselines.knn_k, xtr}, xte); });
    }
    if (wants("RF")) {
      timed("RF", [&] {
        RfConfig c = cfg.baselines.rf;
        c.seed = seed;
        return predict_all(rf_train(xtr, c), xte);
      });
    }
    if (wants("GCN-LSTM-ATT")) {
      timed("GCN-LSTM-ATT", [&] {
        ModelConfig mc = cfg.model;
        mc.variant = Variant::GcnLstmAtt;
        auto tr = train(p.data, mc, seeded(cfg.train, seed));
        for (const auto& e : tr.history) res.history.push_back({"GCN-LSTM-ATT", seed, e});
        return predict(tr.model, test_seqs);
      });
    }
    res.seeds.push_back(seed);
    res.data_hashes.push_back(dataset_hash(p.data));
    res.per_seed.push_back(std::move(rows));
  }
  res.rows = average_rows(res.per_seed);
  return res;
}

ExperimentResult run_ablate(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  ExperimentResult res;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const std::uint64_t seed = cfg.seed + r;
    const Prepared p = prepare(cfg, seed);
    const std::uint64_t hash = dataset_hash(p.data);
    const auto test_seqs = p.data.test_sequences();
    std::vector<NamedReport> rows;
    for (Variant v : {Variant::GcnOnly, Variant::GcnLstm, Variant::GcnLstmAtt}) {
      const std::string name(variant_name(v));
      // The controlled-variable contract: every variant sees the same tensors and split.
      const std::uint64_t seen = dataset_hash(p.data);
      if (seen != hash) throw DataError("ablate: data hash changed before " + name);
      if (log) {
        *log << "seed " << seed << " " << name << ": data " << hex(seen) << ", " << p.data.split->train.size()
             << " train / " << p.data.split->test.size() << " test\n";
      }
      const auto t0 = std::chrono::steady_clock::now();
      ModelConfig mc = cfg.model;
      mc.variant = v;
      auto tr = stage(name.c_str(), [&] { return train(p.data, mc, seeded(cfg.train, seed)); });
      for (const auto& e : tr.history) res.history.push_back({name, seed, e});
      rows.push_back({name, score(test_seqs, predict(tr.model, test_seqs))});
      if (log) {
        *log << "seed " << seed << " " << name << ": accuracy " << format_metric(rows.back().report.accuracy)
             << " (" << format_metric(seconds_since(t0)) << " s)\n";
      }
    }
    res.seeds.push_back(seed);
    res.data_hashes.push_back(hash);
    res.per_seed.push_back(std::move(rows));
  }
  res.rows = average_rows(res.per_seed);
  return res;
}

GradientCheckReport run_gradient_check(std::uint64_t seed, bool corrupt) {
  constexpr std::size_t kBatch = 3, kSteps = 5;
  ModelConfig mc;
  mc.gcn_channels = {3, 4};
  mc.lstm_hidden = 6;
  mc.attention_dim = 5;
  mc.variant = Variant::GcnLstmAtt;
  GcnLstmAttModel model(mc, canonical_upper_limb_graph(), seed);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Non-zero biases so every term of the adjoints is exercised.
  std::vector<ad::Var> params;
  std::vector<std::string> names;
  for (auto& p : model.parameters()) {
    for (auto& v : p.var.mutable_value().values()) v = 0.5 * normal(rng);
    params.push_back(p.var);
    names.push_back(p.name);
  }
  ad::Tensor x({kBatch, kSteps, kJointCount, 3});
  for (auto& v : x.values()) v = normal(rng);
  std::vector<int> targets;
  std::uniform_int_distribution<int> cls(0, kClassCount - 1);
  for (std::size_t b = 0; b < kBatch; ++b) targets.push_back(cls(rng));

  const ad::Var input = ad::constant(x);
  auto loss = [&](ad::Tape& tape) {
    return ad::cross_entropy(tape, model.forward(tape, input).logits, targets);
  };
  ad::GradientHook hook;
  if (corrupt) hook = [](std::vector<ad::Tensor>& g) { g.front()[0] += 0.1; };
  GradientCheckReport rep;
  rep.result = ad::gradient_check(loss, params, 1e-5, hook);
  rep.worst_param = names.at(rep.result.worst_param);
  rep.passed = rep.result.max_rel_error < kGradientTolerance;
  return rep;
}

void write_reports(const std::filesystem::path& out, const nlohmann::json& report_doc,
                   std::span<const NamedReport> rows, std::span<const HistoryRow> history) {
  ensure_dir(out);
  write_file(out / "report.csv", render_csv(rows));
  write_file(out / "report.json", report_doc.dump(2) + "\n");
  if (!history.empty()) write_file(out / "history.csv", render_history_csv(history));
}

TrainOutcome run_train(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  const Prepared p = prepare(cfg, cfg.seed);
  auto progress = [log](const EpochRecord& e) {
    if (log && (e.epoch % 10 == 0 || e.epoch == 1)) {
      *log << "epoch " << e.epoch << ": loss " << format_metric(e.train_loss) << ", train acc "
           << format_metric(e.train_accuracy) << ", test acc " << format_metric(e.test_accuracy) << "\n";
    }
  };
  auto tr = stage("train", [&] {
    return train(p.data, cfg.model, seeded(cfg.train, cfg.seed), canonical_upper_limb_graph(), progress);
  });
  tr.model.preprocess = p.fitted;
  const auto test_seqs = p.data.test_sequences();
  MetricsReport rep = score(test_seqs, predict(tr.model, test_seqs));
  return {std::move(tr.model), std::move(tr.history), std::move(rep)};
}

MetricsReport run_evaluate(const RunConfig& cfg, const GcnLstmAttModel& model) {
  const Dataset raw = stage("load", [&] { return obtain_dataset(cfg, cfg.seed); });
  Dataset split =
      stage("split", [&] { return split_dataset(raw, cfg.split_fraction, cfg.seed, cfg.split_by); });
  Dataset data;
  if (all_preprocessed(split)) {
    for (const auto& s : split.sequences) {
      if (s.frames.size() != model.target_length) {
        throw DataError("[evaluate] sequence " + s.describe() + " has " + std::to_string(s.frames.size()) +
                        " frames but the model expects target_length " + std::to_string(model.target_length));
      }
    }
    data = std::move(split);
  } else {
    if (!model.preprocess) throw DataError("[evaluate] model has no stored preprocessing; pass preprocessed data");
    data = stage("preprocess", [&] { return preprocess_with(split, *model.preprocess); });
  }
  const auto test_seqs = data.test_sequences();
  return stage("evaluate", [&] { return score(test_seqs, predict(model, test_seqs)); });
}

int cmd_generate(const RunConfig& cfg, OutputFormat fmt, std::ostream& out) {
  GenConfig g = cfg.generate;
  g.seed = cfg.seed;
  const auto data = stage("generate", [&] { return generate(g); });
  ensure_dir(cfg.out);
  const auto path = cfg.out / "data.jsonl";
  stage("write", [&] { save_generated(data, g, path); });
  std::array<std::size_t, kClassCount> counts{};
  for (const auto& s : data.dataset.sequences) ++counts[label_code(s.label)];
  nlohmann::json doc = {{"path", path.string()},
                        {"provenance", provenance_path_for(path).string()},
                        {"sequences", data.dataset.size()}};
  for (int k = 0; k < static_cast<int>(kClassCount); ++k) doc["labels"][std::string(label_name(label_from_code(k)))] = counts[static_cast<std::size_t>(k)];
  if (fmt == OutputFormat::Json) {
    out << doc.dump(2) << "\n";
  } else if (fmt == OutputFormat::Csv) {
    out << "path,sequences,NC,TLF,TR,SE\n"
        << path.string() << ',' << data.dataset.size() << ',' << counts[0] << ',' << counts[1] << ','
        << counts[2] << ',' << counts[3] << "\n";
  } else {
    out << "wrote " << data.dataset.size() << " sequences to " << path.string() << "\n"
        << "labels: NC " << counts[0] << ", TLF " << counts[1] << ", TR " << counts[2] << ", SE " << counts[3]
        << "\n";
  }
  return 0;
}

int cmd_preprocess(const RunConfig& cfg, OutputFormat fmt, std::ostream& out) {
  cfg.validate();
  const Prepared p = prepare(cfg, cfg.seed);
  ensure_dir(cfg.out);
  save_dataset(p.data, cfg.out / "preprocessed.jsonl");
  if (p.fitted) save_fitted(*p.fitted, cfg.out / "stats.json");
  write_file(cfg.out / "split.json",
             nlohmann::json({{"train", p.data.split->train}, {"test", p.data.split->test}}).dump() + "\n");
  std::size_t degenerate = 0;
  if (p.fitted) {
    for (std::size_t c = 0; c < kChannelCount; ++c) degenerate += p.fitted->stats.degenerate(c) ? 1 : 0;
  }
  const std::size_t length = p.data.sequences.front().frames.size();
  nlohmann::json doc = {{"sequences", p.data.size()},
                        {"train", p.data.split->train.size()},
                        {"test", p.data.split->test.size()},
                        {"target_length", length},
                        {"degenerate_channels", degenerate},
                        {"data_hash", hex(dataset_hash(p.data))}};
  if (fmt == OutputFormat::Json) {
    out << doc.dump(2) << "\n";
  } else if (fmt == OutputFormat::Csv) {
    out << "sequences,train,test,target_length,degenerate_channels,data_hash\n"
        << p.data.size() << ',' << p.data.split->train.size() << ',' << p.data.split->test.size() << ','
        << length << ',' << degenerate << ',' << hex(dataset_hash(p.data)) << "\n";
  } else {
    out << "preprocessed " << p.data.size() << " sequences (" << p.data.split->train.size() << " train, "
        << p.data.split->test.size() << " test) to length " << length << "\n"
        << "degenerate channels: " << degenerate << "\n";
  }
  return 0;
}

int cmd_train(const RunConfig& cfg, OutputFormat fmt, std::ostream& out, std::ostream& log) {
  auto res = run_train(cfg, &log);
  save_model(res.model, cfg.out / "model");
  const std::string name(variant_name(cfg.model.variant));
  const std::vector<NamedReport> rows{{name, res.test_report}};
  std::vector<HistoryRow> history;
  for (const auto& e : res.history) history.push_back({name, cfg.seed, e});
  write_reports(cfg.out, report_json(rows), rows, history);
  out << render_report(rows, fmt);
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& model_path, OutputFormat fmt,
                 std::ostream& out) {
  const auto model = stage("load model", [&] { return load_model(model_path); });
  const std::vector<NamedReport> rows{{std::string(variant_name(model.config().variant)), run_evaluate(cfg, model)}};
  write_reports(cfg.out, report_json(rows), rows, {});
  out << render_report(rows, fmt);
  return 0;
}

int cmd_compare(const RunConfig& cfg, OutputFormat fmt, std::ostream& out, std::ostream& log) {
  const auto res = run_compare(cfg, &log);
  write_reports(cfg.out, res.to_json(), res.rows, res.history);
  out << render_report(res.rows, fmt);
  return 0;
}

int cmd_ablate(const RunConfig& cfg, OutputFormat fmt, std::ostream& out, std::ostream& log) {
  const auto res = run_ablate(cfg, &log);
  write_reports(cfg.out, res.to_json(), res.rows, res.history);
  out << render_report(res.rows, fmt);
  return 0;
}

int cmd_gradient_check(const RunConfig& cfg, bool corrupt, OutputFormat fmt, std::ostream& out) {
  const auto rep = run_gradient_check(cfg.seed, corrupt);
  char err[32];
  std::snprintf(err, sizeof(err), "%.6e", rep.result.max_rel_error);
  nlohmann::json doc = {{"max_rel_error", err},
                        {"tolerance", kGradientTolerance},
                        {"entries_checked", rep.result.entries_checked},
                        {"worst_param", rep.worst_param},
                        {"worst_index", rep.result.worst_index},
                        {"passed", rep.passed}};
  ensure_dir(cfg.out);
  write_file(cfg.out / "report.json", doc.dump(2) + "\n");
  const std::string csv = std::string("max_rel_error,entries_checked,worst_param,worst_index,passed\n") + err +
                          "," + std::to_string(rep.result.entries_checked) + "," + rep.worst_param + "," +
                          std::to_string(rep.result.worst_index) + "," + (rep.passed ? "true" : "false") + "\n";
  write_file(cfg.out / "report.csv", csv);
  if (fmt == OutputFormat::Json) {
    out << doc.dump(2) << "\n";
  } else if (fmt == OutputFormat::Csv) {
    out << csv;
  } else {
    out << "max relative error " << err << " over " << rep.result.entries_checked << " entries (worst: "
        << rep.worst_param << "[" << rep.result.worst_index << "]) " << (rep.passed ? "PASS" : "FAIL") << "\n";
  }
  return rep.passed ? 0 : 4;
}

} // namespace compdetect
