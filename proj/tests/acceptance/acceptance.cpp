// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors
//
// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.
//   acceptance --cli <compdetect binary> --work <scratch dir> --experiment <config.json> [--only 1,2,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "compdetect/autodiff.hpp"
#include "compdetect/baselines.hpp"
#include "compdetect/metrics.hpp"
#include "compdetect/model.hpp"
#include "compdetect/preprocess.hpp"
#include "compdetect/synthgen.hpp"

using namespace compdetect;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

struct Env {
  fs::path cli;
  fs::path work;
  fs::path experiment;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int exit_code = -1;
  double seconds = 0.0;
};

RunResult run_cli(const Env& env, const std::string& args, const fs::path& log) {
  // stdout to `log`, progress and timings on stderr to `log`.err
  const std::string cmd = "\"" + env.cli.string() + "\" " + args + " > \"" + log.string() + "\" 2> \"" +
                          log.string() + ".err\"";
  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.exit_code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  return r;
}

// Seed-averaged accuracy recomputed from the per-seed confusion matrices (the
// reported figures are rounded to four places).
double model_accuracy(const json& report, const std::string& model) {
  double total = 0.0;
  std::size_t runs = 0;
  for (const auto& run : report.at("per_seed")) {
    for (const auto& m : run.at("models")) {
      if (m.at("model") != model) continue;
      double diag = 0.0, all = 0.0;
      const auto& cm = m.at("confusion");
      for (std::size_t i = 0; i < cm.size(); ++i) {
        for (std::size_t j = 0; j < cm[i].size(); ++j) {
          all += cm[i][j].get<double>();
          if (i == j) diag += cm[i][j].get<double>();
        }
      }
      total += diag / all;
      ++runs;
    }
  }
  if (runs == 0) throw std::runtime_error("model " + model + " missing from report");
  return total / static_cast<double>(runs);
}

MotionSequence random_sequence(std::mt19937_64& rng, std::size_t n, double spread) {
  std::normal_distribution<double> nd(0.0, spread);
  MotionSequence s;
  s.frames.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    s.frames[t].timestamp = static_cast<double>(t) / 30.0;
    for (auto& c : s.frames[t].coords) c = nd(rng);
  }
  return s;
}

// 1. gradient-check through the CLI.
Outcome gradient_fidelity(const Env& env) {
  Outcome o;
  const auto dir = env.work / "c1";
  const auto r = run_cli(env, "gradient-check --out \"" + dir.string() + "\" --format json", env.work / "c1.log");
  o.check(r.exit_code == 0, "gradient-check exit code " + std::to_string(r.exit_code));
  const auto doc = json::parse(slurp(dir / "report.json"));
  const double err = std::stod(doc.at("max_rel_error").get<std::string>());
  o.check(err < 1e-4, "max relative error " + fmt(err) + " >= 1e-4");
  o.check(r.seconds < 60.0, "runtime " + fmt(r.seconds) + " s >= 60 s");
  o.note("max rel error " + fmt(err, 3) + " over " + std::to_string(doc.at("entries_checked").get<int>()) +
         " entries, " + fmt(r.seconds, 3) + " s");
  return o;
}

// 2. adjacency, cross-entropy and attention oracles.
Outcome numeric_oracles(const Env&) {
  Outcome o;
  SkeletonGraph path;
  path.n_nodes = 3;
  path.edges = {{0, 1}, {1, 2}};
  const auto a = normalize_adjacency(path);
  const double e01 = std::abs(a[1] - 1.0 / std::sqrt(6.0));
  o.check(e01 < 1e-12, "path adjacency error " + fmt(e01));

  ad::Tape tape;
  const std::vector<int> target{1};
  const double ce = ad::cross_entropy(tape, ad::constant(ad::Tensor({1, 4}, 0.0)), target).value().item();
  o.check(std::abs(ce - std::log(4.0)) < 1e-12, "uniform cross-entropy " + fmt(ce, 17));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto rnd = [&](ad::Shape s, double scale) {
    ad::Tensor t(std::move(s));
    for (auto& v : t.values()) v = scale * nd(rng);
    return t;
  };
  const AttentionParams p{ad::parameter(rnd({8, 6}, 1.0)), ad::parameter(rnd({6}, 1.0)), ad::parameter(rnd({6, 1}, 2.0))};
  double worst = 0.0;
  tape.set_grad_enabled(false);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t steps = 1 + static_cast<std::size_t>(i % 40);
    const auto out = attention_pool(tape, ad::constant(rnd({1, steps, 8}, 3.0)), p);
    double s = 0.0;
    for (double v : out.alpha.value().values()) {
      o.check(v >= 0.0, "negative attention weight");
      s += v;
    }
    worst = std::max(worst, std::abs(s - 1.0));
  }
  o.check(worst < 1e-12, "attention sum error " + fmt(worst));
  o.note("adjacency err " + fmt(e01, 2) + ", ln4 err " + fmt(std::abs(ce - std::log(4.0)), 2) +
         ", attention sum err " + fmt(worst, 2));
  return o;
}

// 3. spline, z-score and dedup oracles.
Outcome preprocessing_oracles(const Env&) {
  Outcome o;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> gap(0.01, 0.1);

  double knot_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_sequence(rng, 6 + static_cast<std::size_t>(trial), 1.0);
    double t = 0.0;
    for (auto& f : s.frames) {
      f.timestamp = t;
      t += gap(rng);
    }
    const double span = s.frames.back().timestamp;
    std::vector<double> u;
    for (const auto& f : s.frames) u.push_back(f.timestamp / span);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      std::vector<double> y;
      for (const auto& f : s.frames) y.push_back(f.coords[c]);
      const NaturalCubicSpline spline(u, y);
      for (std::size_t i = 0; i < u.size(); ++i) knot_err = std::max(knot_err, std::abs(spline(u[i]) - y[i]));
    }
  }
  o.check(knot_err < 1e-9, "knot fidelity error " + fmt(knot_err));

  MotionSequence lin;
  for (std::size_t t = 0; t < 13; ++t) {
    SkeletonFrame f;
    f.timestamp = 0.05 * static_cast<double>(t) + 0.01 * static_cast<double>(t * t);
    for (std::size_t c = 0; c < kChannelCount; ++c) f.coords[c] = 0.1 * static_cast<double>(c) - 2.0 * f.timestamp;
    lin.frames.push_back(f);
  }
  double lin_err = 0.0;
  for (const auto& f : resample_cubic_spline(lin, 17).frames) {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      lin_err = std::max(lin_err, std::abs(f.coords[c] - (0.1 * static_cast<double>(c) - 2.0 * f.timestamp)));
    }
  }
  o.check(lin_err < 1e-9, "linear reproduction error " + fmt(lin_err));

  std::vector<MotionSequence> train;
  for (int i = 0; i < 12; ++i) {
    auto s = random_sequence(rng, 10 + static_cast<std::size_t>(i), 0.4);
    for (auto& f : s.frames) {
      for (auto& c : f.coords) c += 1.5;
    }
    train.push_back(s);
  }
  const auto st = fit_channel_stats(train);
  std::vector<MotionSequence> z;
  for (const auto& s : train) z.push_back(apply_zscore(s, st));
  const auto st2 = fit_channel_stats(z);
  double mean_err = 0.0, std_err = 0.0;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    mean_err = std::max(mean_err, std::abs(st2.mean[c]));
    std_err = std::max(std_err, std::abs(st2.std[c] - 1.0));
  }
  o.check(mean_err < 1e-9 && std_err < 1e-9, "z-score error mean " + fmt(mean_err) + " std " + fmt(std_err));

  PreprocessConfig cfg;
  std::uniform_int_distribution<int> pick(0, 3);
  std::normal_distribution<double> jitter(0.0, 0.0015);
  int idempotent = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto anchors = random_sequence(rng, 4, 0.01);
    MotionSequence s;
    for (std::size_t t = 0; t < 40; ++t) {
      SkeletonFrame f = anchors.frames[static_cast<std::size_t>(pick(rng))];
      for (auto& c : f.coords) c += jitter(rng);
      f.timestamp = static_cast<double>(t);
      s.frames.push_back(f);
    }
    const auto once = dedup_sliding_window(s, cfg);
    const auto twice = dedup_sliding_window(once, cfg);
    bool same = once.frames.size() == twice.frames.size();
    for (std::size_t i = 0; same && i < once.frames.size(); ++i) {
      same = once.frames[i].timestamp == twice.frames[i].timestamp && once.frames[i].coords == twice.frames[i].coords;
    }
    idempotent += same ? 1 : 0;
  }
  o.check(idempotent == 100, "dedup idempotent on " + std::to_string(idempotent) + "/100");
  o.note("knot err " + fmt(knot_err, 2) + ", linear err " + fmt(lin_err, 2) + ", z-score err " +
         fmt(std::max(mean_err, std_err), 2) + ", dedup idempotent 100/100");
  return o;
}

// 4. metrics oracles.
Outcome metrics_oracle(const Env&) {
  Outcome o;
  ConfusionMatrix cm;
  cm.counts[1][1] = 3; // TP
  cm.counts[0][1] = 1; // FP
  cm.counts[1][0] = 2; // FN
  cm.counts[0][0] = 4; // TN
  const auto r = compute_metrics(cm);
  const auto& pos = r.per_class[1];
  o.check(std::abs(pos.precision - 0.75) < 1e-12, "precision " + fmt(pos.precision));
  o.check(std::abs(pos.recall - 0.6) < 1e-12, "recall " + fmt(pos.recall));
  o.check(format_metric(pos.f1) == "0.6667" && std::abs(pos.f1 - 0.666667) < 1e-6, "f1 " + fmt(pos.f1));
  o.check(std::abs(r.accuracy - 0.7) < 1e-12, "accuracy " + fmt(r.accuracy));

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> count(0, 50);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    ConfusionMatrix m;
    for (auto& row : m.counts) {
      for (auto& c : row) c = static_cast<std::uint64_t>(count(rng));
    }
    m.counts[0][0] += 1;
    const auto rep = compute_metrics(m);
    worst = std::max(worst, std::abs(rep.recall - rep.accuracy));
  }
  o.check(worst < 1e-12, "weighted recall vs accuracy " + fmt(worst));
  o.note("binary example p/r/f1/acc = " + format_metric(pos.precision) + "/" + format_metric(pos.recall) + "/" +
         format_metric(pos.f1) + "/" + format_metric(r.accuracy) + ", recall-accuracy gap " + fmt(worst, 2));
  return o;
}

// 5. baseline oracles.
Outcome baseline_oracles(const Env&) {
  Outcome o;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 3);

  FeatureMatrix train;
  train.cols = 5;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(5);
    for (auto& v : x) v = nd(rng);
    train.push(x, label_from_code(pick(rng)));
  }
  int agree = 0;
  for (int q = 0; q < 200; ++q) {
    std::vector<double> x(5);
    for (auto& v : x) v = nd(rng);
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < 5; ++c) s += (train.row(i)[c] - x[c]) * (train.row(i)[c] - x[c]);
      d.emplace_back(s, i);
    }
    std::sort(d.begin(), d.end());
    std::array<int, 4> votes{};
    for (std::size_t i = 0; i < 5; ++i) ++votes[static_cast<std::size_t>(label_code(train.labels[d[i].second]))];
    const auto ref = label_from_code(static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
    agree += knn_classify(train, x, 5) == ref ? 1 : 0;
  }
  o.check(agree == 200, "knn agrees with the reference on " + std::to_string(agree) + "/200");

  int self = 0;
  for (std::size_t i = 0; i < train.rows(); ++i) self += knn_classify(train, train.row(i), 1) == train.labels[i];
  o.check(self == static_cast<int>(train.rows()), "k=1 self accuracy " + std::to_string(self));

  auto xor_set = [&](int per) {
    std::normal_distribution<double> jit(0.0, 0.25);
    FeatureMatrix m;
    m.cols = 2;
    for (int i = 0; i < per; ++i) {
      for (double sx : {-1.0, 1.0}) {
        for (double sy : {-1.0, 1.0}) m.push(std::vector<double>{sx + jit(rng), sy + jit(rng)}, sx * sy > 0 ? Label::NC : Label::TLF);
      }
    }
    return m;
  };
  const auto xtrain = xor_set(100), xtest = xor_set(100);
  const auto rf = rf_train(xtrain, RfConfig{});
  const auto pred = predict_all(rf, xtest);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == xtest.labels[i];
  const double rf_acc = static_cast<double>(ok) / static_cast<double>(pred.size());
  o.check(rf_acc > 0.95, "rf xor accuracy " + fmt(rf_acc));

  FeatureMatrix blobs;
  blobs.cols = 2;
  std::normal_distribution<double> tight(0.0, 0.5);
  for (int i = 0; i < 100; ++i) {
    blobs.push(std::vector<double>{-3.0 + tight(rng), -3.0 + tight(rng)}, Label::NC);
    blobs.push(std::vector<double>{3.0 + tight(rng), 3.0 + tight(rng)}, Label::SE);
  }
  const auto svm = svm_train(blobs, SvmConfig{});
  const auto sp = predict_all(svm, blobs);
  std::size_t sok = 0;
  for (std::size_t i = 0; i < sp.size(); ++i) sok += sp[i] == blobs.labels[i];
  const double svm_acc = static_cast<double>(sok) / static_cast<double>(sp.size());
  o.check(svm_acc == 1.0, "svm blob train accuracy " + fmt(svm_acc));
  o.note("knn 200/200, k=1 self 1.0, rf xor " + fmt(rf_acc) + ", svm blobs " + fmt(svm_acc));
  return o;
}

// 6. Table-2 structure.
Outcome table2(const Env& env) {
  Outcome o;
  const auto dir = env.work / "c6";
  const auto r = run_cli(env, "compare --config \"" + env.experiment.string() + "\" --out \"" + dir.string() + "\"",
                         env.work / "c6.log");
  o.check(r.exit_code == 0, "compare exit code " + std::to_string(r.exit_code));
  if (r.exit_code != 0) return o;
  const auto doc = json::parse(slurp(dir / "report.json"));
  const auto& models = doc.at("models");
  std::vector<std::string> names;
  for (const auto& m : models) names.push_back(m.at("model"));
  o.check(names == std::vector<std::string>{"SVM", "KNN", "RF", "GCN-LSTM-ATT"}, "row order");
  o.check(doc.at("seeds").size() == 3, "seed count " + std::to_string(doc.at("seeds").size()));
  const double gcn = model_accuracy(doc, "GCN-LSTM-ATT");
  const double knn = model_accuracy(doc, "KNN");
  o.check(gcn >= 0.90, "GCN-LSTM-ATT mean accuracy " + fmt(gcn) + " < 0.90");
  o.check(gcn > knn, "GCN-LSTM-ATT " + fmt(gcn) + " not above KNN " + fmt(knn));
  o.check(r.seconds < 900.0, "runtime " + fmt(r.seconds) + " s >= 900 s");
  std::string rows;
  for (const auto& m : models) rows += " " + m.at("model").get<std::string>() + "=" + format_metric(m.at("accuracy"));
  o.note("accuracy" + rows + ", " + fmt(r.seconds, 4) + " s");
  return o;
}

// 7. Table-3 structure.
Outcome table3(const Env& env) {
  Outcome o;
  const auto dir = env.work / "c7";
  const auto r = run_cli(env, "ablate --config \"" + env.experiment.string() + "\" --out \"" + dir.string() + "\"",
                         env.work / "c7.log");
  o.check(r.exit_code == 0, "ablate exit code " + std::to_string(r.exit_code));
  if (r.exit_code != 0) return o;
  const auto doc = json::parse(slurp(dir / "report.json"));
  std::vector<std::string> names;
  for (const auto& m : doc.at("models")) names.push_back(m.at("model"));
  o.check(names == std::vector<std::string>{"GCN", "GCN-LSTM", "GCN-LSTM-ATT"}, "row order");
  o.check(doc.at("seeds").size() == 3, "seed count");
  const double g = model_accuracy(doc, "GCN"), gl = model_accuracy(doc, "GCN-LSTM"),
               gla = model_accuracy(doc, "GCN-LSTM-ATT");
  o.check(g < gl, "GCN " + fmt(g) + " not below GCN-LSTM " + fmt(gl));
  o.check(gl <= gla + 0.02, "GCN-LSTM " + fmt(gl) + " above GCN-LSTM-ATT " + fmt(gla) + " + 0.02");
  o.note("accuracy GCN=" + format_metric(g) + " GCN-LSTM=" + format_metric(gl) + " GCN-LSTM-ATT=" +
         format_metric(gla) + ", " + fmt(r.seconds, 4) + " s");
  return o;
}

// 8. Every command twice with a fixed seed; every written file and stdout must match byte for byte.
Outcome determinism(const Env& env) {
  Outcome o;
  const auto cfg_path = env.work / "c8.json";
  {
    std::ofstream(cfg_path) << R"({
  "seed": 3,
  "generate": {"n_subjects": 3, "reps_per_action": 2},
  "preprocess": {"target_length": 10},
  "model": {"gcn_channels": [3, 8, 8], "lstm_hidden": 8, "attention_dim": 8},
  "train": {"epochs": 3},
  "baselines": {"rf": {"n_trees": 10}},
  "repeats": 2
})";
  }
  const std::string cfg = " --config \"" + cfg_path.string() + "\"";
  struct Cmd {
    std::string name;
    std::string args;
  };
  const std::vector<Cmd> cmds{
      {"generate-data", "generate-data" + cfg},
      {"preprocess", "preprocess" + cfg},
      {"train", "train" + cfg},
      {"evaluate", "evaluate" + cfg + " --model \"" + (env.work / "c8_run0_train" / "model").string() + "\""},
      {"compare", "compare" + cfg},
      {"ablate", "ablate" + cfg},
      {"gradient-check", "gradient-check" + cfg},
  };
  int identical = 0;
  for (const auto& c : cmds) {
    std::vector<std::map<std::string, std::string>> runs;
    std::vector<std::string> stdouts;
    for (int rep = 0; rep < 2; ++rep) {
      const auto dir = env.work / ("c8_run" + std::to_string(rep) + "_" + c.name);
      fs::remove_all(dir);
      const auto log = env.work / ("c8_run" + std::to_string(rep) + "_" + c.name + ".out");
      // evaluate always reads the model trained by the first train run
      const auto r = run_cli(env, c.args + " --out \"" + dir.string() + "\" --format json", log);
      o.check(r.exit_code == 0, c.name + " exit code " + std::to_string(r.exit_code));
      std::map<std::string, std::string> files;
      if (fs::exists(dir)) {
        for (const auto& e : fs::recursive_directory_iterator(dir)) {
          if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
        }
      }
      runs.push_back(std::move(files));
      std::string out = slurp(log);
      // paths in the generate summary name the per-run directory
      const std::string tag = "c8_run" + std::to_string(rep);
      for (auto at = out.find(tag); at != std::string::npos; at = out.find(tag, at)) out.replace(at, tag.size(), "c8_runN");
      stdouts.push_back(out);
    }
    const bool reports = !runs[0].empty();
    o.check(reports, c.name + " wrote no output files");
    const bool same = runs[0] == runs[1] && stdouts[0] == stdouts[1];
    o.check(same, c.name + " output differs between runs");
    identical += same && reports ? 1 : 0;
  }
  o.note(std::to_string(identical) + "/" + std::to_string(cmds.size()) + " commands byte-identical");
  return o;
}

// 9. generator validity.
Outcome generator_validity(const Env&) {
  Outcome o;
  GenConfig c;
  c.noise_sigma = 0.0;
  c.n_subjects = 5;
  const auto g = generate(c);
  const auto graph = canonical_upper_limb_graph();
  auto dist = [](const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z); };
  double bone_err = 0.0;
  for (const auto& s : g.dataset.sequences) {
    for (auto [a, b] : graph.edges) {
      const auto ia = static_cast<std::size_t>(a), ib = static_cast<std::size_t>(b);
      const double l0 = dist(s.frames[0].joint(ia), s.frames[0].joint(ib));
      for (const auto& f : s.frames) bone_err = std::max(bone_err, std::abs(dist(f.joint(ia), f.joint(ib)) - l0));
    }
  }
  o.check(bone_err < 1e-9, "bone length drift " + fmt(bone_err));

  double pitch_err = 0.0, yaw_err = 0.0, lift_err = 0.0, nc_angle = 0.0, nc_lift = 0.0;
  for (std::size_t i = 0; i < g.dataset.size(); ++i) {
    const auto sig = compensation_signature(g.dataset.sequences[i]);
    const auto& p = g.provenance[i];
    switch (p.label) {
    case Label::NC:
      nc_angle = std::max({nc_angle, sig.trunk_pitch_deg, sig.trunk_yaw_deg});
      nc_lift = std::max(nc_lift, sig.shoulder_lift_m);
      break;
    case Label::TLF: pitch_err = std::max(pitch_err, std::abs(sig.trunk_pitch_deg - p.magnitude)); break;
    case Label::TR: yaw_err = std::max(yaw_err, std::abs(sig.trunk_yaw_deg - p.magnitude)); break;
    case Label::SE: lift_err = std::max(lift_err, std::abs(sig.shoulder_lift_m - p.magnitude)); break;
    }
  }
  o.check(pitch_err < 1.0, "TLF pitch error " + fmt(pitch_err) + " deg");
  o.check(yaw_err < 1.0, "TR yaw error " + fmt(yaw_err) + " deg");
  o.check(lift_err < 0.005, "SE lift error " + fmt(lift_err) + " m");
  o.check(nc_angle < 2.0 && nc_lift < 0.005, "NC signature " + fmt(nc_angle) + " deg / " + fmt(nc_lift) + " m");

  c.compensation_rate = 0.0;
  std::size_t nc = 0;
  const auto zero = generate(c);
  for (const auto& s : zero.dataset.sequences) nc += s.label == Label::NC;
  o.check(nc == zero.dataset.size(), "rate 0 gives " + std::to_string(nc) + "/" + std::to_string(zero.dataset.size()) + " NC");
  o.note("bone drift " + fmt(bone_err, 2) + ", max errors pitch " + fmt(pitch_err, 3) + " deg, yaw " +
         fmt(yaw_err, 3) + " deg, lift " + fmt(lift_err, 3) + " m, rate 0 -> 100% NC");
  return o;
}

} // namespace

int main(int argc, char** argv) {
  Env env;
  std::string only;
  CLI::App app{"compdetect acceptance runner"};
  app.add_option("--cli", env.cli, "compdetect executable")->required();
  app.add_option("--work", env.work, "scratch directory")->required();
  app.add_option("--experiment", env.experiment, "config for the compare/ablate runs")->required();
  app.add_option("--only", only, "comma-separated criterion numbers");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  std::stringstream ss(only);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (!tok.empty()) selected.insert(std::stoi(tok));
  }
  fs::create_directories(env.work);

  const std::vector<std::pair<std::string, std::function<Outcome(const Env&)>>> criteria{
      {"gradient fidelity", gradient_fidelity},
      {"numeric oracles", numeric_oracles},
      {"preprocessing oracles", preprocessing_oracles},
      {"metrics oracle", metrics_oracle},
      {"baseline oracles", baseline_oracles},
      {"comparison table structure", table2},
      {"ablation table structure", table3},
      {"determinism", determinism},
      {"generator validity", generator_validity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(env);
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("error: ") + e.what());
    }
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << detail
              << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
