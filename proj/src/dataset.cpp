// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>

#include <json.hpp>

#include "compdetect/errors.hpp"

namespace compdetect {

using nlohmann::json;

std::vector<MotionSequence> Dataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<MotionSequence> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(sequences.at(i));
  return out;
}

std::vector<MotionSequence> Dataset::train_sequences() const {
  if (!split) throw DataError("dataset has no train/test split");
  return subset(split->train);
}

std::vector<MotionSequence> Dataset::test_sequences() const {
  if (!split) throw DataError("dataset has no train/test split");
  return subset(split->test);
}

void Dataset::validate_split() const {
  if (!split) throw DataError("dataset has no train/test split");
  std::vector<int> hits(sequences.size(), 0);
  for (const auto* side : {&split->train, &split->test}) {
    for (std::size_t i : *side) {
      if (i >= sequences.size()) throw DataError("split index out of range");
      ++hits[i];
    }
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] != 1) {
      throw DataError("split index " + std::to_string(i) +
                      (hits[i] == 0 ? " missing from both sides" : " present on both sides"));
    }
  }
}

namespace {

void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
}

} // namespace

Dataset stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  check_fraction(train_fraction);
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    by_class[label_code(ds.sequences[i].label)].push_back(i);
  }
  std::mt19937_64 rng(seed);
  Split split;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      throw DataError("class " + std::string(label_name(static_cast<Label>(c))) +
                      " has fewer than 2 sequences; cannot split");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(idx.size() * train_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + n_train);
    split.test.insert(split.test.end(), idx.begin() + n_train, idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  Dataset out = ds;
  out.split = std::move(split);
  return out;
}

Dataset subject_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  check_fraction(train_fraction);
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    by_subject[ds.sequences[i].subject_id].push_back(i);
  }
  if (by_subject.size() < 2) throw DataError("subject split needs at least 2 subjects");
  std::vector<std::string> subjects;
  for (const auto& kv : by_subject) subjects.push_back(kv.first);
  std::mt19937_64 rng(seed);
  std::shuffle(subjects.begin(), subjects.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(subjects.size() * train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, subjects.size() - 1);
  Split split;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    auto& side = s < n_train ? split.train : split.test;
    const auto& idx = by_subject[subjects[s]];
    side.insert(side.end(), idx.begin(), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  Dataset out = ds;
  out.split = std::move(split);
  return out;
}

Dataset split_dataset(const Dataset& ds, double train_fraction, std::uint64_t seed,
                      SplitMode mode) {
  return mode == SplitMode::Subject ? subject_split(ds, train_fraction, seed)
                                    : stratified_split(ds, train_fraction, seed);
}

std::string sequence_to_jsonl(const MotionSequence& seq) {
  json frames = json::array();
  for (const auto& f : seq.frames) {
    json xyz = json::array();
    for (std::size_t j = 0; j < kJointCount; ++j) {
      xyz.push_back({f.coords[3 * j], f.coords[3 * j + 1], f.coords[3 * j + 2]});
    }
    frames.push_back({{"t", f.timestamp}, {"xyz", std::move(xyz)}});
  }
  json obj = {{"subject_id", seq.subject_id},
              {"view_id", seq.view_id},
              {"repetition", seq.repetition},
              {"action", action_name(seq.action)},
              {"label", label_name(seq.label)},
              {"fps", seq.fps}};
  if (seq.preprocessed) obj["preprocessed"] = true;
  obj["frames"] = std::move(frames);
  return obj.dump();
}

MotionSequence sequence_from_jsonl(const std::string& line, std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no) + ": ";
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(where + "parse error: " + e.what());
  }
  MotionSequence seq;
  try {
    seq.subject_id = obj.at("subject_id").get<std::string>();
    seq.view_id = obj.at("view_id").get<int>();
    seq.repetition = obj.at("repetition").get<int>();
    seq.action = parse_action(obj.at("action").get<std::string>());
    seq.label = parse_label(obj.at("label").get<std::string>());
    seq.fps = obj.at("fps").get<double>();
    seq.preprocessed = obj.value("preprocessed", false);
    const auto& frames = obj.at("frames");
    if (!frames.is_array()) throw DataError("'frames' must be an array");
    seq.frames.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto& fj = frames[i];
      SkeletonFrame f;
      f.timestamp = fj.at("t").get<double>();
      const auto& xyz = fj.at("xyz");
      if (!xyz.is_array() || xyz.size() != kJointCount) {
        throw DataError("frame " + std::to_string(i) + " has " +
                        std::to_string(xyz.is_array() ? xyz.size() : 0) + " joints, expected " +
                        std::to_string(kJointCount));
      }
      for (std::size_t j = 0; j < kJointCount; ++j) {
        const auto& p = xyz[j];
        if (!p.is_array() || p.size() != 3) {
          throw DataError("frame " + std::to_string(i) + " joint " + std::to_string(j) +
                          " is not an [x,y,z] triple");
        }
        for (std::size_t k = 0; k < 3; ++k) f.coords[3 * j + k] = p[k].get<double>();
      }
      seq.frames.push_back(f);
    }
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  } catch (const json::exception& e) {
    throw DataError(where + "schema error: " + e.what());
  }
  try {
    seq.validate();
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  }
  return seq;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file " + path.string());
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ds.sequences.push_back(sequence_from_jsonl(line, line_no));
  }
  if (ds.sequences.empty()) {
    std::clog << "warning: dataset " << path.string() << " contains no sequences\n";
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file " + path.string());
  for (const auto& seq : ds.sequences) out << sequence_to_jsonl(seq) << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

} // namespace compdetect
