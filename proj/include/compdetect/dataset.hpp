// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "compdetect/skeleton.hpp"

namespace compdetect {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct Dataset {
  std::vector<MotionSequence> sequences;
  std::optional<Split> split;

  std::size_t size() const { return sequences.size(); }
  std::vector<MotionSequence> subset(const std::vector<std::size_t>& indices) const;
  std::vector<MotionSequence> train_sequences() const;
  std::vector<MotionSequence> test_sequences() const;
  /// Throws DataError unless the split is disjoint and covers every index.
  void validate_split() const;
};

enum class SplitMode { Sequence, Subject };

/// Per-class shuffled split: each class contributes round(count * train_fraction) training
/// sequences, capped so at least one sequence per class lands in the test set. Classes
/// absent from the dataset are skipped; a class with a single sequence is an error.
/// Index lists are returned sorted.
Dataset stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Subject-wise split: whole subjects go to either side, round(n_subjects * fraction)
/// of them (at least one on each side) to training.
Dataset subject_split(const Dataset& ds, double train_fraction, std::uint64_t seed);

Dataset split_dataset(const Dataset& ds, double train_fraction, std::uint64_t seed,
                      SplitMode mode);

/// Reads the JSONL dataset format (one sequence object per line). Blank lines are ignored.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Single-line JSON encoding of one sequence, without a trailing newline.
std::string sequence_to_jsonl(const MotionSequence& seq);
/// Parses one JSONL line; `line_no` is used in error messages only.
MotionSequence sequence_from_jsonl(const std::string& line, std::size_t line_no = 0);

} // namespace compdetect
