// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <stdexcept>
#include <string>

namespace compdetect {

/// Invalid or inconsistent configuration values.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed, missing or schema-violating data (files, sequences, splits).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, shape mismatches in tensor algebra, failed gradient checks.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace compdetect
