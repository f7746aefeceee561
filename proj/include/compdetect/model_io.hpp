// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#pragma once

#include <filesystem>

#include "compdetect/model.hpp"

namespace compdetect {

inline constexpr int kModelFormatVersion = 1;

/// Writes `<dir>/model.json` (manifest), `<dir>/model.bin` (parameters in declaration order,
/// little-endian float64) and, when the model carries its preprocessing, `<dir>/stats.json`.
void save_model(const GcnLstmAttModel& model, const std::filesystem::path& dir);

/// Accepts the manifest path or its directory. Shapes and sizes are checked against the
/// manifest's tensor table.
GcnLstmAttModel load_model(const std::filesystem::path& path);

} // namespace compdetect
