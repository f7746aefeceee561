// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The compdetect Authors

#include "compdetect/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "compdetect/config.hpp"
#include "compdetect/errors.hpp"

namespace compdetect {

namespace {

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

} // namespace

void save_model(const GcnLstmAttModel& model, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create model directory " + dir.string() + ": " + ec.message());

  nlohmann::json tensors = nlohmann::json::array();
  std::ofstream bin(dir / "model.bin", std::ios::binary);
  if (!bin) throw DataError("cannot write " + (dir / "model.bin").string());
  std::size_t offset = 0;
  for (const auto& p : model.parameters()) {
    const auto& t = p.var.value();
    tensors.push_back({{"name", p.name}, {"shape", t.shape()}, {"offset", offset}});
    for (double v : t.values()) {
      const std::uint64_t le = to_little(std::bit_cast<std::uint64_t>(v));
      bin.write(reinterpret_cast<const char*>(&le), sizeof le);
    }
    offset += t.size();
  }
  if (!bin) throw DataError("short write to " + (dir / "model.bin").string());

  nlohmann::json classes = nlohmann::json::array();
  for (int k = 0; k < static_cast<int>(kClassCount); ++k) classes.push_back(label_name(label_from_code(k)));
  nlohmann::json manifest = {{"format_version", kModelFormatVersion},
                             {"kind", "gcn_lstm_att"},
                             {"model", model.config()},
                             {"class_mapping", classes},
                             {"target_length", model.target_length},
                             {"adjacency", model.adjacency().values()},
                             {"weights", "model.bin"},
                             {"n_values", offset},
                             {"tensors", std::move(tensors)}};
  if (model.preprocess) {
    save_fitted(*model.preprocess, dir / "stats.json");
    manifest["stats"] = "stats.json";
  } else {
    manifest["stats"] = nullptr;
  }
  std::ofstream out(dir / "model.json");
  if (!out) throw DataError("cannot write " + (dir / "model.json").string());
  out << manifest.dump(2) << '\n';
}

GcnLstmAttModel load_model(const std::filesystem::path& path) {
  const auto manifest_path = std::filesystem::is_directory(path) ? path / "model.json" : path;
  const auto dir = manifest_path.parent_path();
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open model manifest " + manifest_path.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  try {
    if (m.at("format_version").get<int>() != kModelFormatVersion) {
      throw DataError(manifest_path.string() + ": unsupported format_version " + m.at("format_version").dump());
    }
    const auto classes = m.at("class_mapping").get<std::vector<std::string>>();
    for (int k = 0; k < static_cast<int>(kClassCount); ++k) {
      if (classes.size() != kClassCount || classes[static_cast<std::size_t>(k)] != label_name(label_from_code(k))) {
        throw DataError(manifest_path.string() + ": class mapping differs from NC, TLF, TR, SE");
      }
    }
    const auto cfg = m.at("model").get<ModelConfig>();
    ad::Tensor adj({kJointCount, kJointCount}, m.at("adjacency").get<std::vector<double>>());
    GcnLstmAttModel model(cfg, std::move(adj), 0);
    model.target_length = m.at("target_length").get<std::size_t>();

    const auto n_values = m.at("n_values").get<std::size_t>();
    const auto bin_path = dir / m.at("weights").get<std::string>();
    std::ifstream bin(bin_path, std::ios::binary | std::ios::ate);
    if (!bin) throw DataError("cannot open weights " + bin_path.string());
    if (static_cast<std::size_t>(bin.tellg()) != n_values * sizeof(double)) {
      throw DataError(bin_path.string() + ": expected " + std::to_string(n_values * sizeof(double)) + " bytes");
    }
    bin.seekg(0);
    std::vector<double> flat(n_values);
    for (auto& v : flat) {
      std::uint64_t le = 0;
      bin.read(reinterpret_cast<char*>(&le), sizeof le);
      v = std::bit_cast<double>(to_little(le));
    }

    const auto params = model.parameters();
    const auto& table = m.at("tensors");
    if (table.size() != params.size()) throw DataError(manifest_path.string() + ": tensor table size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& entry = table.at(i);
      auto var = params[i].var;
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<ad::Shape>();
      const auto offset = entry.at("offset").get<std::size_t>();
      if (name != params[i].name || shape != var.shape()) {
        throw DataError(manifest_path.string() + ": tensor " + std::to_string(i) + " is " + name + " " +
                        ad::shape_str(shape) + ", model expects " + params[i].name + " " +
                        ad::shape_str(var.shape()));
      }
      if (offset + var.value().size() > flat.size()) throw DataError(manifest_path.string() + ": tensor past end of weights");
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), var.value().size(),
                  var.mutable_value().values().begin());
    }
    if (!m.at("stats").is_null()) {
      model.preprocess = load_fitted(dir / m.at("stats").get<std::string>());
      if (model.preprocess->target_length != model.target_length) {
        throw DataError(manifest_path.string() + ": stats target_length " +
                        std::to_string(model.preprocess->target_length) + " differs from the model's " +
                        std::to_string(model.target_length));
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
}

} // namespace compdetect
