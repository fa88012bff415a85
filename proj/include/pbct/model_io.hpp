#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "pbct/core_model.hpp"

namespace pbct {

struct Provenance {
  std::string model;  // "pbct", "vbm", "fbm:2", "simulated", ...
  std::uint64_t seed = 0;
  std::string fit_timestamp;
  std::string corpus_digest;

  bool operator==(const Provenance&) const = default;
};

/// A fitted model: tree (with its vocabulary), hyperparameters, training
/// counts and where it came from. The tree's max depth is hyper.max_depth.
struct ModelFile {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  Hyperparams hyper;
  ContextTree tree;
  CountTable train_counts;
  Provenance provenance;

  bool operator==(const ModelFile&) const = default;
};

/// Key-ordered, indented JSON.
std::string serialize_model(const ModelFile& model);
/// Throws FormatVersionMismatch, or SchemaError prefixed with the field path.
ModelFile parse_model(std::string_view text);

void write_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile read_model(const std::filesystem::path& path);

}  // namespace pbct
