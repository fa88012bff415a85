#pragma once

// Simulation-recovery experiment: generate a tree, sample leaf distributions,
// simulate a sequence, split it into train/test, fit each requested model and
// report log-losses, tree similarities and model sizes.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pbct/core_model.hpp"
#include "pbct/inference.hpp"

namespace pbct {

struct ModelSpec {
  enum class Kind { kPbct, kVbm, kFbm };

  Kind kind = Kind::kPbct;
  int order = 0;  // FBM only

  /// "pbct", "vbm" or "fbm:<d>".
  static ModelSpec parse(std::string_view text);
  std::string name() const;

  bool operator==(const ModelSpec&) const = default;
};

/// Fits (or for FBM, builds) the model and returns its tree. FBM trees keep
/// max depth = order.
ContextTree fit_model(const ModelSpec& spec, const SequenceCorpus& corpus, const FitConfig& config);

struct ExperimentConfig {
  int vocab_size = 10;
  double alpha = 1.0;
  double decay = 1.0;
  int max_depth = 3;
  double eta = 1.0;
  double lambda = 0.0;
  std::size_t train_length = 10000;
  std::size_t test_length = 1000;
  int replicates = 15;
  std::uint64_t seed = 1;
  std::vector<ModelSpec> models{ModelSpec{}};
  std::uint64_t max_leaves = 1000000;
  /// Worker threads for replicates; 0 uses the hardware concurrency.
  unsigned threads = 1;

  /// Throws InvalidParameter.
  void validate() const;
};

struct ReportRow {
  int replicate = 0;  // 1-based
  std::string model;
  std::string metric;
  std::optional<double> value;
  /// Printed in place of a missing value ("NA" when empty).
  std::string note;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;

  /// Values of one (model, metric) across replicates, skipping missing ones.
  std::vector<double> values(std::string_view model, std::string_view metric) const;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Tab-separated rows (replicate, model, metric, value) followed by a summary
/// block; numbers use 5 decimals.
std::string format_report(const ExperimentReport& report);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  std::size_t n = 0;
};
Summary summarize(std::span<const double> values);

}  // namespace pbct
