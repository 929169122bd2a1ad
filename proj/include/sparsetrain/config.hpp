#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "sparsetrain/io.hpp"
#include "sparsetrain/simulator.hpp"

namespace sparsetrain {

/// Resolved run configuration. Defaults reproduce the reference setup:
/// 50% masking for the first 3 epochs, merging on, InfoBatch ratio 0.5 /
/// delta 0.875, selection E=15, k=3, r=0.618.
struct Config {
  std::uint64_t seed = 42;
  SyntheticDatasetSpec dataset;
  MaskSchedule mask_schedule{3};
  double mask_ratio = 0.5;
  bool merge = true;
  double prune_ratio = 0.5;
  double delta = 0.875;
  TrainingConfig training;
  std::size_t selection_epochs = 15;
  std::size_t group_size = 3;
  double decay = 0.618;
  /// Key-subset size; unset means a quarter of the training set.
  std::optional<std::size_t> subset_size;

  PipelineConfig sparse_pipeline() const;
  InfoBatchConfig infobatch() const;
  SelectionConfig selection() const;
  std::size_t resolved_subset_size() const;
  /// Throws InvalidInput on any out-of-range value.
  void validate() const;
};

/// Strict reader: unknown keys and mistyped values raise InvalidInput.
Config config_from_json(const json& j);
json config_to_json(const Config& c);
Config load_config(const std::filesystem::path& path);

}  // namespace sparsetrain
