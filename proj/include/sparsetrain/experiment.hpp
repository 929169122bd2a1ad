#pragma once

#include "sparsetrain/config.hpp"

namespace sparsetrain {

struct SimulationOutputs {
  ExperimentReport dense;   // all strategies off
  ExperimentReport sparse;  // configured masking / merging / InfoBatch
  ExperimentReport full;    // sparse pipeline, full training set
  ExperimentReport subset;  // sparse pipeline, key subset only
  KeySubset key_subset;
};

/// Paired dense/sparse compute comparison plus key-subset selection and the
/// paired full/subset retention runs, all from cfg.seed.
SimulationOutputs run_simulation(const Config& cfg);

/// Recall of a uniform random subset of the same size, drawn from `seed`.
double random_subset_recall(const Dataset& data, std::size_t size, std::uint64_t seed);

}  // namespace sparsetrain
