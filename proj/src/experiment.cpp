#include "sparsetrain/experiment.hpp"

namespace sparsetrain {

namespace {
constexpr std::uint64_t kRandomControl = 100;
}

double random_subset_recall(const Dataset& data, std::size_t size, std::uint64_t seed) {
  SeededRng rng(derive_seed(seed, {kRandomControl}));
  const IndexList pick = sample_without_replacement(data.train.size(), size, rng);
  return planted_hard_recall(data, pick).value_or(0.0);
}

SimulationOutputs run_simulation(const Config& cfg) {
  cfg.validate();
  SyntheticDatasetSpec spec = cfg.dataset;
  spec.seed = cfg.seed;
  const Dataset data = generate_dataset(spec);
  const PipelineConfig sparse = cfg.sparse_pipeline();

  SimulationOutputs out;
  out.dense = train(data, PipelineConfig::dense(), cfg.training, cfg.seed);
  out.dense.label = "dense";
  out.sparse = train(data, sparse, cfg.training, cfg.seed);
  out.sparse.label = "sparse";

  out.key_subset = select_on_dataset(data, cfg.selection(), cfg.infobatch(), cfg.training, cfg.seed);
  RetentionResult r = run_retention_experiment(data, out.key_subset.indices, sparse, cfg.training, cfg.seed);
  out.full = std::move(r.full);
  out.subset = std::move(r.subset);
  if (data.hard_count() > 0) {
    out.subset.random_control_recall = random_subset_recall(data, out.key_subset.indices.size(), cfg.seed);
  }
  return out;
}

}  // namespace sparsetrain
