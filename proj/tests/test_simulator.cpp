#include <doctest.h>

#include <numeric>

#include "sparsetrain/experiment.hpp"
#include "sparsetrain/io.hpp"
#include "sparsetrain/simulator.hpp"

using namespace sparsetrain;

namespace {

SyntheticDatasetSpec small_spec(std::uint64_t seed = 5) {
  SyntheticDatasetSpec s;
  s.n_samples = 200;
  s.n_test = 200;
  s.seed = seed;
  return s;
}

TrainingConfig epochs(std::size_t e) {
  TrainingConfig t;
  t.epochs = e;
  return t;
}

}  // namespace

TEST_CASE("generate_dataset") {
  SyntheticDatasetSpec spec = small_spec();
  spec.hard_fraction = 0.0;
  CHECK(generate_dataset(spec).hard_count() == 0);

  spec.n_samples = 100;
  spec.hard_fraction = 0.2;
  const Dataset a = generate_dataset(spec);
  CHECK(a.hard_count() == 20);
  CHECK(a.train.size() == 100);
  CHECK(a.train[0].visual.size() == 16);
  CHECK(a.train[0].audio.size() == 16);

  const Dataset b = generate_dataset(spec);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].visual == b.train[i].visual);
    CHECK(a.train[i].audio == b.train[i].audio);
    CHECK(a.train[i].label == b.train[i].label);
  }

  spec.n_samples = 0;
  CHECK_THROWS_AS(generate_dataset(spec), InvalidInput);
  spec.n_samples = 10;
  spec.n_classes = 0;
  CHECK_THROWS_AS(generate_dataset(spec), InvalidInput);
}

TEST_CASE("compute accounting identities") {
  const Dataset data = generate_dataset(small_spec());
  const std::uint64_t n = data.train.size(), tps = data.spec.tokens_per_sample;

  const ExperimentReport dense = train(data, PipelineConfig::dense(), epochs(15), 1);
  CHECK(dense.compute_proxy() == 15 * n * tps);
  CHECK(dense.total_samples == 15 * n);

  PipelineConfig masked = PipelineConfig::dense();
  masked.mask_schedule.active_epochs = 3;
  masked.mask_ratio = 0.5;
  const ExperimentReport m = train(data, masked, epochs(15), 1);
  // Three of fifteen epochs at half the tokens: exactly 10% fewer.
  CHECK(10 * (dense.compute_proxy() - m.compute_proxy()) == dense.compute_proxy());
  CHECK(m.epochs[0].tokens == n * tps / 2);
  CHECK(m.epochs[3].tokens == n * tps);

  const ExperimentReport sparse = train(data, PipelineConfig::full_sparse(), epochs(15), 1);
  CHECK(sparse.compute_proxy() < dense.compute_proxy());
  CHECK(sparse.total_steps <= dense.total_steps);
}

TEST_CASE("dense runs are bit-reproducible") {
  const Dataset data = generate_dataset(small_spec());
  const auto a = report_to_json(train(data, PipelineConfig::dense(), epochs(4), 9), false).dump();
  const auto b = report_to_json(train(data, PipelineConfig::dense(), epochs(4), 9), false).dump();
  CHECK(a == b);
  const auto c = report_to_json(train(data, PipelineConfig::full_sparse(), epochs(4), 9), false).dump();
  const auto d = report_to_json(train(data, PipelineConfig::full_sparse(), epochs(4), 9), false).dump();
  CHECK(c == d);
}

TEST_CASE("infobatch anneals in the last epochs") {
  const Dataset data = generate_dataset(small_spec());
  const ExperimentReport r = train(data, PipelineConfig::full_sparse(), epochs(8), 2);
  // floor(0.875 * 8) = 7: epoch 0 has no loss history, epoch 7 anneals.
  CHECK(r.epochs[0].samples == data.train.size());
  CHECK(r.epochs[7].samples == data.train.size());
  CHECK(r.epochs[3].samples < data.train.size());
}

TEST_CASE("learning happens") {
  const Dataset data = generate_dataset(small_spec());
  const ExperimentReport r = train(data, PipelineConfig::dense(), epochs(10), 3);
  CHECK(r.final_accuracy > 0.6);
  CHECK(r.epochs.back().mean_loss < r.epochs.front().mean_loss);
}

TEST_CASE("retention experiment") {
  const Dataset data = generate_dataset(small_spec());
  IndexList all(data.train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const RetentionResult same = run_retention_experiment(data, all, PipelineConfig::dense(), epochs(5), 4);
  CHECK(*same.subset.accuracy_ratio == 1.0);
  CHECK(same.subset.final_accuracy == same.full.final_accuracy);
  CHECK(*same.subset.planted_hard_recall == 1.0);
  CHECK_THROWS_AS(run_retention_experiment(data, {}, PipelineConfig::dense(), epochs(5), 4), InvalidInput);
  CHECK_THROWS_AS(train(data, PipelineConfig::dense(), epochs(2), 4, {3, 1}), InvalidInput);
}

TEST_CASE("key-subset selection finds the planted hard samples") {
  SyntheticDatasetSpec spec = small_spec(11);
  spec.n_samples = 400;
  const Dataset data = generate_dataset(spec);
  const SelectionConfig cfg{15, 3, 0.618, 100};
  const KeySubset ks = select_on_dataset(data, cfg, InfoBatchConfig{}, TrainingConfig{}, 11);
  CHECK(ks.indices.size() == 100);
  const double recall = *planted_hard_recall(data, ks.indices);
  CHECK(recall > random_subset_recall(data, 100, 11));
  CHECK(recall > 0.5);
}
