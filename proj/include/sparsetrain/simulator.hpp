#pragma once

// Desk-scale synthetic workload: a two-modality token classification task
// trained with a linear softmax classifier over mean-pooled tokens, used to
// measure what masking, merging and InfoBatch pruning save in processed
// tokens and what key-subset training retains in accuracy.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsetrain/masking.hpp"
#include "sparsetrain/merging.hpp"
#include "sparsetrain/selection.hpp"

namespace sparsetrain {

struct SyntheticDatasetSpec {
  std::size_t n_samples = 2000;
  double hard_fraction = 0.2;
  std::size_t tokens_per_sample = 32;  // split evenly between visual and audio
  std::size_t dim = 16;
  std::size_t n_classes = 4;
  double noise_sigma_easy = 0.5;
  double noise_sigma_hard = 1.0;
  double signal_easy = 3.0;  // amplitude of the class direction in salient tokens
  double signal_hard = 1.0;
  std::size_t n_test = 1000;
  std::uint64_t seed = 42;

  void validate() const;
  std::size_t visual_tokens() const { return tokens_per_sample - tokens_per_sample / 2; }
  std::size_t audio_tokens() const { return tokens_per_sample / 2; }
};

struct Sample {
  TokenSet visual;
  TokenSet audio;
  Matrix query;  // question tokens used to score both modalities
  std::size_t label = 0;
  bool hard = false;  // ground truth, used only for recall measurement
};

struct Dataset {
  SyntheticDatasetSpec spec;
  std::vector<Sample> train;
  std::vector<Sample> test;

  std::size_t hard_count() const;
};

/// Reproducible per spec.seed; exactly floor(hard_fraction * n_samples) hard samples.
Dataset generate_dataset(const SyntheticDatasetSpec& spec);

struct PipelineConfig {
  MaskSchedule mask_schedule{0};
  double mask_ratio = 0.5;
  bool merge = false;
  bool infobatch = false;
  InfoBatchConfig infobatch_cfg;  // total_epochs is overwritten with the run's epoch count

  /// Everything off.
  static PipelineConfig dense();
  /// 50% masking for epochs 0-2, merging and InfoBatch (0.5 / 0.875) throughout.
  static PipelineConfig full_sparse();
  void validate() const;
};

struct TrainingConfig {
  std::size_t epochs = 15;
  std::size_t batch_size = 32;
  double learning_rate = 0.5;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double accuracy = 0.0;
  double mean_loss = 0.0;  // unweighted, over processed samples
  std::uint64_t tokens = 0;
  std::uint64_t steps = 0;
  std::uint64_t samples = 0;
};

struct ExperimentReport {
  std::string label;
  std::vector<EpochStats> epochs;
  std::uint64_t total_tokens = 0;  // compute proxy: sum of tokens over processed samples
  std::uint64_t total_steps = 0;
  std::uint64_t total_samples = 0;
  double final_accuracy = 0.0;
  double chance_accuracy = 0.0;
  IndexList subset;  // empty means the full training set
  std::optional<double> planted_hard_recall;
  std::optional<double> random_control_recall;
  std::optional<double> accuracy_ratio;  // acc / paired full-data acc
  std::optional<double> gain_retention;  // (acc - chance) / (full acc - chance)
  double wall_clock_seconds = 0.0;

  std::uint64_t compute_proxy() const { return total_tokens; }
};

/// Linear softmax classifier over [mean(visual tokens), mean(audio tokens)].
class ToyModel {
 public:
  ToyModel(std::size_t features, std::size_t classes);

  std::size_t features() const { return weights_.cols(); }
  std::size_t classes() const { return weights_.rows(); }

  Vector probabilities(std::span<const double> feature) const;
  /// Cross-entropy, clamped away from log(0).
  double loss(std::span<const double> feature, std::size_t label) const;
  std::size_t predict(std::span<const double> feature) const;

  /// One SGD step on sum_i weight_i * loss_i.
  void sgd_step(const std::vector<Vector>& features, const std::vector<std::size_t>& labels,
                const Vector& weights, double learning_rate);

 private:
  Matrix weights_;
  Vector bias_;
};

/// Processed view of one sample: pooled feature and the token count that fed it.
struct SampleView {
  Vector feature;
  std::uint64_t tokens = 0;
};

/// Applies (optional) masking then (optional) merging per modality and mean-pools.
SampleView view_sample(const Sample& s, const std::optional<std::pair<double, std::uint64_t>>& mask,
                       bool merge);

/// Runs training over `subset` (all samples when empty). Per step: mask if active,
/// merge if on, forward, InfoBatch-rescaled SGD.
ExperimentReport train(const Dataset& data, const PipelineConfig& pipeline,
                       const TrainingConfig& training, std::uint64_t seed,
                       const IndexList& subset = {});

/// Key-subset selection on the synthetic workload: one dense warm-up epoch then
/// E epochs with InfoBatch only, losses for every sample recorded after each.
KeySubset select_on_dataset(const Dataset& data, const SelectionConfig& cfg,
                            const InfoBatchConfig& infobatch, const TrainingConfig& training,
                            std::uint64_t seed);

/// Fraction of planted-hard samples inside `subset`; nullopt when there are none.
std::optional<double> planted_hard_recall(const Dataset& data, const IndexList& subset);

struct RetentionResult {
  ExperimentReport full;
  ExperimentReport subset;
};

/// Paired full-data and subset-only runs under the same pipeline and seed.
RetentionResult run_retention_experiment(const Dataset& data, const IndexList& subset,
                                         const PipelineConfig& pipeline,
                                         const TrainingConfig& training, std::uint64_t seed);

}  // namespace sparsetrain
