#pragma once

// Loss-driven key-subset selection and InfoBatch-style soft pruning.
//
// Selection tracks, per epoch, which samples' loss exceeds the previous
// epoch's mean loss ("hard" flags), aggregates those flags over groups of k
// epochs with geometrically decaying weights r^(g-1), and keeps the n samples
// with the largest aggregate.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sparsetrain/numeric.hpp"

namespace sparsetrain {

using HardFlags = std::vector<std::uint8_t>;

struct ScoreBoard {
  std::size_t n_samples = 0;
  Vector scores;                       // latest per-sample loss
  std::vector<HardFlags> epochs_list;  // one 0/1 vector per completed epoch, 0-based
  bool negative_loss_seen = false;
};

struct SelectionConfig {
  std::size_t epochs = 15;      // E
  std::size_t group_size = 3;   // k
  double decay = 0.618;         // r
  std::size_t subset_size = 1;  // n

  /// Throws InvalidInput unless E >= 1, k >= 1, 0 < r <= 1, 1 <= n <= n_samples.
  void validate(std::size_t n_samples) const;
};

struct InfoBatchConfig {
  double prune_ratio = 0.5;
  double delta = 0.875;
  std::size_t total_epochs = 15;

  void validate() const;
  /// First epoch at which pruning is switched off: floor(delta * total_epochs).
  std::size_t anneal_epoch() const;
};

struct PruneDecision {
  IndexList kept;  // ascending
  Vector factors;  // parallel to kept; 1 or 1/(1 - prune_ratio)
};

struct KeySubset {
  IndexList indices;  // ascending
  Vector merged_scores;
  std::vector<std::string> warnings;
};

/// Seeds the board from the warm-up pass; no flags yet.
ScoreBoard warmup_scores(std::span<const double> losses);

/// mu = mean of the scores held BEFORE this epoch; then s := losses and
/// t_i = [s_i > mu]. Appends t.
ScoreBoard epoch_update(ScoreBoard board, std::span<const double> losses);

/// Weight of 1-based group g: r^(g-1).
double group_weight(double decay, std::size_t group);

/// m = sum_g r^(g-1) * sum_{e in group g} t_e, groups of k consecutive epochs.
Vector merge_epoch_flags(const ScoreBoard& board, const SelectionConfig& cfg);

/// First n entries of argsort_desc(m), returned ascending.
KeySubset select_key_subset(std::span<const double> m, std::size_t n);

/// Keeps every sample with loss >= mean; each below-mean sample survives with
/// probability 1 - prune_ratio and is rescaled by 1/(1 - prune_ratio). One
/// uniform draw per below-mean sample, in index order. From anneal_epoch()
/// onward everything is kept at factor 1.
PruneDecision infobatch_step(std::span<const double> losses, const InfoBatchConfig& cfg,
                             std::size_t epoch, SeededRng& rng);

/// Returns the full per-sample loss vector for epoch -1 (warm-up) and 0..E-1.
using LossOracle = std::function<Vector(int epoch)>;

/// warmup_scores -> E x epoch_update -> merge_epoch_flags -> select_key_subset.
KeySubset run_selection(const LossOracle& losses, const SelectionConfig& cfg);

}  // namespace sparsetrain
