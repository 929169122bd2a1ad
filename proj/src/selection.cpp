#include "sparsetrain/selection.hpp"

#include <algorithm>
#include <cmath>

namespace sparsetrain {

void SelectionConfig::validate(std::size_t n_samples) const {
  if (epochs < 1) throw InvalidInput("selection: epochs must be >= 1");
  if (group_size < 1) throw InvalidInput("selection: group_size must be >= 1");
  if (!(decay > 0.0 && decay <= 1.0)) throw InvalidInput("selection: decay must be in (0, 1]");
  if (subset_size < 1 || subset_size > n_samples) {
    throw InvalidInput("selection: subset_size " + std::to_string(subset_size) +
                       " outside [1, " + std::to_string(n_samples) + "]");
  }
}

void InfoBatchConfig::validate() const {
  if (!(prune_ratio >= 0.0 && prune_ratio < 1.0)) {
    throw InvalidInput("infobatch: prune_ratio must be in [0, 1)");
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("infobatch: delta must be in (0, 1]");
  if (total_epochs < 1) throw InvalidInput("infobatch: total_epochs must be >= 1");
}

std::size_t InfoBatchConfig::anneal_epoch() const {
  return static_cast<std::size_t>(std::floor(delta * static_cast<double>(total_epochs)));
}

namespace {

bool any_negative(std::span<const double> v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return x < 0.0; });
}

}  // namespace

ScoreBoard warmup_scores(std::span<const double> losses) {
  if (losses.empty()) throw InvalidInput("warmup_scores: empty loss vector");
  require_finite(losses, "warmup_scores");
  ScoreBoard board;
  board.n_samples = losses.size();
  board.scores.assign(losses.begin(), losses.end());
  board.negative_loss_seen = any_negative(losses);
  return board;
}

ScoreBoard epoch_update(ScoreBoard board, std::span<const double> losses) {
  if (losses.size() != board.n_samples) {
    throw ShapeError("epoch_update: " + std::to_string(losses.size()) + " losses for " +
                     std::to_string(board.n_samples) + " samples");
  }
  require_finite(losses, "epoch_update");
  const double mu = mean(board.scores);
  HardFlags t(board.n_samples, 0);
  for (std::size_t i = 0; i < board.n_samples; ++i) {
    board.scores[i] = losses[i];
    if (board.scores[i] > mu) t[i] = 1;
  }
  board.epochs_list.push_back(std::move(t));
  board.negative_loss_seen = board.negative_loss_seen || any_negative(losses);
  return board;
}

double group_weight(double decay, std::size_t group) {
  return std::pow(decay, static_cast<double>(group - 1));
}

Vector merge_epoch_flags(const ScoreBoard& board, const SelectionConfig& cfg) {
  const std::size_t e_total = cfg.epochs;
  if (board.epochs_list.size() != e_total) {
    throw InvalidInput("merge_epoch_flags: board holds " +
                       std::to_string(board.epochs_list.size()) + " epochs, config expects " +
                       std::to_string(e_total));
  }
  if (cfg.group_size < 1) throw InvalidInput("merge_epoch_flags: group_size must be >= 1");
  Vector m(board.n_samples, 0.0);
  const std::size_t groups = (e_total + cfg.group_size - 1) / cfg.group_size;
  for (std::size_t g = 1; g <= groups; ++g) {
    const double w = group_weight(cfg.decay, g);
    // Groups and epochs are 1-based here; epochs_list is 0-based.
    const std::size_t last = std::min(g * cfg.group_size, e_total);
    for (std::size_t e = (g - 1) * cfg.group_size + 1; e <= last; ++e) {
      const HardFlags& t = board.epochs_list[e - 1];
      for (std::size_t i = 0; i < m.size(); ++i) m[i] += w * static_cast<double>(t[i]);
    }
  }
  return m;
}

KeySubset select_key_subset(std::span<const double> m, std::size_t n) {
  if (n > m.size()) {
    throw InvalidInput("select_key_subset: n=" + std::to_string(n) + " exceeds " +
                       std::to_string(m.size()) + " samples");
  }
  const IndexList order = argsort_desc(m);
  KeySubset out;
  out.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(out.indices.begin(), out.indices.end());
  out.merged_scores.assign(m.begin(), m.end());
  return out;
}

PruneDecision infobatch_step(std::span<const double> losses, const InfoBatchConfig& cfg,
                             std::size_t epoch, SeededRng& rng) {
  if (losses.empty()) throw InvalidInput("infobatch_step: empty loss vector");
  require_finite(losses, "infobatch_step");
  cfg.validate();
  if (epoch >= cfg.total_epochs) {
    throw InvalidInput("infobatch_step: epoch " + std::to_string(epoch) + " >= total_epochs " +
                       std::to_string(cfg.total_epochs));
  }
  PruneDecision d;
  d.kept.reserve(losses.size());
  d.factors.reserve(losses.size());
  if (epoch >= cfg.anneal_epoch() || cfg.prune_ratio == 0.0) {
    for (std::size_t i = 0; i < losses.size(); ++i) {
      d.kept.push_back(i);
      d.factors.push_back(1.0);
    }
    return d;
  }
  const double mu = mean(losses);
  const double rescale = 1.0 / (1.0 - cfg.prune_ratio);
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (losses[i] >= mu) {
      d.kept.push_back(i);
      d.factors.push_back(1.0);
    } else if (rng.uniform() >= cfg.prune_ratio) {
      d.kept.push_back(i);
      d.factors.push_back(rescale);
    }
  }
  return d;
}

KeySubset run_selection(const LossOracle& losses, const SelectionConfig& cfg) {
  ScoreBoard board = warmup_scores(losses(-1));
  cfg.validate(board.n_samples);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const Vector l = losses(static_cast<int>(e));
    board = epoch_update(std::move(board), l);
  }
  const Vector m = merge_epoch_flags(board, cfg);
  KeySubset subset = select_key_subset(m, cfg.subset_size);
  if (board.negative_loss_seen) {
    subset.warnings.emplace_back("negative loss values observed; hard flags assume losses >= 0");
  }
  return subset;
}

}  // namespace sparsetrain
