#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sparsetrain/numeric.hpp"

namespace sparsetrain {

enum class Modality { visual, audio };

std::string_view to_string(Modality m);
/// Parses "visual" | "audio"; throws InvalidInput otherwise.
Modality parse_modality(std::string_view s);

/// Ordered patch tokens of one modality. Audio tokens are pre-patched
/// spectrogram cells; raw waveforms are not accepted.
class TokenSet {
 public:
  /// Validates: every token has `dim` entries, ids unique, one id per token.
  TokenSet(Modality modality, std::size_t dim, Matrix tokens, std::vector<std::uint64_t> origin_ids);
  /// Same, assigning origin ids 0..n-1.
  TokenSet(Modality modality, Matrix tokens);

  Modality modality() const { return modality_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return origin_ids_.size(); }
  bool empty() const { return origin_ids_.empty(); }

  std::span<const double> token(std::size_t i) const { return tokens_.row(i); }
  const Matrix& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& origin_ids() const { return origin_ids_; }

  friend bool operator==(const TokenSet&, const TokenSet&) = default;

 private:
  Modality modality_;
  std::size_t dim_;
  Matrix tokens_;
  std::vector<std::uint64_t> origin_ids_;
};

struct MaskPlan {
  std::size_t total = 0;
  IndexList masked;  // ascending, size floor(ratio * total)
  double ratio = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const MaskPlan&, const MaskPlan&) = default;
};

struct MaskSchedule {
  std::size_t active_epochs = 3;
};

/// Number of tokens a plan with this ratio drops.
std::size_t masked_count(std::size_t total, double ratio);

/// Uniformly random subset of floor(ratio * total) positions.
MaskPlan plan_mask(std::size_t total, double ratio, SeededRng& rng);
/// Drops the masked tokens; survivors keep their order, ids and exact embeddings.
TokenSet apply_mask(const TokenSet& ts, const MaskPlan& plan);
/// 0-based epochs: active iff epoch < active_epochs.
bool mask_active(std::size_t epoch, const MaskSchedule& schedule);

}  // namespace sparsetrain
