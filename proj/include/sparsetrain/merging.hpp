#pragma once

// Attention-guided token merging: score candidate tokens by cross-attention,
// keep the IQR outliers as key tokens, fold every other token into its most
// similar key.

#include <map>
#include <span>

#include "sparsetrain/masking.hpp"
#include "sparsetrain/numeric.hpp"

namespace sparsetrain {

struct AttentionInputs {
  Matrix q;  // m x d query tokens
  Matrix k;  // n x d candidate keys
  Matrix v;  // n x d' candidate values
};

struct ImportanceScores {
  Vector scores;  // one per candidate, sums to 1
};

/// non-key index -> key index
using ClusterAssignment = std::map<std::size_t, std::size_t>;

struct MergeResult {
  IndexList key_indices;  // ascending, non-empty
  ClusterAssignment assignment;
  TokenSet merged;
  double compression_ratio = 1.0;  // |keys| / n
};

/// Tukey fence multiplier for the key-token rule.
inline constexpr double kIqrFence = 1.5;

/// score[j] = mean over query rows of softmax(Q K^T / sqrt(d))[i][j].
ImportanceScores importance_scores(const AttentionInputs& inp);

/// Indices with score > q3 + 1.5 (q3 - q1). If none qualify, the top ceil(n/4)
/// by score (ties to lower index). Always non-empty, ascending.
IndexList select_key_tokens(std::span<const double> scores);

/// k_i . k_j
double token_similarity(const Matrix& k, std::size_t i, std::size_t j);

/// Maps each non-key row of K to the key with the highest similarity; ties go
/// to the lowest key index.
ClusterAssignment assign_clusters(const Matrix& k, const IndexList& key_indices);

/// One output token per key: the softmax(similarity-to-key)-weighted sum over
/// the key and the tokens assigned to it.
TokenSet merge_tokens(const TokenSet& ts, const Matrix& k, const IndexList& key_indices,
                      const ClusterAssignment& assignment);

/// importance_scores -> select_key_tokens -> assign_clusters -> merge_tokens.
MergeResult prumerge(const TokenSet& ts, const AttentionInputs& inp);

}  // namespace sparsetrain
