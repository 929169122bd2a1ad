#include "sparsetrain/merging.hpp"

#include <algorithm>
#include <string>

namespace sparsetrain {

ImportanceScores importance_scores(const AttentionInputs& inp) {
  if (inp.k.rows() != inp.v.rows()) {
    throw ShapeError("importance_scores: K has " + std::to_string(inp.k.rows()) +
                     " rows, V has " + std::to_string(inp.v.rows()));
  }
  // V does not enter a per-token scalar score; only the probability rows do.
  const Matrix probs = attention_probs(inp.q, inp.k);
  Vector scores(probs.cols(), 0.0);
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    for (std::size_t j = 0; j < probs.cols(); ++j) scores[j] += probs(i, j);
  }
  const double inv = 1.0 / static_cast<double>(probs.rows());
  for (double& s : scores) s *= inv;
  return {std::move(scores)};
}

IndexList select_key_tokens(std::span<const double> scores) {
  if (scores.empty()) throw InvalidInput("select_key_tokens: no scores");
  const Quartiles q = quartiles(scores);
  const double fence = q.q3 + kIqrFence * (q.q3 - q.q1);
  IndexList keys;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > fence) keys.push_back(i);
  }
  if (keys.empty()) {
    const std::size_t top = (scores.size() + 3) / 4;
    const IndexList order = argsort_desc(scores);
    keys.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top));
    std::sort(keys.begin(), keys.end());
  }
  return keys;
}

double token_similarity(const Matrix& k, std::size_t i, std::size_t j) {
  if (i >= k.rows() || j >= k.rows()) {
    throw InvalidInput("token_similarity: index out of range (" + std::to_string(i) + ", " +
                       std::to_string(j) + ") for " + std::to_string(k.rows()) + " keys");
  }
  return dot(k.row(i), k.row(j));
}

namespace {

void check_keys(const IndexList& key_indices, std::size_t n) {
  if (key_indices.empty()) throw InvalidInput("key set is empty");
  for (std::size_t i = 0; i < key_indices.size(); ++i) {
    if (key_indices[i] >= n) throw InvalidInput("key index out of range");
    if (i > 0 && key_indices[i] <= key_indices[i - 1]) {
      throw InvalidInput("key indices must be strictly ascending");
    }
  }
}

}  // namespace

ClusterAssignment assign_clusters(const Matrix& k, const IndexList& key_indices) {
  check_keys(key_indices, k.rows());
  std::vector<bool> is_key(k.rows(), false);
  for (auto key : key_indices) is_key[key] = true;

  ClusterAssignment assignment;
  for (std::size_t t = 0; t < k.rows(); ++t) {
    if (is_key[t]) continue;
    std::size_t best = key_indices.front();
    double best_sim = token_similarity(k, t, best);
    for (std::size_t c = 1; c < key_indices.size(); ++c) {
      const double sim = token_similarity(k, t, key_indices[c]);
      if (sim > best_sim) {
        best_sim = sim;
        best = key_indices[c];
      }
    }
    assignment.emplace(t, best);
  }
  return assignment;
}

TokenSet merge_tokens(const TokenSet& ts, const Matrix& k, const IndexList& key_indices,
                      const ClusterAssignment& assignment) {
  const std::size_t n = ts.size();
  if (k.rows() != n) {
    throw ShapeError("merge_tokens: " + std::to_string(k.rows()) + " keys for " +
                     std::to_string(n) + " tokens");
  }
  check_keys(key_indices, n);

  // Cluster slot per token: position of its key in key_indices.
  std::vector<std::size_t> slot(n, key_indices.size());
  for (std::size_t c = 0; c < key_indices.size(); ++c) slot[key_indices[c]] = c;
  std::vector<IndexList> members(key_indices.size());
  for (std::size_t c = 0; c < key_indices.size(); ++c) members[c].push_back(key_indices[c]);

  if (assignment.size() != n - key_indices.size()) {
    throw InvalidInput("merge_tokens: assignment must cover exactly the non-key tokens");
  }
  for (auto [t, key] : assignment) {
    if (t >= n || slot[t] != key_indices.size()) {
      throw InvalidInput("merge_tokens: assignment source " + std::to_string(t) +
                         " is a key or out of range");
    }
    if (key >= n || slot[key] == key_indices.size()) {
      throw InvalidInput("merge_tokens: assignment target " + std::to_string(key) +
                         " is not a key token");
    }
    members[slot[key]].push_back(t);
  }

  const std::size_t dim = ts.dim();
  Matrix merged(key_indices.size(), dim);
  std::vector<std::uint64_t> ids;
  ids.reserve(key_indices.size());
  for (std::size_t c = 0; c < key_indices.size(); ++c) {
    IndexList& cluster = members[c];
    std::sort(cluster.begin(), cluster.end());
    const std::size_t key = key_indices[c];
    Vector sims(cluster.size());
    for (std::size_t m = 0; m < cluster.size(); ++m) sims[m] = token_similarity(k, cluster[m], key);
    const Vector w = softmax(sims);

    auto out = merged.row(c);
    auto first = ts.token(cluster[0]);
    for (std::size_t x = 0; x < dim; ++x) out[x] = w[0] * first[x];
    for (std::size_t m = 1; m < cluster.size(); ++m) {
      auto tok = ts.token(cluster[m]);
      for (std::size_t x = 0; x < dim; ++x) out[x] += w[m] * tok[x];
    }
    ids.push_back(ts.origin_ids()[key]);
  }
  return TokenSet(ts.modality(), dim, std::move(merged), std::move(ids));
}

MergeResult prumerge(const TokenSet& ts, const AttentionInputs& inp) {
  if (inp.k.rows() != ts.size()) {
    throw ShapeError("prumerge: K has " + std::to_string(inp.k.rows()) + " rows for " +
                     std::to_string(ts.size()) + " tokens");
  }
  const ImportanceScores s = importance_scores(inp);
  IndexList keys = select_key_tokens(s.scores);
  ClusterAssignment assignment = assign_clusters(inp.k, keys);
  TokenSet merged = merge_tokens(ts, inp.k, keys, assignment);
  const double ratio = static_cast<double>(keys.size()) / static_cast<double>(ts.size());
  return {std::move(keys), std::move(assignment), std::move(merged), ratio};
}

}  // namespace sparsetrain
