#include "sparsetrain/masking.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

namespace sparsetrain {

std::string_view to_string(Modality m) {
  return m == Modality::visual ? "visual" : "audio";
}

Modality parse_modality(std::string_view s) {
  if (s == "visual") return Modality::visual;
  if (s == "audio") return Modality::audio;
  throw InvalidInput("unknown modality '" + std::string(s) + "'");
}

TokenSet::TokenSet(Modality modality, std::size_t dim, Matrix tokens,
                   std::vector<std::uint64_t> origin_ids)
    : modality_(modality), dim_(dim), tokens_(std::move(tokens)), origin_ids_(std::move(origin_ids)) {
  if (tokens_.rows() != origin_ids_.size()) {
    throw ShapeError("token set: " + std::to_string(tokens_.rows()) + " tokens but " +
                     std::to_string(origin_ids_.size()) + " origin ids");
  }
  if (tokens_.rows() > 0 && tokens_.cols() != dim_) {
    throw ShapeError("token set: tokens have dim " + std::to_string(tokens_.cols()) +
                     ", expected " + std::to_string(dim_));
  }
  if (tokens_.rows() == 0) tokens_ = Matrix(0, dim_);
  std::unordered_set<std::uint64_t> seen;
  for (auto id : origin_ids_) {
    if (!seen.insert(id).second) {
      throw InvalidInput("token set: duplicate origin id " + std::to_string(id));
    }
  }
}

namespace {
std::vector<std::uint64_t> iota_ids(std::size_t n) {
  std::vector<std::uint64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}
}  // namespace

TokenSet::TokenSet(Modality modality, Matrix tokens)
    : TokenSet(modality, tokens.cols(), tokens, iota_ids(tokens.rows())) {}

std::size_t masked_count(std::size_t total, double ratio) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(total)));
}

MaskPlan plan_mask(std::size_t total, double ratio, SeededRng& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw InvalidInput("ratio out of range [0, 1]: " + std::to_string(ratio));
  }
  if (total == 0) throw InvalidInput("plan_mask: total must be >= 1");
  MaskPlan plan;
  plan.total = total;
  plan.ratio = ratio;
  plan.seed = rng.seed();
  plan.masked = sample_without_replacement(total, masked_count(total, ratio), rng);
  return plan;
}

TokenSet apply_mask(const TokenSet& ts, const MaskPlan& plan) {
  if (plan.total != ts.size()) {
    throw ShapeError("apply_mask: plan covers " + std::to_string(plan.total) +
                     " tokens, token set has " + std::to_string(ts.size()));
  }
  std::vector<bool> drop(ts.size(), false);
  for (auto i : plan.masked) {
    if (i >= ts.size()) throw InvalidInput("apply_mask: masked index out of range");
    if (drop[i]) throw InvalidInput("apply_mask: duplicate masked index");
    drop[i] = true;
  }
  std::vector<double> values;
  std::vector<std::uint64_t> ids;
  values.reserve((ts.size() - plan.masked.size()) * ts.dim());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (drop[i]) continue;
    auto tok = ts.token(i);
    values.insert(values.end(), tok.begin(), tok.end());
    ids.push_back(ts.origin_ids()[i]);
  }
  const std::size_t kept = ids.size();
  return TokenSet(ts.modality(), ts.dim(), Matrix(kept, ts.dim(), std::move(values)), std::move(ids));
}

bool mask_active(std::size_t epoch, const MaskSchedule& schedule) {
  return epoch < schedule.active_epochs;
}

}  // namespace sparsetrain
