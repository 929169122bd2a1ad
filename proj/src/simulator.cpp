#include "sparsetrain/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace sparsetrain {

namespace {

// Tags for derive_seed; each stochastic stream gets its own.
enum StreamTag : std::uint64_t {
  kHardSet = 1,
  kTrainSample = 2,
  kTestSample = 3,
  kPrototypes = 4,
  kMask = 5,
  kPrune = 6,
  kShuffle = 7,
  kWarmupShuffle = 8,
  kSelectionPrune = 9,
  kSelectionShuffle = 10,
};

Vector unit_normal(std::size_t dim, SeededRng& rng) {
  Vector v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (double& x : v) x = rng.normal();
    norm = std::sqrt(dot(v, v));
  }
  for (double& x : v) x /= norm;
  return v;
}

TokenSet make_tokens(Modality modality, std::size_t count, const SyntheticDatasetSpec& spec,
                     std::span<const double> prototype, bool hard, SeededRng& rng) {
  const double sigma = hard ? spec.noise_sigma_hard : spec.noise_sigma_easy;
  const double amp = hard ? spec.signal_hard : spec.signal_easy;
  const IndexList salient = sample_without_replacement(count, std::max<std::size_t>(1, count / 8), rng);
  Matrix tokens(count, spec.dim);
  std::size_t next = 0;
  for (std::size_t t = 0; t < count; ++t) {
    const bool is_salient = next < salient.size() && salient[next] == t;
    if (is_salient) ++next;
    auto row = tokens.row(t);
    for (std::size_t x = 0; x < spec.dim; ++x) {
      row[x] = sigma * rng.normal() + (is_salient ? amp * prototype[x] : 0.0);
    }
  }
  return TokenSet(modality, std::move(tokens));
}

Sample make_sample(const SyntheticDatasetSpec& spec, const Matrix& prototypes,
                   std::span<const double> probe, bool hard, std::uint64_t seed) {
  SeededRng rng(seed);
  const auto label = static_cast<std::size_t>(rng.uniform_index(spec.n_classes));
  TokenSet visual = make_tokens(Modality::visual, spec.visual_tokens(), spec, prototypes.row(label), hard, rng);
  TokenSet audio = make_tokens(Modality::audio, spec.audio_tokens(), spec, prototypes.row(label), hard, rng);
  Matrix query(2, spec.dim);
  for (std::size_t r = 0; r < query.rows(); ++r) {
    for (std::size_t x = 0; x < spec.dim; ++x) query(r, x) = 8.0 * probe[x] + 0.1 * rng.normal();
  }
  return Sample{std::move(visual), std::move(audio), std::move(query), label, hard};
}

Vector mean_pool(const TokenSet& ts) {
  Vector out(ts.dim(), 0.0);
  if (ts.empty()) return out;
  for (std::size_t t = 0; t < ts.size(); ++t) {
    auto tok = ts.token(t);
    for (std::size_t x = 0; x < ts.dim(); ++x) out[x] += tok[x];
  }
  for (double& x : out) x /= static_cast<double>(ts.size());
  return out;
}

TokenSet process_modality(const TokenSet& ts, const Matrix& query,
                          const std::optional<std::pair<double, std::uint64_t>>& mask,
                          bool merge) {
  TokenSet current = ts;
  if (mask) {
    SeededRng rng(derive_seed(mask->second, {static_cast<std::uint64_t>(ts.modality())}));
    current = apply_mask(current, plan_mask(current.size(), mask->first, rng));
  }
  if (merge && !current.empty()) {
    current = prumerge(current, AttentionInputs{query, current.tokens(), current.tokens()}).merged;
  }
  return current;
}

IndexList all_indices(std::size_t n) {
  IndexList idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

void shuffle(IndexList& v, SeededRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(v[i - 1], v[j]);
  }
}

// Per-epoch sample view source: deterministic views are computed once.
class ViewCache {
 public:
  ViewCache(const std::vector<Sample>& samples, bool merge) : samples_(samples), merge_(merge), cache_(samples.size()) {}

  const SampleView& plain(std::size_t i) {
    if (!cache_[i]) cache_[i] = view_sample(samples_[i], std::nullopt, merge_);
    return *cache_[i];
  }

  SampleView get(std::size_t i, std::optional<double> mask_ratio, std::uint64_t mask_seed) {
    if (!mask_ratio) return plain(i);
    return view_sample(samples_[i], std::make_pair(*mask_ratio, mask_seed), merge_);
  }

 private:
  const std::vector<Sample>& samples_;
  bool merge_;
  std::vector<std::optional<SampleView>> cache_;
};

struct EpochPlan {
  IndexList positions;  // into the active list, in processing order
  Vector factors;       // parallel to positions
  std::optional<double> mask_ratio;
  std::uint64_t mask_seed_base = 0;
};

// Runs one pass of minibatch SGD. Records the unweighted loss of every
// processed sample into last_loss (indexed by active position).
EpochStats run_epoch(ToyModel& model, const std::vector<Sample>& samples, const IndexList& active,
                     ViewCache& views, const EpochPlan& plan, const TrainingConfig& training,
                     Vector& last_loss) {
  EpochStats stats;
  double loss_sum = 0.0;
  std::vector<Vector> feats;
  std::vector<std::size_t> labels;
  Vector weights;
  for (std::size_t start = 0; start < plan.positions.size(); start += training.batch_size) {
    const std::size_t end = std::min(start + training.batch_size, plan.positions.size());
    const double inv_batch = 1.0 / static_cast<double>(end - start);
    feats.clear();
    labels.clear();
    weights.clear();
    for (std::size_t b = start; b < end; ++b) {
      const std::size_t pos = plan.positions[b];
      const std::size_t idx = active[pos];
      SampleView view = views.get(idx, plan.mask_ratio, derive_seed(plan.mask_seed_base, {idx}));
      const double l = model.loss(view.feature, samples[idx].label);
      last_loss[pos] = l;
      loss_sum += l;
      stats.tokens += view.tokens;
      feats.push_back(std::move(view.feature));
      labels.push_back(samples[idx].label);
      weights.push_back(plan.factors[b] * inv_batch);
    }
    model.sgd_step(feats, labels, weights, training.learning_rate);
    ++stats.steps;
  }
  stats.samples = plan.positions.size();
  stats.mean_loss = stats.samples > 0 ? loss_sum / static_cast<double>(stats.samples) : 0.0;
  return stats;
}

double evaluate(const ToyModel& model, const std::vector<Sample>& samples, ViewCache& views) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (model.predict(views.plain(i).feature) == samples[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

EpochPlan plan_from_decision(const PruneDecision& d, SeededRng& shuffle_rng) {
  EpochPlan plan;
  IndexList order = all_indices(d.kept.size());
  shuffle(order, shuffle_rng);
  plan.positions.reserve(order.size());
  plan.factors.reserve(order.size());
  for (auto o : order) {
    plan.positions.push_back(d.kept[o]);
    plan.factors.push_back(d.factors[o]);
  }
  return plan;
}

PruneDecision keep_all(std::size_t n) {
  return PruneDecision{all_indices(n), Vector(n, 1.0)};
}

}  // namespace

void SyntheticDatasetSpec::validate() const {
  if (n_samples == 0) throw InvalidInput("dataset: n_samples must be >= 1");
  if (n_classes == 0) throw InvalidInput("dataset: n_classes must be >= 1");
  if (dim == 0) throw InvalidInput("dataset: dim must be >= 1");
  if (tokens_per_sample < 2) throw InvalidInput("dataset: tokens_per_sample must be >= 2");
  if (!(hard_fraction >= 0.0 && hard_fraction <= 1.0)) {
    throw InvalidInput("dataset: hard_fraction must be in [0, 1]");
  }
  for (double v : {noise_sigma_easy, noise_sigma_hard, signal_easy, signal_hard}) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidInput("dataset: noise/signal levels must be finite and >= 0");
  }
}

std::size_t Dataset::hard_count() const {
  return static_cast<std::size_t>(
      std::count_if(train.begin(), train.end(), [](const Sample& s) { return s.hard; }));
}

Dataset generate_dataset(const SyntheticDatasetSpec& spec) {
  spec.validate();
  SeededRng proto_rng(derive_seed(spec.seed, {kPrototypes}));
  Matrix prototypes(spec.n_classes, spec.dim);
  Vector probe(spec.dim, 0.0);
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    const Vector p = unit_normal(spec.dim, proto_rng);
    std::copy(p.begin(), p.end(), prototypes.row(c).begin());
    for (std::size_t x = 0; x < spec.dim; ++x) probe[x] += p[x];
  }
  const double probe_norm = std::sqrt(dot(probe, probe));
  if (probe_norm > 0.0) {
    for (double& x : probe) x /= probe_norm;
  }

  const auto hard_for = [&](std::size_t n, std::uint64_t tag) {
    SeededRng rng(derive_seed(spec.seed, {kHardSet, tag}));
    std::vector<bool> hard(n, false);
    const auto count = static_cast<std::size_t>(std::floor(spec.hard_fraction * static_cast<double>(n)));
    for (auto i : sample_without_replacement(n, count, rng)) hard[i] = true;
    return hard;
  };

  Dataset data;
  data.spec = spec;
  const std::vector<bool> train_hard = hard_for(spec.n_samples, kTrainSample);
  data.train.reserve(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    data.train.push_back(make_sample(spec, prototypes, probe, train_hard[i],
                                     derive_seed(spec.seed, {kTrainSample, i})));
  }
  const std::vector<bool> test_hard = hard_for(spec.n_test, kTestSample);
  data.test.reserve(spec.n_test);
  for (std::size_t i = 0; i < spec.n_test; ++i) {
    data.test.push_back(make_sample(spec, prototypes, probe, test_hard[i],
                                    derive_seed(spec.seed, {kTestSample, i})));
  }
  return data;
}

PipelineConfig PipelineConfig::dense() { return PipelineConfig{}; }

PipelineConfig PipelineConfig::full_sparse() {
  PipelineConfig p;
  p.mask_schedule.active_epochs = 3;
  p.mask_ratio = 0.5;
  p.merge = true;
  p.infobatch = true;
  p.infobatch_cfg.prune_ratio = 0.5;
  p.infobatch_cfg.delta = 0.875;
  return p;
}

void PipelineConfig::validate() const {
  if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) {
    throw InvalidInput("ratio out of range [0, 1]: " + std::to_string(mask_ratio));
  }
  if (infobatch) {
    InfoBatchConfig probe = infobatch_cfg;
    probe.total_epochs = std::max<std::size_t>(probe.total_epochs, 1);
    probe.validate();
  }
}

void TrainingConfig::validate() const {
  if (epochs < 1) throw InvalidInput("training: epochs must be >= 1");
  if (batch_size < 1) throw InvalidInput("training: batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidInput("training: learning_rate must be finite and > 0");
  }
}

ToyModel::ToyModel(std::size_t features, std::size_t classes)
    : weights_(classes, features), bias_(classes, 0.0) {}

Vector ToyModel::probabilities(std::span<const double> feature) const {
  Vector logits(classes());
  for (std::size_t c = 0; c < classes(); ++c) logits[c] = dot(weights_.row(c), feature) + bias_[c];
  return softmax(logits);
}

double ToyModel::loss(std::span<const double> feature, std::size_t label) const {
  const Vector p = probabilities(feature);
  return -std::log(std::max(p[label], 1e-300));
}

std::size_t ToyModel::predict(std::span<const double> feature) const {
  const Vector p = probabilities(feature);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

void ToyModel::sgd_step(const std::vector<Vector>& features, const std::vector<std::size_t>& labels,
                        const Vector& weights, double learning_rate) {
  Matrix grad_w(classes(), weights_.cols());
  Vector grad_b(classes(), 0.0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    Vector p = probabilities(features[i]);
    p[labels[i]] -= 1.0;
    for (std::size_t c = 0; c < classes(); ++c) {
      const double g = weights[i] * p[c];
      grad_b[c] += g;
      auto row = grad_w.row(c);
      for (std::size_t x = 0; x < row.size(); ++x) row[x] += g * features[i][x];
    }
  }
  for (std::size_t c = 0; c < classes(); ++c) {
    bias_[c] -= learning_rate * grad_b[c];
    auto w = weights_.row(c);
    auto g = grad_w.row(c);
    for (std::size_t x = 0; x < w.size(); ++x) w[x] -= learning_rate * g[x];
  }
}

SampleView view_sample(const Sample& s, const std::optional<std::pair<double, std::uint64_t>>& mask,
                       bool merge) {
  const TokenSet visual = process_modality(s.visual, s.query, mask, merge);
  const TokenSet audio = process_modality(s.audio, s.query, mask, merge);
  SampleView view;
  view.feature = mean_pool(visual);
  const Vector a = mean_pool(audio);
  view.feature.insert(view.feature.end(), a.begin(), a.end());
  view.tokens = visual.size() + audio.size();
  return view;
}

ExperimentReport train(const Dataset& data, const PipelineConfig& pipeline,
                       const TrainingConfig& training, std::uint64_t seed, const IndexList& subset) {
  pipeline.validate();
  training.validate();
  const auto started = std::chrono::steady_clock::now();
  const IndexList active = subset.empty() ? all_indices(data.train.size()) : subset;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i] >= data.train.size()) throw InvalidInput("train: subset index out of range");
    if (i > 0 && active[i] <= active[i - 1]) throw InvalidInput("train: subset must be strictly ascending");
  }

  ToyModel model(2 * data.spec.dim, data.spec.n_classes);
  ViewCache train_views(data.train, pipeline.merge);
  ViewCache test_views(data.test, pipeline.merge);
  InfoBatchConfig ib = pipeline.infobatch_cfg;
  ib.total_epochs = training.epochs;
  // Initial scores of 1 leave nothing below the mean, so epoch 0 is never pruned.
  Vector last_loss(active.size(), 1.0);

  ExperimentReport report;
  report.subset = subset;
  report.chance_accuracy = 1.0 / static_cast<double>(data.spec.n_classes);
  for (std::size_t e = 0; e < training.epochs; ++e) {
    PruneDecision decision = keep_all(active.size());
    if (pipeline.infobatch) {
      SeededRng prune_rng(derive_seed(seed, {kPrune, e}));
      decision = infobatch_step(last_loss, ib, e, prune_rng);
    }
    SeededRng shuffle_rng(derive_seed(seed, {kShuffle, e}));
    EpochPlan plan = plan_from_decision(decision, shuffle_rng);
    if (mask_active(e, pipeline.mask_schedule)) plan.mask_ratio = pipeline.mask_ratio;
    plan.mask_seed_base = derive_seed(seed, {kMask, e});

    EpochStats stats = run_epoch(model, data.train, active, train_views, plan, training, last_loss);
    stats.epoch = e;
    stats.accuracy = evaluate(model, data.test, test_views);
    report.total_tokens += stats.tokens;
    report.total_steps += stats.steps;
    report.total_samples += stats.samples;
    report.epochs.push_back(stats);
  }
  report.final_accuracy = report.epochs.back().accuracy;
  if (!subset.empty()) report.planted_hard_recall = planted_hard_recall(data, subset);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

KeySubset select_on_dataset(const Dataset& data, const SelectionConfig& cfg,
                            const InfoBatchConfig& infobatch, const TrainingConfig& training,
                            std::uint64_t seed) {
  training.validate();
  cfg.validate(data.train.size());
  const IndexList active = all_indices(data.train.size());
  ToyModel model(2 * data.spec.dim, data.spec.n_classes);
  ViewCache views(data.train, false);
  InfoBatchConfig ib = infobatch;
  ib.total_epochs = cfg.epochs;
  Vector last_loss(active.size(), 1.0);

  const auto all_losses = [&] {
    Vector out(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      out[i] = model.loss(views.plain(i).feature, data.train[i].label);
    }
    return out;
  };

  // Losses for the flags are evaluated on every sample after each epoch;
  // InfoBatch pruning only affects which samples contribute gradient steps.
  const LossOracle oracle = [&](int epoch) {
    EpochPlan plan;
    if (epoch < 0) {
      SeededRng shuffle_rng(derive_seed(seed, {kWarmupShuffle}));
      plan = plan_from_decision(keep_all(active.size()), shuffle_rng);
    } else {
      const auto e = static_cast<std::size_t>(epoch);
      SeededRng prune_rng(derive_seed(seed, {kSelectionPrune, e}));
      const PruneDecision d = infobatch_step(last_loss, ib, e, prune_rng);
      SeededRng shuffle_rng(derive_seed(seed, {kSelectionShuffle, e}));
      plan = plan_from_decision(d, shuffle_rng);
    }
    run_epoch(model, data.train, active, views, plan, training, last_loss);
    last_loss = all_losses();
    return last_loss;
  };
  return run_selection(oracle, cfg);
}

std::optional<double> planted_hard_recall(const Dataset& data, const IndexList& subset) {
  const std::size_t hard = data.hard_count();
  if (hard == 0) return std::nullopt;
  std::size_t hit = 0;
  for (auto i : subset) {
    if (i < data.train.size() && data.train[i].hard) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(hard);
}

RetentionResult run_retention_experiment(const Dataset& data, const IndexList& subset,
                                         const PipelineConfig& pipeline,
                                         const TrainingConfig& training, std::uint64_t seed) {
  if (subset.empty()) throw InvalidInput("retention: subset is empty");
  RetentionResult r;
  r.full = train(data, pipeline, training, seed);
  r.full.label = "full";
  r.subset = train(data, pipeline, training, seed, subset);
  r.subset.label = "subset";
  const double chance = r.full.chance_accuracy;
  if (r.full.final_accuracy > 0.0) {
    r.subset.accuracy_ratio = r.subset.final_accuracy / r.full.final_accuracy;
  }
  if (r.full.final_accuracy > chance) {
    r.subset.gain_retention = (r.subset.final_accuracy - chance) / (r.full.final_accuracy - chance);
  }
  return r;
}

}  // namespace sparsetrain
