// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "sparsetrain/cli.hpp"
#include "sparsetrain/experiment.hpp"
#include "sparsetrain/io.hpp"
#include "sparsetrain/merging.hpp"
#include "sparsetrain/selection.hpp"

using namespace sparsetrain;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

LossOracle from_rows(const std::vector<Vector>& rows) {
  return [rows](int epoch) { return rows.at(static_cast<std::size_t>(epoch + 1)); };
}

Matrix random_matrix(std::size_t r, std::size_t c, SeededRng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

Outcome algorithm1_equivalence() {
  const auto t0 = Clock::now();
  SeededRng rng(2024);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(20), e = 1 + rng.uniform_index(6);
    std::vector<Vector> rows(e + 1, Vector(n));
    for (auto& r : rows)
      for (double& x : r) x = 3.0 * rng.uniform();
    const SelectionConfig cfg{e, 1 + rng.uniform_index(e), 0.05 + 0.95 * rng.uniform(), 1 + rng.uniform_index(n)};
    const auto expected = oracle::algorithm1(rows, cfg.epochs, cfg.group_size, cfg.decay, cfg.subset_size);
    if (run_selection(from_rows(rows), cfg).indices != expected.subset) ++mismatches;
  }
  const double t = seconds_since(t0);
  std::ostringstream d;
  d << "200 instances, " << mismatches << " mismatches, " << t << " s";
  return {mismatches == 0 && t < 5.0, d.str()};
}

Outcome hand_trace() {
  const KeySubset ks = run_selection(from_rows({{1.0, 0.0}, {0.9, 0.1}, {0.8, 0.2}}), SelectionConfig{2, 1, 0.5, 1});
  std::ostringstream d;
  d << "subset size " << ks.indices.size() << ", m = [" << ks.merged_scores[0] << ", " << ks.merged_scores[1] << "]";
  return {ks.indices == IndexList{0} && ks.merged_scores == Vector{1.5, 0.0}, d.str()};
}

Outcome infobatch_unbiased() {
  SeededRng gen(64);
  Vector losses(64), g(64);
  for (double& x : losses) x = gen.uniform();
  for (double& x : g) x = gen.normal() + 2.0;
  double mu = 0.0;
  for (double x : losses) mu += x;
  mu /= 64.0;
  double full = 0.0;
  for (double x : g) full += x;

  const InfoBatchConfig cfg{0.5, 0.875, 15};
  const std::size_t seeds = 10000;
  double acc = 0.0;
  bool above_always = true;
  for (std::size_t s = 0; s < seeds; ++s) {
    SeededRng rng(s);
    const PruneDecision d = infobatch_step(losses, cfg, 0, rng);
    std::vector<bool> kept(64, false);
    for (std::size_t j = 0; j < d.kept.size(); ++j) {
      kept[d.kept[j]] = true;
      acc += d.factors[j] * g[d.kept[j]];
    }
    for (std::size_t i = 0; i < 64; ++i)
      if (losses[i] >= mu && !kept[i]) above_always = false;
  }
  const double rel = std::abs(acc / static_cast<double>(seeds) - full) / std::abs(full);
  std::ostringstream d;
  d << "relative error " << rel << ", above-mean always kept: " << (above_always ? "yes" : "no");
  return {rel <= 0.02 && above_always, d.str()};
}

Outcome merging_correctness() {
  SeededRng rng(4096);
  double worst = 0.0;
  int structural = 0, scale_failures = 0, empty_keys = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(32), d = 1 + rng.uniform_index(16);
    const Matrix emb = random_matrix(n, d, rng);
    const AttentionInputs inp{random_matrix(1 + rng.uniform_index(4), d, rng, 2.0), random_matrix(n, d, rng), emb};
    const MergeResult got = prumerge(TokenSet(Modality::visual, emb), inp);
    const auto want = oracle::prumerge(emb.to_rows(), inp.q.to_rows(), inp.k.to_rows(), inp.v.to_rows());
    if (got.key_indices.empty()) ++empty_keys;
    if (got.key_indices != want.keys || got.assignment != want.assignment) {
      ++structural;
      continue;
    }
    for (std::size_t c = 0; c < want.merged.size(); ++c)
      for (std::size_t x = 0; x < d; ++x) worst = std::max(worst, std::abs(got.merged.token(c)[x] - want.merged[c][x]));

    const Vector scores = importance_scores(inp).scores;
    const IndexList keys = select_key_tokens(scores);
    for (int s = 0; s < 10; ++s) {
      const double c = std::exp(8.0 * rng.uniform() - 4.0);
      Vector scaled = scores;
      for (double& x : scaled) x *= c;
      if (select_key_tokens(scaled) != keys) ++scale_failures;
    }
  }
  std::ostringstream o;
  o << "max deviation " << worst << ", structural mismatches " << structural << ", scale failures "
    << scale_failures << ", empty key sets " << empty_keys;
  return {worst <= 1e-9 && structural == 0 && scale_failures == 0 && empty_keys == 0, o.str()};
}

Outcome compute_reduction() {
  const auto t0 = Clock::now();
  const Config cfg;  // 50% masking for epochs 0-2, merging and InfoBatch on, 15 epochs
  const Dataset data = generate_dataset(cfg.dataset);
  const ExperimentReport dense = train(data, PipelineConfig::dense(), cfg.training, cfg.seed);
  const ExperimentReport sparse = train(data, cfg.sparse_pipeline(), cfg.training, cfg.seed);
  const double reduction =
      1.0 - static_cast<double>(sparse.compute_proxy()) / static_cast<double>(dense.compute_proxy());
  const double t = seconds_since(t0);
  std::ostringstream d;
  d << "dense " << dense.compute_proxy() << ", sparse " << sparse.compute_proxy() << ", reduction "
    << 100.0 * reduction << "%, " << t << " s";
  return {reduction >= 0.20 && t < 120.0, d.str()};
}

Outcome subset_retention() {
  Config cfg;
  cfg.dataset.n_samples = 2000;
  cfg.dataset.hard_fraction = 0.2;
  const SimulationOutputs sim = run_simulation(cfg);
  const double retention = sim.subset.gain_retention.value_or(0.0);

  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SyntheticDatasetSpec spec = cfg.dataset;
    spec.seed = seed;
    const Dataset data = generate_dataset(spec);
    SelectionConfig sel = cfg.selection();
    sel.subset_size = cfg.resolved_subset_size();
    const KeySubset ks = select_on_dataset(data, sel, cfg.infobatch(), cfg.training, seed);
    if (*planted_hard_recall(data, ks.indices) > random_subset_recall(data, sel.subset_size, seed)) ++wins;
  }
  std::ostringstream d;
  d << "gain retention " << retention << " (subset acc " << sim.subset.final_accuracy << ", full acc "
    << sim.full.final_accuracy << ", chance " << sim.full.chance_accuracy << "), recall wins " << wins << "/20";
  return {retention >= 0.70 && wins >= 18, d.str()};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "sparsetrain_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  write_json_file(root / "cfg.json", config_to_json(Config{}));
  std::ostringstream out, err;
  const std::string cfg = (root / "cfg.json").string();
  const int a = run_cli({"simulate", "--config", cfg, "--out", (root / "a").string()}, out, err);
  const int b = run_cli({"simulate", "--config", cfg, "--out", (root / "b").string()}, out, err);
  if (a != 0 || b != 0) return {false, "simulate failed: " + err.str()};
  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path twin = root / "b" / entry.path().filename();
    if (!fs::exists(twin) || read_file(entry.path()) != read_file(twin)) ++differing;
  }
  std::ostringstream d;
  d << files << " report files, " << differing << " differ";
  return {files > 0 && differing == 0, d.str()};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 algorithm-1 oracle equivalence", algorithm1_equivalence},
      {"2 hand-trace fixture", hand_trace},
      {"3 infobatch unbiasedness", infobatch_unbiased},
      {"4 merging correctness", merging_correctness},
      {"5 compute-proxy reduction", compute_reduction},
      {"6 subset retention", subset_retention},
      {"7 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
