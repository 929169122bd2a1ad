#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "sparsetrain/selection.hpp"

using namespace sparsetrain;

namespace {

LossOracle from_rows(const std::vector<Vector>& rows) {
  return [rows](int epoch) { return rows.at(static_cast<std::size_t>(epoch + 1)); };
}

ScoreBoard with_flags(const std::vector<HardFlags>& flags) {
  ScoreBoard b = warmup_scores(Vector(flags.front().size(), 0.0));
  b.epochs_list = flags;
  return b;
}

}  // namespace

TEST_CASE("warmup_scores") {
  CHECK(warmup_scores(Vector{1.0, 0.0}).scores == Vector{1.0, 0.0});
  const ScoreBoard c = warmup_scores(Vector(5, 0.3));
  CHECK(c.scores == Vector(5, 0.3));
  CHECK(c.epochs_list.empty());
  SeededRng rng(1);
  Vector l(100);
  for (double& x : l) x = rng.uniform();
  CHECK(warmup_scores(l).scores == l);
  CHECK_THROWS_AS(warmup_scores(Vector{}), InvalidInput);
}

TEST_CASE("epoch_update uses the previous epoch's mean") {
  ScoreBoard b = epoch_update(warmup_scores(Vector{1.0, 0.0}), Vector{0.9, 0.1});
  CHECK(b.epochs_list.back() == HardFlags{1, 0});
  CHECK(b.scores == Vector{0.9, 0.1});

  ScoreBoard eq = epoch_update(warmup_scores(Vector{0.2, 0.6}), Vector{0.4, 0.4});
  CHECK(eq.epochs_list.back() == HardFlags{0, 0});

  ScoreBoard one = epoch_update(warmup_scores(Vector{0.7}), Vector{0.7});
  CHECK(one.epochs_list.back() == HardFlags{0});

  CHECK_THROWS_AS(epoch_update(warmup_scores(Vector{1.0}), Vector{1.0, 2.0}), ShapeError);
}

TEST_CASE("merge_epoch_flags") {
  SUBCASE("reference group weights") {
    SelectionConfig cfg{15, 3, 0.618, 1};
    std::vector<HardFlags> flags(15, HardFlags{1});
    const Vector m = merge_epoch_flags(with_flags(flags), cfg);
    const double expected = 3.0 * (1 + 0.618 + std::pow(0.618, 2) + std::pow(0.618, 3) + std::pow(0.618, 4));
    CHECK(m[0] == doctest::Approx(expected).epsilon(1e-14));
    CHECK(group_weight(0.618, 1) == 1.0);
    CHECK(group_weight(0.618, 5) == doctest::Approx(0.618 * 0.618 * 0.618 * 0.618));
  }
  SUBCASE("hand trace") {
    const Vector m = merge_epoch_flags(with_flags({{1, 0}, {1, 0}}), SelectionConfig{2, 1, 0.5, 1});
    CHECK(m == Vector{1.5, 0.0});
  }
  SUBCASE("unit decay sums the flags") {
    const std::vector<HardFlags> flags{{1, 0, 1}, {0, 0, 1}, {1, 1, 1}, {0, 1, 0}};
    CHECK(merge_epoch_flags(with_flags(flags), SelectionConfig{4, 3, 1.0, 1}) == Vector{2, 2, 3});
  }
  SUBCASE("last group may be partial") {
    // E=4, k=3: group 1 = epochs 1..3, group 2 = epoch 4.
    const std::vector<HardFlags> flags{{0}, {0}, {0}, {1}};
    CHECK(merge_epoch_flags(with_flags(flags), SelectionConfig{4, 3, 0.25, 1}) == Vector{0.25});
  }
  CHECK_THROWS_AS(merge_epoch_flags(with_flags({{1}}), SelectionConfig{2, 1, 0.5, 1}), InvalidInput);
}

TEST_CASE("merged scores are bounded") {
  SeededRng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t e = 1 + rng.uniform_index(10), k = 1 + rng.uniform_index(4);
    const double r = 0.05 + 0.95 * rng.uniform();
    std::vector<HardFlags> flags(e, HardFlags(6));
    for (auto& f : flags)
      for (auto& x : f) x = static_cast<std::uint8_t>(rng.uniform_index(2));
    const Vector m = merge_epoch_flags(with_flags(flags), SelectionConfig{e, k, r, 1});
    double bound = 0.0;
    const std::size_t groups = (e + k - 1) / k;
    for (std::size_t g = 1; g <= groups; ++g) bound += group_weight(r, g) * static_cast<double>(k);
    for (double x : m) CHECK((x >= 0.0 && x <= bound + 1e-12));
  }
}

TEST_CASE("select_key_subset") {
  CHECK(select_key_subset(Vector{1.5, 0.0}, 1).indices == IndexList{0});
  CHECK(select_key_subset(Vector(6, 0.5), 3).indices == IndexList{0, 1, 2});
  CHECK(select_key_subset(Vector{0.2, 0.9, 0.1}, 3).indices == IndexList{0, 1, 2});
  CHECK(select_key_subset(Vector{0.2, 0.9, 0.5, 0.9}, 2).indices == IndexList{1, 3});
  CHECK_THROWS_AS(select_key_subset(Vector{1.0}, 2), InvalidInput);
}

TEST_CASE("infobatch_step") {
  InfoBatchConfig cfg{0.5, 0.875, 16};
  SUBCASE("zero ratio is the identity") {
    SeededRng rng(1);
    const PruneDecision d = infobatch_step(Vector{0.1, 0.2, 0.9, 1.0}, InfoBatchConfig{0.0, 0.875, 16}, 0, rng);
    CHECK(d.kept == IndexList{0, 1, 2, 3});
    CHECK(d.factors == Vector(4, 1.0));
  }
  SUBCASE("Bernoulli replay with the same stream") {
    const Vector losses{0.1, 0.2, 0.9, 1.0};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      SeededRng rng(seed), replay(seed);
      const PruneDecision d = infobatch_step(losses, cfg, 3, rng);
      IndexList kept;
      Vector factors;
      for (std::size_t i = 0; i < 4; ++i) {
        if (losses[i] >= 0.55) {
          kept.push_back(i);
          factors.push_back(1.0);
        } else if (replay.uniform() >= 0.5) {
          kept.push_back(i);
          factors.push_back(2.0);
        }
      }
      CHECK(d.kept == kept);
      CHECK(d.factors == factors);
    }
  }
  SUBCASE("annealing boundary") {
    SeededRng rng(2);
    CHECK(cfg.anneal_epoch() == 14);
    const PruneDecision late = infobatch_step(Vector{0.1, 0.2, 0.9, 1.0}, cfg, 14, rng);
    CHECK(late.kept.size() == 4);
    CHECK(late.factors == Vector(4, 1.0));
    const InfoBatchConfig full{0.5, 1.0, 16};
    CHECK(full.anneal_epoch() == 16);
  }
  SUBCASE("errors") {
    SeededRng rng(3);
    CHECK_THROWS_AS(infobatch_step(Vector{}, cfg, 0, rng), InvalidInput);
    CHECK_THROWS_AS(infobatch_step(Vector{1.0}, cfg, 16, rng), InvalidInput);
    CHECK_THROWS_AS(infobatch_step(Vector{1.0}, InfoBatchConfig{1.0, 0.5, 4}, 0, rng), InvalidInput);
  }
}

TEST_CASE("above-mean samples are never pruned") {
  SeededRng meta(8);
  for (int trial = 0; trial < 200; ++trial) {
    Vector losses(1 + meta.uniform_index(40));
    for (double& x : losses) x = meta.uniform();
    const double mu = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
    const double ratio = 0.9 * meta.uniform();
    SeededRng rng(trial);
    const PruneDecision d = infobatch_step(losses, InfoBatchConfig{ratio, 0.875, 10}, 0, rng);
    std::vector<bool> kept(losses.size(), false);
    for (std::size_t j = 0; j < d.kept.size(); ++j) {
      kept[d.kept[j]] = true;
      const double expected = losses[d.kept[j]] >= mu ? 1.0 : 1.0 / (1.0 - ratio);
      CHECK(d.factors[j] == expected);
    }
    for (std::size_t i = 0; i < losses.size(); ++i)
      if (losses[i] >= mu) CHECK(kept[i]);
  }
}

TEST_CASE("run_selection") {
  SUBCASE("two-sample hand trace") {
    const KeySubset ks = run_selection(from_rows({{1.0, 0.0}, {0.9, 0.1}, {0.8, 0.2}}), SelectionConfig{2, 1, 0.5, 1});
    CHECK(ks.indices == IndexList{0});
    CHECK(ks.merged_scores == Vector{1.5, 0.0});
  }
  SUBCASE("identical losses select the first n") {
    const std::vector<Vector> rows(7, Vector(5, 0.4));
    CHECK(run_selection(from_rows(rows), SelectionConfig{6, 2, 0.618, 3}).indices == IndexList{0, 1, 2});
  }
  SUBCASE("matches the line-by-line transcription") {
    SeededRng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + rng.uniform_index(19), e = 1 + rng.uniform_index(6);
      std::vector<Vector> rows(e + 1, Vector(n));
      for (auto& r : rows)
        for (double& x : r) x = rng.uniform();
      const SelectionConfig cfg{e, 1 + rng.uniform_index(4), 0.1 + 0.9 * rng.uniform(), 1 + rng.uniform_index(n)};
      const auto expected = oracle::algorithm1(rows, cfg.epochs, cfg.group_size, cfg.decay, cfg.subset_size);
      const KeySubset ks = run_selection(from_rows(rows), cfg);
      CHECK(ks.indices == expected.subset);
      CHECK(ks.merged_scores == expected.m);
    }
  }
  SUBCASE("shifting every loss by a constant changes nothing") {
    SeededRng rng(32);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Vector> rows(5, Vector(8));  // n = 8 keeps the means exact
      for (auto& r : rows)
        for (auto& x : r) x = static_cast<double>(rng.uniform_index(8)) / 8.0;  // dyadic, exact under shift
      std::vector<Vector> shifted = rows;
      for (auto& r : shifted)
        for (auto& x : r) x += 4.0;
      const SelectionConfig cfg{4, 2, 0.618, 4};
      CHECK(run_selection(from_rows(rows), cfg).indices == run_selection(from_rows(shifted), cfg).indices);
    }
  }
  SUBCASE("errors and warnings") {
    CHECK_THROWS_AS(run_selection(from_rows({{1.0, 0.0}, {0.5}}), SelectionConfig{1, 1, 0.5, 1}), ShapeError);
    CHECK_THROWS_AS(run_selection(from_rows({{1.0, 0.0}, {0.5, 0.1}}), SelectionConfig{1, 1, 0.5, 3}), InvalidInput);
    const KeySubset neg = run_selection(from_rows({{-1.0, 0.0}, {0.5, 0.1}}), SelectionConfig{1, 1, 0.5, 1});
    CHECK(neg.warnings.size() == 1);
  }
}
