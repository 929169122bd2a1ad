#include "sparsetrain/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "sparsetrain/config.hpp"
#include "sparsetrain/experiment.hpp"
#include "sparsetrain/io.hpp"

namespace sparsetrain {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  // mask
  std::string input;
  std::optional<double> ratio;
  // merge
  std::string tokens;
  std::string attention;
  // select / simulate
  std::string log;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> subset_size;
  bool timing = false;
};

struct LoadedConfig {
  Config config;
  json raw = json::object();
};

LoadedConfig load(const Options& o) {
  LoadedConfig lc;
  if (!o.config_path.empty()) {
    lc.raw = read_json_file(o.config_path);
    lc.config = config_from_json(lc.raw);
  }
  if (o.seed) lc.config.seed = *o.seed;
  return lc;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ParseError("cannot create output directory " + dir.string() + ": " + ec.message());
}

int cmd_mask(const Options& o, std::ostream& out) {
  LoadedConfig lc = load(o);
  const double ratio = o.ratio.value_or(lc.config.mask_ratio);
  const TokenSet ts = tokenset_from_json(read_json_file(o.input));
  if (ts.empty()) throw InvalidInput("mask: token set is empty");
  SeededRng rng(lc.config.seed);
  const MaskPlan plan = plan_mask(ts.size(), ratio, rng);
  const TokenSet masked = apply_mask(ts, plan);
  ensure_dir(o.out);
  write_json_file(fs::path(o.out) / "tokens.json", tokenset_to_json(masked));
  write_json_file(fs::path(o.out) / "plan.json", maskplan_to_json(plan));
  out << "masked " << plan.masked.size() << " of " << plan.total << " tokens\n";
  return kExitOk;
}

int cmd_merge(const Options& o, std::ostream& out) {
  const TokenSet ts = tokenset_from_json(read_json_file(o.tokens));
  if (ts.empty()) throw InvalidInput("merge: token set is empty");
  const AttentionInputs inp = attention_from_json(read_json_file(o.attention), ts);
  const MergeResult r = prumerge(ts, inp);
  ensure_dir(o.out);
  write_json_file(fs::path(o.out) / "merge.json", merge_result_to_json(r));
  write_json_file(fs::path(o.out) / "tokens.json", tokenset_to_json(r.merged));
  out << "kept " << r.key_indices.size() << " of " << ts.size() << " tokens (ratio "
      << r.compression_ratio << ")\n";
  return kExitOk;
}

int cmd_select(const Options& o, std::ostream& out) {
  LoadedConfig lc = load(o);
  const LossLog log = parse_loss_log(read_file(o.log));
  if (!log.contains(-1)) throw InvalidInput("loss log: missing warm-up record (epoch -1)");
  const std::size_t n_samples = log.at(-1).size();

  SelectionConfig cfg = lc.config.selection();
  const bool epochs_given = o.epochs || (lc.raw.contains("selection") && lc.raw["selection"].contains("epochs"));
  cfg.epochs = o.epochs ? *o.epochs : epochs_given ? lc.config.selection_epochs : log.size() - 1;
  if (o.subset_size) {
    cfg.subset_size = *o.subset_size;
  } else if (!lc.config.subset_size) {
    cfg.subset_size = std::max<std::size_t>(1, (n_samples + 2) / 4);
  }
  cfg.validate(n_samples);

  const KeySubset subset = run_selection(loss_log_oracle(log, cfg.epochs), cfg);
  if (fs::path(o.out).has_parent_path()) ensure_dir(fs::path(o.out).parent_path());
  write_json_file(o.out, key_subset_to_json(subset, cfg));
  for (const auto& w : subset.warnings) out << "warning: " << w << "\n";
  out << "selected " << subset.indices.size() << " of " << n_samples << " samples\n";
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  LoadedConfig lc = load(o);
  Config& cfg = lc.config;
  if (o.epochs) cfg.training.epochs = *o.epochs;
  if (o.subset_size) cfg.subset_size = *o.subset_size;
  cfg.validate();

  const SimulationOutputs sim = run_simulation(cfg);
  const fs::path dir(o.out);
  ensure_dir(dir);
  const json resolved = config_to_json(cfg);
  const auto emit = [&](const ExperimentReport& r) {
    json j = report_to_json(r, o.timing);
    j["config"] = resolved;
    write_json_file(dir / (r.label + ".json"), j);
    write_file(dir / (r.label + ".csv"), report_to_csv(r));
  };
  emit(sim.dense);
  emit(sim.sparse);
  emit(sim.full);
  emit(sim.subset);
  json ks = key_subset_to_json(sim.key_subset, cfg.selection());
  ks["seed"] = cfg.seed;
  write_json_file(dir / "key_subset.json", ks);

  const double reduction = 1.0 - static_cast<double>(sim.sparse.compute_proxy()) /
                                     static_cast<double>(sim.dense.compute_proxy());
  out << "dense  proxy " << sim.dense.compute_proxy() << "  acc " << sim.dense.final_accuracy << "\n"
      << "sparse proxy " << sim.sparse.compute_proxy() << "  acc " << sim.sparse.final_accuracy
      << "  (reduction " << reduction * 100.0 << "%)\n"
      << "subset acc " << sim.subset.final_accuracy << " vs full " << sim.full.final_accuracy << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse-training toolkit: token masking, token merging, key-subset selection", "sparsetrain"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Seed (overrides the config)");
  };

  CLI::App* mask = app.add_subcommand("mask", "Randomly drop a fraction of tokens");
  common(mask);
  mask->add_option("--input", o.input, "TokenSet JSON")->required();
  mask->add_option("--ratio", o.ratio, "Masking ratio in [0, 1]");
  mask->add_option("--out", o.out, "Output directory")->required();

  CLI::App* merge = app.add_subcommand("merge", "Attention-guided token merging");
  merge->add_option("--tokens", o.tokens, "TokenSet JSON")->required();
  merge->add_option("--attention", o.attention, "JSON with Q (and optionally K, V)")->required();
  merge->add_option("--out", o.out, "Output directory")->required();

  CLI::App* select = app.add_subcommand("select", "Key-subset selection from a loss log");
  common(select);
  select->add_option("--log", o.log, "Loss log (JSON Lines)")->required();
  select->add_option("--epochs", o.epochs, "Epoch count E");
  select->add_option("--subset-size", o.subset_size, "Key-subset size n");
  select->add_option("--out", o.out, "Output JSON file")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "Paired synthetic training experiments");
  common(simulate);
  simulate->add_option("--epochs", o.epochs, "Training epochs");
  simulate->add_option("--subset-size", o.subset_size, "Key-subset size");
  simulate->add_option("--out", o.out, "Output directory")->required();
  simulate->add_flag("--timing", o.timing, "Include wall-clock seconds in reports");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }

  try {
    if (mask->parsed()) return cmd_mask(o, out);
    if (merge->parsed()) return cmd_merge(o, out);
    if (select->parsed()) return cmd_select(o, out);
    return cmd_simulate(o, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace sparsetrain
