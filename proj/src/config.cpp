#include "sparsetrain/config.hpp"

#include <cmath>
#include <initializer_list>
#include <string>

namespace sparsetrain {

namespace {

void reject_unknown(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InvalidInput(std::string("config: ") + section + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidInput(std::string("config: unknown key \"") + key + "\" in " + section);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) throw InvalidInput(std::string("config: ") + key + " must be a boolean");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) throw InvalidInput(std::string("config: ") + key + " must be a number");
  } else {
    if (!it->is_number_unsigned()) {
      throw InvalidInput(std::string("config: ") + key + " must be a non-negative integer");
    }
  }
  out = it->get<T>();
}

}  // namespace

PipelineConfig Config::sparse_pipeline() const {
  PipelineConfig p;
  p.mask_schedule = mask_schedule;
  p.mask_ratio = mask_ratio;
  p.merge = merge;
  p.infobatch = prune_ratio > 0.0;
  p.infobatch_cfg = infobatch();
  return p;
}

InfoBatchConfig Config::infobatch() const {
  return InfoBatchConfig{prune_ratio, delta, training.epochs};
}

SelectionConfig Config::selection() const {
  return SelectionConfig{selection_epochs, group_size, decay, resolved_subset_size()};
}

std::size_t Config::resolved_subset_size() const {
  if (subset_size) return *subset_size;
  return std::max<std::size_t>(1, (dataset.n_samples + 2) / 4);
}

void Config::validate() const {
  dataset.validate();
  training.validate();
  sparse_pipeline().validate();
  infobatch().validate();
  selection().validate(dataset.n_samples);
}

Config config_from_json(const json& j) {
  reject_unknown(j, "config", {"seed", "dataset", "mask", "merge", "infobatch", "training", "selection"});
  Config c;
  read(j, "seed", c.seed);
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    reject_unknown(d, "dataset",
                   {"n_samples", "hard_fraction", "tokens_per_sample", "dim", "n_classes",
                    "noise_sigma_easy", "noise_sigma_hard", "signal_easy", "signal_hard", "n_test"});
    read(d, "n_samples", c.dataset.n_samples);
    read(d, "hard_fraction", c.dataset.hard_fraction);
    read(d, "tokens_per_sample", c.dataset.tokens_per_sample);
    read(d, "dim", c.dataset.dim);
    read(d, "n_classes", c.dataset.n_classes);
    read(d, "noise_sigma_easy", c.dataset.noise_sigma_easy);
    read(d, "noise_sigma_hard", c.dataset.noise_sigma_hard);
    read(d, "signal_easy", c.dataset.signal_easy);
    read(d, "signal_hard", c.dataset.signal_hard);
    read(d, "n_test", c.dataset.n_test);
  }
  if (j.contains("mask")) {
    const json& m = j["mask"];
    reject_unknown(m, "mask", {"ratio", "active_epochs"});
    read(m, "ratio", c.mask_ratio);
    read(m, "active_epochs", c.mask_schedule.active_epochs);
  }
  if (j.contains("merge")) {
    const json& m = j["merge"];
    reject_unknown(m, "merge", {"enabled"});
    read(m, "enabled", c.merge);
  }
  if (j.contains("infobatch")) {
    const json& ib = j["infobatch"];
    reject_unknown(ib, "infobatch", {"prune_ratio", "delta"});
    read(ib, "prune_ratio", c.prune_ratio);
    read(ib, "delta", c.delta);
  }
  if (j.contains("training")) {
    const json& t = j["training"];
    reject_unknown(t, "training", {"epochs", "batch_size", "learning_rate"});
    read(t, "epochs", c.training.epochs);
    read(t, "batch_size", c.training.batch_size);
    read(t, "learning_rate", c.training.learning_rate);
  }
  if (j.contains("selection")) {
    const json& s = j["selection"];
    reject_unknown(s, "selection", {"epochs", "group_size", "decay", "subset_size"});
    read(s, "epochs", c.selection_epochs);
    read(s, "group_size", c.group_size);
    read(s, "decay", c.decay);
    if (s.contains("subset_size")) {
      std::size_t n = 0;
      read(s, "subset_size", n);
      c.subset_size = n;
    }
  }
  return c;
}

json config_to_json(const Config& c) {
  return json{
      {"seed", c.seed},
      {"dataset",
       {{"n_samples", c.dataset.n_samples},
        {"hard_fraction", c.dataset.hard_fraction},
        {"tokens_per_sample", c.dataset.tokens_per_sample},
        {"dim", c.dataset.dim},
        {"n_classes", c.dataset.n_classes},
        {"noise_sigma_easy", c.dataset.noise_sigma_easy},
        {"noise_sigma_hard", c.dataset.noise_sigma_hard},
        {"signal_easy", c.dataset.signal_easy},
        {"signal_hard", c.dataset.signal_hard},
        {"n_test", c.dataset.n_test}}},
      {"mask", {{"ratio", c.mask_ratio}, {"active_epochs", c.mask_schedule.active_epochs}}},
      {"merge", {{"enabled", c.merge}}},
      {"infobatch", {{"prune_ratio", c.prune_ratio}, {"delta", c.delta}}},
      {"training",
       {{"epochs", c.training.epochs},
        {"batch_size", c.training.batch_size},
        {"learning_rate", c.training.learning_rate}}},
      {"selection",
       {{"epochs", c.selection_epochs},
        {"group_size", c.group_size},
        {"decay", c.decay},
        {"subset_size", c.resolved_subset_size()}}}};
}

Config load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

}  // namespace sparsetrain
