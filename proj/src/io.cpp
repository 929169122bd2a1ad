#include "sparsetrain/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace sparsetrain {

namespace {

const json& field(const json& j, const char* key, const char* what) {
  if (!j.is_object()) throw ParseError(std::string(what) + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string(what) + ": missing \"" + key + "\"");
  return *it;
}

std::vector<double> number_array(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw ParseError(std::string(what) + ": non-numeric entry");
    out.push_back(x.get<double>());
  }
  return out;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + ": expected an array of rows");
  std::vector<std::vector<double>> rows;
  rows.reserve(j.size());
  for (const auto& r : j) rows.push_back(number_array(r, what));
  return Matrix::from_rows(rows);
}

}  // namespace

json tokenset_to_json(const TokenSet& ts) {
  return json{{"modality", std::string(to_string(ts.modality()))},
              {"dim", ts.dim()},
              {"origin_ids", ts.origin_ids()},
              {"tokens", ts.tokens().to_rows()}};
}

TokenSet tokenset_from_json(const json& j) {
  const json& modality = field(j, "modality", "token set");
  const json& dim = field(j, "dim", "token set");
  const json& ids = field(j, "origin_ids", "token set");
  const json& tokens = field(j, "tokens", "token set");
  if (!modality.is_string()) throw ParseError("token set: modality must be a string");
  if (!dim.is_number_unsigned()) throw ParseError("token set: dim must be a non-negative integer");
  if (!ids.is_array()) throw ParseError("token set: origin_ids must be an array");
  std::vector<std::uint64_t> origin_ids;
  for (const auto& id : ids) {
    if (!id.is_number_unsigned()) throw ParseError("token set: origin ids must be non-negative integers");
    origin_ids.push_back(id.get<std::uint64_t>());
  }
  const auto d = dim.get<std::size_t>();
  Matrix m = matrix_from_json(tokens, "token set tokens");
  if (m.rows() == 0) m = Matrix(0, d);
  return TokenSet(parse_modality(modality.get<std::string>()), d, std::move(m), std::move(origin_ids));
}

json maskplan_to_json(const MaskPlan& plan) {
  return json{{"total", plan.total}, {"masked", plan.masked}, {"ratio", plan.ratio}, {"seed", plan.seed}};
}

json merge_result_to_json(const MergeResult& r) {
  json assignment = json::object();
  for (auto [from, to] : r.assignment) assignment[std::to_string(from)] = to;
  return json{{"key_indices", r.key_indices},
              {"assignment", assignment},
              {"compression_ratio", r.compression_ratio},
              {"merged", tokenset_to_json(r.merged)}};
}

AttentionInputs attention_from_json(const json& j, const TokenSet& ts) {
  AttentionInputs inp;
  inp.q = matrix_from_json(field(j, "Q", "attention"), "attention Q");
  inp.k = j.contains("K") ? matrix_from_json(j["K"], "attention K") : ts.tokens();
  inp.v = j.contains("V") ? matrix_from_json(j["V"], "attention V") : ts.tokens();
  return inp;
}

json key_subset_to_json(const KeySubset& subset, const SelectionConfig& cfg) {
  json out{{"indices", subset.indices},
           {"merged_scores", subset.merged_scores},
           {"config",
            {{"epochs", cfg.epochs},
             {"group_size", cfg.group_size},
             {"decay", cfg.decay},
             {"subset_size", cfg.subset_size}}}};
  if (!subset.warnings.empty()) out["warnings"] = subset.warnings;
  return out;
}

LossLog parse_loss_log(const std::string& text) {
  LossLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("loss log line " + std::to_string(line_no) + ": " + e.what());
    }
    const json& epoch = field(rec, "epoch", "loss log record");
    if (!epoch.is_number_integer()) throw ParseError("loss log: epoch must be an integer");
    const int e = epoch.get<int>();
    if (e < -1) throw InvalidInput("loss log: epoch " + std::to_string(e) + " < -1");
    Vector losses = number_array(field(rec, "losses", "loss log record"), "loss log losses");
    if (!log.emplace(e, std::move(losses)).second) {
      throw InvalidInput("loss log: duplicate record for epoch " + std::to_string(e));
    }
  }
  return log;
}

LossOracle loss_log_oracle(const LossLog& log, std::size_t epochs) {
  if (!log.contains(-1)) throw InvalidInput("loss log: missing warm-up record (epoch -1)");
  if (log.size() != epochs + 1) {
    throw InvalidInput("loss log: expected warm-up plus " + std::to_string(epochs) +
                       " epoch records, found " + std::to_string(log.size()));
  }
  for (std::size_t e = 0; e < epochs; ++e) {
    if (!log.contains(static_cast<int>(e))) {
      throw InvalidInput("loss log: missing record for epoch " + std::to_string(e));
    }
  }
  return [&log](int epoch) { return log.at(epoch); };
}

json report_to_json(const ExperimentReport& r, bool include_timing) {
  json epochs = json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"accuracy", e.accuracy},
                      {"mean_loss", e.mean_loss},
                      {"tokens", e.tokens},
                      {"steps", e.steps},
                      {"samples", e.samples}});
  }
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json out{{"label", r.label},
           {"epochs", epochs},
           {"total_tokens", r.total_tokens},
           {"compute_proxy", r.compute_proxy()},
           {"total_steps", r.total_steps},
           {"total_samples", r.total_samples},
           {"final_accuracy", r.final_accuracy},
           {"chance_accuracy", r.chance_accuracy},
           {"subset", r.subset},
           {"planted_hard_recall", opt(r.planted_hard_recall)},
           {"random_control_recall", opt(r.random_control_recall)},
           {"accuracy_ratio", opt(r.accuracy_ratio)},
           {"gain_retention", opt(r.gain_retention)}};
  if (include_timing) out["wall_clock_seconds"] = r.wall_clock_seconds;
  return out;
}

std::string report_to_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "epoch,accuracy,mean_loss,tokens,steps,samples\n";
  for (const auto& e : r.epochs) {
    // json's dump gives the shortest round-trip representation
    out << e.epoch << ',' << json(e.accuracy).dump() << ',' << json(e.mean_loss).dump() << ',' << e.tokens
        << ',' << e.steps << ',' << e.samples << '\n';
  }
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path.string());
  out << contents;
  if (!out) throw ParseError("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

}  // namespace sparsetrain
