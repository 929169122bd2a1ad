#pragma once

// JSON / JSONL / CSV formats for token sets, mask plans, merge results,
// key subsets and experiment reports.

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sparsetrain/masking.hpp"
#include "sparsetrain/merging.hpp"
#include "sparsetrain/selection.hpp"
#include "sparsetrain/simulator.hpp"

namespace sparsetrain {

using json = nlohmann::json;

/// Unreadable file or malformed document (CLI exit code 2).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

json tokenset_to_json(const TokenSet& ts);
/// {"modality", "dim", "origin_ids", "tokens"}. Structural problems raise
/// ParseError; invariant violations (duplicate ids, wrong dim) raise InvalidInput/ShapeError.
TokenSet tokenset_from_json(const json& j);

json maskplan_to_json(const MaskPlan& plan);
/// {"key_indices", "assignment", "compression_ratio", "merged"}
json merge_result_to_json(const MergeResult& r);
/// {"Q": rows, "K": rows, "V": rows}; K and V default to the token embeddings.
AttentionInputs attention_from_json(const json& j, const TokenSet& ts);

json key_subset_to_json(const KeySubset& subset, const SelectionConfig& cfg);

/// Epoch -> loss vector; epoch -1 is the warm-up record.
using LossLog = std::map<int, Vector>;
/// One {"epoch": e, "losses": [...]} object per non-blank line.
LossLog parse_loss_log(const std::string& text);
/// Turns a loss log into an oracle; throws InvalidInput unless it holds
/// exactly the records -1, 0, ..., E-1.
LossOracle loss_log_oracle(const LossLog& log, std::size_t epochs);

json report_to_json(const ExperimentReport& r, bool include_timing);
/// epoch,accuracy,mean_loss,tokens,steps,samples
std::string report_to_csv(const ExperimentReport& r);

std::string read_file(const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);
/// Pretty-printed with a trailing newline; byte-stable for equal inputs.
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace sparsetrain
