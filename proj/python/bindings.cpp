#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "sparsetrain/experiment.hpp"
#include "sparsetrain/io.hpp"
#include "sparsetrain/merging.hpp"
#include "sparsetrain/selection.hpp"

namespace py = pybind11;
using namespace sparsetrain;

namespace {

using Rows = std::vector<Vector>;

py::dict merge_result(const Rows& tokens, const Rows& q, const std::optional<Rows>& k,
                      const std::optional<Rows>& v) {
  const Matrix emb = Matrix::from_rows(tokens);
  const AttentionInputs inp{Matrix::from_rows(q), k ? Matrix::from_rows(*k) : emb, v ? Matrix::from_rows(*v) : emb};
  const MergeResult r = prumerge(TokenSet(Modality::visual, emb), inp);
  py::dict out;
  out["key_indices"] = r.key_indices;
  out["assignment"] = r.assignment;
  out["merged"] = r.merged.tokens().to_rows();
  out["compression_ratio"] = r.compression_ratio;
  return out;
}

py::dict selection(const Rows& losses, std::size_t epochs, std::size_t group_size, double decay,
                   std::size_t subset_size) {
  const SelectionConfig cfg{epochs, group_size, decay, subset_size};
  const KeySubset ks = run_selection(
      [&losses](int epoch) {
        const auto row = static_cast<std::size_t>(epoch + 1);
        if (row >= losses.size()) throw InvalidInput("no losses for epoch " + std::to_string(epoch));
        return losses[row];
      },
      cfg);
  py::dict out;
  out["indices"] = ks.indices;
  out["merged_scores"] = ks.merged_scores;
  out["warnings"] = ks.warnings;
  return out;
}

std::string simulate_json(const std::string& config_json) {
  const Config cfg = config_from_json(json::parse(config_json));
  const SimulationOutputs sim = run_simulation(cfg);
  json out;
  out["dense"] = report_to_json(sim.dense, false);
  out["sparse"] = report_to_json(sim.sparse, false);
  out["full"] = report_to_json(sim.full, false);
  out["subset"] = report_to_json(sim.subset, false);
  out["key_subset"] = key_subset_to_json(sim.key_subset, cfg.selection());
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Token masking, token merging and key-subset selection";

  m.def("softmax", [](const Vector& v) { return softmax(v); }, py::arg("values"));
  m.def(
      "quartiles",
      [](const Vector& v) {
        const Quartiles q = quartiles(v);
        return py::make_tuple(q.q1, q.q2, q.q3);
      },
      py::arg("values"));
  m.def("argsort_desc", [](const Vector& v) { return argsort_desc(v); }, py::arg("values"));

  m.def(
      "plan_mask",
      [](std::size_t total, double ratio, std::uint64_t seed) {
        SeededRng rng(seed);
        return plan_mask(total, ratio, rng).masked;
      },
      py::arg("total"), py::arg("ratio"), py::arg("seed"), "Indices removed by a random mask.");

  m.def("prumerge", &merge_result, py::arg("tokens"), py::arg("q"), py::arg("k") = py::none(),
        py::arg("v") = py::none(), "Attention-guided token merging. K and V default to the tokens.");

  m.def("run_selection", &selection, py::arg("losses"), py::arg("epochs"), py::arg("group_size") = 3,
        py::arg("decay") = 0.618, py::arg("subset_size") = 1,
        "Key-subset selection. losses[0] is the warm-up pass, losses[e + 1] epoch e.");

  m.def(
      "infobatch_step",
      [](const Vector& losses, double prune_ratio, double delta, std::size_t total_epochs, std::size_t epoch,
         std::uint64_t seed) {
        SeededRng rng(seed);
        const PruneDecision d = infobatch_step(losses, InfoBatchConfig{prune_ratio, delta, total_epochs}, epoch, rng);
        return py::make_tuple(d.kept, d.factors);
      },
      py::arg("losses"), py::arg("prune_ratio") = 0.5, py::arg("delta") = 0.875, py::arg("total_epochs") = 15,
      py::arg("epoch") = 0, py::arg("seed") = 0);

  m.def("_simulate_json", &simulate_json, py::arg("config_json"));
}
