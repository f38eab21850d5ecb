#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dagnet/dag.hpp"
#include "dagnet/invariant.hpp"
#include "dagnet/net.hpp"
#include "dagnet/singularity.hpp"
#include "dagnet/trainer.hpp"

namespace dagnet {

inline constexpr const char* kToolVersion = "0.1.0";

// ---- graph json ----
// {"nodes":[{"id":0,"role":"input"},...],"edges":[{"id":0,"src":0,"dst":2},...]}
// Strict: unknown keys rejected, ids must be unique and dense.
Dag dag_from_json(const std::string& text);
std::string dag_to_json(const Dag& dag);

// ---- parameters json: {"<edge-id>": weight, ...}, exactly one entry per edge
Parameters params_from_json(const std::string& text, const Dag& dag);
std::string params_to_json(const Dag& dag, const Parameters& theta);

// ---- balance json: {"<hidden-node-id>": value, ...}, exactly the hidden set
BalanceVector balance_from_json(const std::string& text, const Dag& dag);
std::string balance_to_json(const Dag& dag, const BalanceVector& c);

// ---- dataset csv ----
// Header names input columns x<node-id> and target columns y<node-id>.
// With bias_added the virtual input column is appended as constant 1.
Dataset dataset_from_csv(const std::string& text, const Dag& dag, bool bias_added = false);
std::string dataset_to_csv(const Dag& dag, const Dataset& data, bool bias_added = false);

// ---- reports ----
std::string connectedness_report_to_json(const ConnectednessReport& report,
                                         const std::vector<std::vector<NodeId>>* zero_sum = nullptr,
                                         const double* construct_residual = nullptr);
std::string singularity_report_to_json(const SingularityReport& report);

// ---- train record ----
// Wide CSV (one row per snapshot, 17 significant digits) plus a long format
// (step,series,key,value) for plotting tools.
std::string record_to_csv(const TrainRecord& record);
std::string record_to_long_csv(const TrainRecord& record);
std::string record_to_json(const TrainRecord& record);

std::string null_model_to_csv(const std::vector<std::pair<int, double>>& tail);
std::string prune_curve_to_csv(const std::vector<std::pair<int, double>>& curve);

// ---- files ----
std::string read_text_file(const std::string& path);
// Writes to a sibling temp file and renames into place.
void write_text_atomic(const std::string& path, const std::string& content);

std::uint64_t fnv1a64(const std::string& bytes);

struct ManifestInput {
    std::string path;
    std::uint64_t content_hash;
};

std::string manifest_to_json(const std::string& command,
                             const std::vector<ManifestInput>& inputs,
                             const std::string& config_json,
                             const std::vector<std::string>& outputs);

// 17-significant-digit decimal, stable across runs.
std::string format_double(double v);

}  // namespace dagnet
