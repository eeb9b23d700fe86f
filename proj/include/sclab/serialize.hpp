#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sclab/funclass.hpp"
#include "sclab/objective.hpp"
#include "sclab/posgraph.hpp"
#include "sclab/septest.hpp"
#include "sclab/spectral.hpp"
#include "sclab/synthdata.hpp"

namespace sclab {

using Json = nlohmann::json;

/// {"d", "vertices", "joint": dense rows or {"n", "triplets": [[i, j, w]]}, "marginal"}.
/// Doubles are written in shortest round-trip form, so reading back is exact.
Json graph_to_json(const PositivePairGraph& graph);
/// The stored marginal is checked against the joint's row sums.
PositivePairGraph graph_from_json(const Json& j);

/// Graph format plus "labels", "num_classes", "groups", "num_groups".
Json labeled_graph_to_json(const LabeledGraph& data);
LabeledGraph labeled_graph_from_json(const Json& j);

/// {"class", "shape": {...}, "params": [...], "construction_path"}.
Json model_to_json(const RepresentationModel& model);
RepresentationModel model_from_json(const Json& j);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

std::string spectrum_csv(const SpectralDecomposition& spec);
std::string eigenfunctions_csv(const SpectralDecomposition& spec);
std::string loss_trace_csv(const std::vector<LossReport>& trace);
std::string br_report_csv(const SeparabilityReport& report);
std::string br_summary_csv(const SeparabilityReport& report);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Parse errors become ConfigError with line and column.
Json parse_json(const std::string& text, const std::string& origin);

}  // namespace sclab
