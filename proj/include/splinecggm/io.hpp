#pragma once

#include <json.hpp>

#include <optional>
#include <string>

#include "splinecggm/graph.hpp"
#include "splinecggm/simulate.hpp"
#include "splinecggm/tuning.hpp"

namespace scg {

using Json = nlohmann::ordered_json;

// Everything a fit produces, persisted as one JSON document.
struct ModelBundle {
  CggmModel cggm;
  std::optional<SsAnovaModel> ssanova;
  StandardizeRecord record;
  std::vector<std::string> column_names;
  Json run_config;  // CLI flags echoed for reproducibility

  int d() const { return cggm.d(); }
  int p() const { return cggm.p(); }
};

Json matrix_to_json(const Matrix& m);    // {"rows", "cols", "data" row-major}
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json cggm_to_json(const CggmModel& model);
CggmModel cggm_from_json(const Json& j);

Json ssanova_to_json(const SsAnovaModel& model);
SsAnovaModel ssanova_from_json(const Json& j);

Json record_to_json(const StandardizeRecord& rec);
StandardizeRecord record_from_json(const Json& j);

Json bundle_to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const Json& j);
void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

Json selection_to_json(const SelectionResult& sel);
Json graph_to_json(const GraphEstimate& graph);
void write_graph_json(const GraphEstimate& graph, const std::string& path);

// Ground truth for evaluation: lambda/theta, optional adjacency and X second
// moment. Accepts either a truth document or a saved model bundle.
struct TruthSpec {
  Matrix lambda_true;
  Matrix theta_true;
  std::optional<IntMatrix> adjacency;
  std::optional<Matrix> x_second_moment;
};
TruthSpec load_truth(const std::string& path);
Json truth_to_json(const GroundTruth& truth, const Matrix& x_second_moment);

void write_study_csv(const StudySummary& summary, const std::string& path);
Json study_summary_to_json(const StudySummary& summary, const Json& config_echo);

void write_text_file(const std::string& path, const std::string& contents);
Json load_json_file(const std::string& path);

}  // namespace scg
