#include "splinecggm/io.hpp"

#include <fstream>

namespace scg {

Json matrix_to_json(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(m.size());
  for (long i = 0; i < m.rows(); ++i)
    for (long c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  j["data"] = data;
  return j;
}

Matrix matrix_from_json(const Json& j) {
  long rows = j.at("rows").get<long>();
  long cols = j.at("cols").get<long>();
  auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<long>(data.size()) != rows * cols)
    throw DataError("matrix_from_json: data length mismatch");
  Matrix m(rows, cols);
  long k = 0;
  for (long i = 0; i < rows; ++i)
    for (long c = 0; c < cols; ++c) m(i, c) = data[k++];
  return m;
}

Json vector_to_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const Json& j) {
  auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), data.size());
}

Json cggm_to_json(const CggmModel& model) {
  Json j;
  j["lambda"] = matrix_to_json(model.lambda_mat);
  j["theta"] = matrix_to_json(model.theta_mat);
  j["lambda2"] = model.lambda2;
  j["lambda3"] = model.lambda3;
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  j["kkt_residual"] = model.kkt_residual;
  j["no_progress"] = model.no_progress;
  j["objective_trace"] = model.objective_trace;
  j["degenerate_x_cols"] = model.degenerate_x_cols;
  return j;
}

CggmModel cggm_from_json(const Json& j) {
  CggmModel m;
  m.lambda_mat = matrix_from_json(j.at("lambda"));
  m.theta_mat = matrix_from_json(j.at("theta"));
  m.lambda2 = j.at("lambda2").get<double>();
  m.lambda3 = j.at("lambda3").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<int>();
  m.kkt_residual = j.at("kkt_residual").get<double>();
  m.no_progress = j.value("no_progress", false);
  m.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  m.degenerate_x_cols = j.at("degenerate_x_cols").get<std::vector<int>>();
  m.sigma_mat = chol_inverse(m.lambda_mat);
  return m;
}

Json ssanova_to_json(const SsAnovaModel& model) {
  Json j;
  j["box"] = matrix_to_json(model.config.box);
  j["main_effects"] = model.config.main_effects;
  Json inter = Json::array();
  for (auto [a, b] : model.config.interactions) inter.push_back({a, b});
  j["interactions"] = inter;
  j["theta_v"] = vector_to_json(model.config.theta_v);
  j["representers_unit"] = matrix_to_json(model.representers_unit);
  j["null_coef"] = vector_to_json(model.null_coef);
  j["rep_coef"] = vector_to_json(model.rep_coef);
  j["lambda1"] = model.lambda1;
  j["rho"] = model.rho_kind == RhoKind::Uniform          ? "uniform"
             : model.rho_kind == RhoKind::GaussianProduct ? "gaussian_product"
             : model.rho_kind == RhoKind::MarginalProduct ? "marginal_product"
                                                          : "joint_kde";
  if (model.rho_kind == RhoKind::GaussianProduct) {
    j["rho_mean"] = vector_to_json(model.rho_mean);
    j["rho_sd"] = vector_to_json(model.rho_sd);
    j["rho_log_mass"] = model.rho_log_mass;
  } else if (model.rho_kind == RhoKind::MarginalProduct ||
             model.rho_kind == RhoKind::JointKde) {
    j["rho_points"] = matrix_to_json(model.rho_points);
    j["rho_bandwidth"] = vector_to_json(model.rho_bandwidth);
    j["rho_log_mass"] = model.rho_log_mass;
  }
  j["log_norm"] = model.log_norm;
  j["converged"] = model.converged;
  j["newton_iters"] = model.newton_iters;
  j["grad_norm"] = model.grad_norm;
  j["clamped"] = model.clamped;
  j["seed"] = model.seed;
  Json q;
  q["rule"] = model.quad.rule == QuadratureRule::TensorGaussLegendre ? "tensor_gl" : "monte_carlo";
  q["nodes_per_dim"] = model.quad.nodes_per_dim;
  q["mc_samples"] = model.quad.mc_samples;
  q["mc_seed"] = model.quad.mc_seed;
  j["quadrature"] = q;
  return j;
}

SsAnovaModel ssanova_from_json(const Json& j) {
  SsAnovaModel m;
  m.config.box = matrix_from_json(j.at("box"));
  m.config.main_effects = j.at("main_effects").get<std::vector<int>>();
  for (const auto& pr : j.at("interactions"))
    m.config.interactions.emplace_back(pr.at(0).get<int>(), pr.at(1).get<int>());
  m.config.theta_v = vector_from_json(j.at("theta_v"));
  m.representers_unit = matrix_from_json(j.at("representers_unit"));
  m.null_coef = vector_from_json(j.at("null_coef"));
  m.rep_coef = vector_from_json(j.at("rep_coef"));
  m.lambda1 = j.at("lambda1").get<double>();
  std::string rho = j.value("rho", "uniform");
  if (rho == "gaussian_product") {
    m.rho_kind = RhoKind::GaussianProduct;
    m.rho_mean = vector_from_json(j.at("rho_mean"));
    m.rho_sd = vector_from_json(j.at("rho_sd"));
    m.rho_log_mass = j.at("rho_log_mass").get<double>();
  } else if (rho == "marginal_product" || rho == "joint_kde") {
    m.rho_kind = rho == "joint_kde" ? RhoKind::JointKde : RhoKind::MarginalProduct;
    m.rho_points = matrix_from_json(j.at("rho_points"));
    m.rho_bandwidth = vector_from_json(j.at("rho_bandwidth"));
    m.rho_log_mass = j.at("rho_log_mass").get<double>();
  }
  m.log_norm = j.at("log_norm").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.newton_iters = j.at("newton_iters").get<int>();
  m.grad_norm = j.at("grad_norm").get<double>();
  m.clamped = j.at("clamped").get<bool>();
  m.seed = j.at("seed").get<std::uint64_t>();
  const Json& q = j.at("quadrature");
  if (q.at("rule").get<std::string>() == "tensor_gl") {
    m.quad = make_tensor_quadrature(m.config.box, q.at("nodes_per_dim").get<int>());
  } else {
    m.quad = make_monte_carlo_quadrature(m.config.box, q.at("mc_samples").get<long>(),
                                         q.at("mc_seed").get<std::uint64_t>());
  }
  return m;
}

Json record_to_json(const StandardizeRecord& rec) {
  Json j;
  j["applied_x"] = rec.applied_x;
  j["applied_y"] = rec.applied_y;
  if (rec.applied_x) {
    j["x_mean"] = vector_to_json(rec.x_mean);
    j["x_scale"] = vector_to_json(rec.x_scale);
  }
  if (rec.applied_y) {
    j["y_mean"] = vector_to_json(rec.y_mean);
    j["y_scale"] = vector_to_json(rec.y_scale);
  }
  return j;
}

StandardizeRecord record_from_json(const Json& j) {
  StandardizeRecord rec;
  rec.applied_x = j.at("applied_x").get<bool>();
  rec.applied_y = j.at("applied_y").get<bool>();
  if (rec.applied_x) {
    rec.x_mean = vector_from_json(j.at("x_mean"));
    rec.x_scale = vector_from_json(j.at("x_scale"));
  }
  if (rec.applied_y) {
    rec.y_mean = vector_from_json(j.at("y_mean"));
    rec.y_scale = vector_from_json(j.at("y_scale"));
  }
  return rec;
}

Json bundle_to_json(const ModelBundle& bundle) {
  Json j;
  j["schema_version"] = 1;
  j["column_names"] = bundle.column_names;
  j["d"] = bundle.d();
  j["p"] = bundle.p();
  j["cggm"] = cggm_to_json(bundle.cggm);
  j["ssanova"] = bundle.ssanova ? ssanova_to_json(*bundle.ssanova) : Json(nullptr);
  j["standardize"] = record_to_json(bundle.record);
  j["run_config"] = bundle.run_config;
  return j;
}

ModelBundle bundle_from_json(const Json& j) {
  if (j.value("schema_version", 0) != 1)
    throw DataError("bundle_from_json: unsupported schema_version");
  ModelBundle b;
  b.column_names = j.at("column_names").get<std::vector<std::string>>();
  b.cggm = cggm_from_json(j.at("cggm"));
  if (!j.at("ssanova").is_null()) b.ssanova = ssanova_from_json(j.at("ssanova"));
  b.record = record_from_json(j.at("standardize"));
  b.run_config = j.at("run_config");
  return b;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << contents;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw DataError("malformed JSON in '" + path + "': " + e.what());
  }
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  write_text_file(path, bundle_to_json(bundle).dump(2) + "\n");
}

ModelBundle load_bundle(const std::string& path) {
  return bundle_from_json(load_json_file(path));
}

Json selection_to_json(const SelectionResult& sel) {
  Json j;
  j["criterion"] = sel.criterion == TuneCriterion::Lookl  ? "lookl"
                   : sel.criterion == TuneCriterion::Bic  ? "bic"
                   : sel.criterion == TuneCriterion::Kfold ? "cv"
                                                           : "loocv";
  Json grid = Json::array();
  for (auto [a, b] : sel.grid) grid.push_back({a, b});
  j["grid"] = grid;
  std::vector<double> scores(sel.scores.data(), sel.scores.data() + sel.scores.size());
  j["scores"] = scores;
  j["chosen"] = {sel.chosen.first, sel.chosen.second};
  return j;
}

Json graph_to_json(const GraphEstimate& graph) {
  Json j;
  j["schema_version"] = 1;
  j["d"] = graph.d;
  j["p"] = graph.p;
  j["labels"] = graph.labels;
  const int total = graph.d + graph.p;
  std::vector<int> adj;
  adj.reserve(total * total);
  for (int i = 0; i < total; ++i)
    for (int c = 0; c < total; ++c) adj.push_back(graph.adjacency(i, c));
  j["adjacency"] = adj;
  std::vector<int> pi;
  for (int i = 0; i < graph.d; ++i)
    for (int c = 0; c < graph.d; ++c) pi.push_back(graph.pi(i, c));
  j["pi"] = pi;
  j["weights"] = matrix_to_json(graph.weights);
  return j;
}

void write_graph_json(const GraphEstimate& graph, const std::string& path) {
  write_text_file(path, graph_to_json(graph).dump(2) + "\n");
}

TruthSpec load_truth(const std::string& path) {
  Json j = load_json_file(path);
  TruthSpec t;
  if (j.contains("cggm")) {
    // a saved model bundle doubles as a truth document
    ModelBundle b = bundle_from_json(j);
    t.lambda_true = b.cggm.lambda_mat;
    t.theta_true = b.cggm.theta_mat;
    return t;
  }
  t.lambda_true = matrix_from_json(j.at("lambda"));
  t.theta_true = matrix_from_json(j.at("theta"));
  if (j.contains("adjacency") && !j.at("adjacency").is_null()) {
    Matrix adj = matrix_from_json(j.at("adjacency"));
    t.adjacency = adj.cast<int>();
  }
  if (j.contains("x_second_moment") && !j.at("x_second_moment").is_null())
    t.x_second_moment = matrix_from_json(j.at("x_second_moment"));
  return t;
}

Json truth_to_json(const GroundTruth& truth, const Matrix& x_second_moment) {
  Json j;
  j["schema_version"] = 1;
  j["lambda"] = matrix_to_json(truth.lambda_true);
  j["theta"] = matrix_to_json(truth.theta_true);
  j["omega_full"] = matrix_to_json(truth.omega_full);
  j["adjacency"] = matrix_to_json(truth.adjacency.cast<double>());
  if (x_second_moment.size() > 0)
    j["x_second_moment"] = matrix_to_json(x_second_moment);
  else
    j["x_second_moment"] = nullptr;
  return j;
}

void write_study_csv(const StudySummary& summary, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_study_csv: cannot open '" + path + "'");
  out << "replication,method,metric,value\n";
  out.precision(17);
  for (const auto& row : summary.rows)
    out << row.replication << ',' << row.method << ',' << row.metric << ','
        << row.value << '\n';
}

Json study_summary_to_json(const StudySummary& summary, const Json& config_echo) {
  Json j;
  j["schema_version"] = 1;
  j["config"] = config_echo;
  j["failures"] = summary.failures;
  Json methods = Json::object();
  for (const auto& [key, values] : summary.aggregate) {
    Json& slot = methods[key.first][key.second];
    slot["mean"] = values[0];
    slot["sd"] = values[1];
    slot["n"] = values[2];
  }
  j["methods"] = methods;
  return j;
}

}  // namespace scg
