#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "splinecggm/graph.hpp"
#include "splinecggm/io.hpp"
#include "splinecggm/simulate.hpp"
#include "splinecggm/tuning.hpp"

namespace py = pybind11;
using namespace scg;

namespace {

Dataset make_dataset(const Matrix& x, const Matrix& y,
                     std::vector<std::string> column_names) {
  Dataset data;
  data.x = x;
  data.y = y;
  if (column_names.empty()) {
    for (long j = 0; j < x.cols(); ++j) column_names.push_back("x" + std::to_string(j + 1));
    for (long j = 0; j < y.cols(); ++j) column_names.push_back("y" + std::to_string(j + 1));
  }
  data.column_names = std::move(column_names);
  data.validate();
  return data;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "semiparametric density and graph estimation: smoothing-spline X block "
            "plus a sparse conditional Gaussian Y block";

  py::register_exception<DataError>(m, "DataError");

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("x"), py::arg("y"),
           py::arg("column_names") = std::vector<std::string>{})
      .def_readonly("x", &Dataset::x)
      .def_readonly("y", &Dataset::y)
      .def_readonly("column_names", &Dataset::column_names)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("d", &Dataset::d)
      .def_property_readonly("p", &Dataset::p);

  m.def("load_csv",
        py::overload_cast<const std::string&, const std::vector<std::string>&>(&load_csv),
        py::arg("path"), py::arg("x_columns"));
  m.def("load_csv_count", py::overload_cast<const std::string&, int>(&load_csv),
        py::arg("path"), py::arg("x_count"));

  py::class_<SufficientStats>(m, "SufficientStats")
      .def_readonly("sxx", &SufficientStats::sxx)
      .def_readonly("syy", &SufficientStats::syy)
      .def_readonly("sxy", &SufficientStats::sxy)
      .def_readonly("n", &SufficientStats::n);
  m.def("sufficient_stats", &sufficient_stats);

  py::enum_<StandardizeTarget>(m, "StandardizeTarget")
      .value("X", StandardizeTarget::X)
      .value("Y", StandardizeTarget::Y)
      .value("Both", StandardizeTarget::Both);
  py::class_<StandardizeRecord>(m, "StandardizeRecord")
      .def(py::init<>())
      .def_readonly("x_mean", &StandardizeRecord::x_mean)
      .def_readonly("x_scale", &StandardizeRecord::x_scale)
      .def_readonly("y_mean", &StandardizeRecord::y_mean)
      .def_readonly("y_scale", &StandardizeRecord::y_scale)
      .def_readonly("applied_x", &StandardizeRecord::applied_x)
      .def_readonly("applied_y", &StandardizeRecord::applied_y);
  m.def("standardize", &standardize, py::arg("dataset"), py::arg("which"));
  m.def("normality_rank", &normality_rank, py::arg("dataset"), py::arg("d"));
  m.def("shapiro_wilk", [](const Vector& sample) {
    auto r = shapiro_wilk(sample);
    return py::make_tuple(r.w, r.p_value);
  });

  py::enum_<CggmInit>(m, "CggmInit")
      .value("Auto", CggmInit::Auto)
      .value("IdentityZero", CggmInit::IdentityZero)
      .value("Mle", CggmInit::Mle)
      .value("Warm", CggmInit::Warm);
  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("max_outer_iters", &SolverOptions::max_outer_iters)
      .def_readwrite("max_theta_sweeps", &SolverOptions::max_theta_sweeps)
      .def_readwrite("max_newton_cd_sweeps", &SolverOptions::max_newton_cd_sweeps)
      .def_readwrite("tol_rel_obj", &SolverOptions::tol_rel_obj)
      .def_readwrite("armijo_beta", &SolverOptions::armijo_beta)
      .def_readwrite("armijo_sigma", &SolverOptions::armijo_sigma)
      .def_readwrite("armijo_max_backtracks", &SolverOptions::armijo_max_backtracks)
      .def_readwrite("tol_kkt", &SolverOptions::tol_kkt)
      .def_readwrite("tol_obj_increase", &SolverOptions::tol_obj_increase)
      .def_readwrite("init", &SolverOptions::init)
      .def_readwrite("warm_lambda", &SolverOptions::warm_lambda)
      .def_readwrite("warm_theta", &SolverOptions::warm_theta);

  py::class_<CggmModel>(m, "CggmModel")
      .def_readonly("lambda_mat", &CggmModel::lambda_mat)
      .def_readonly("theta_mat", &CggmModel::theta_mat)
      .def_readonly("sigma_mat", &CggmModel::sigma_mat)
      .def_readonly("lambda2", &CggmModel::lambda2)
      .def_readonly("lambda3", &CggmModel::lambda3)
      .def_readonly("objective_trace", &CggmModel::objective_trace)
      .def_readonly("converged", &CggmModel::converged)
      .def_readonly("iterations", &CggmModel::iterations)
      .def_readonly("kkt_residual", &CggmModel::kkt_residual)
      .def_readonly("degenerate_x_cols", &CggmModel::degenerate_x_cols);

  m.def("fit_cggm", &fit_cggm, py::arg("stats"), py::arg("lambda2"), py::arg("lambda3"),
        py::arg("options") = SolverOptions{});
  m.def("neg_loglik_l2", &neg_loglik_l2);
  m.def("penalized_objective", &penalized_objective);
  m.def("grad_theta", &grad_theta);
  m.def("grad_h_lambda", &grad_h_lambda);
  m.def("soft_threshold", &soft_threshold);
  m.def("kkt_residual", &kkt_residual);

  m.def("lookl_score",
        [](const Dataset& data, const CggmModel& model, bool reduced_index) {
          LookklOptions opts;
          opts.reduced_index = reduced_index;
          return lookl_score(data, model, opts);
        },
        py::arg("dataset"), py::arg("model"), py::arg("reduced_index") = true);
  m.def("loocv_oracle", &loocv_oracle, py::arg("dataset"), py::arg("lambda2"),
        py::arg("lambda3"), py::arg("options") = SolverOptions{});
  m.def("bic_score", &bic_score);
  m.def("kfold_cv_score", &kfold_cv_score, py::arg("dataset"), py::arg("lambda2"),
        py::arg("lambda3"), py::arg("k"), py::arg("seed"),
        py::arg("options") = SolverOptions{});

  py::enum_<TuneCriterion>(m, "TuneCriterion")
      .value("Lookl", TuneCriterion::Lookl)
      .value("Bic", TuneCriterion::Bic)
      .value("Kfold", TuneCriterion::Kfold)
      .value("LoocvOracle", TuneCriterion::LoocvOracle);
  py::class_<GridOptions>(m, "GridOptions")
      .def(py::init<>())
      .def_readwrite("n_lambda2", &GridOptions::n_lambda2)
      .def_readwrite("n_lambda3", &GridOptions::n_lambda3)
      .def_readwrite("lo_frac", &GridOptions::lo_frac)
      .def_readwrite("kfold_k", &GridOptions::kfold_k)
      .def_readwrite("seed", &GridOptions::seed);
  py::class_<SelectionResult>(m, "SelectionResult")
      .def_readonly("grid", &SelectionResult::grid)
      .def_readonly("scores", &SelectionResult::scores)
      .def_readonly("chosen", &SelectionResult::chosen)
      .def_readonly("chosen_index", &SelectionResult::chosen_index);
  m.def("default_grid", &default_grid, py::arg("stats"), py::arg("options") = GridOptions{});
  m.def("grid_select", &grid_select, py::arg("dataset"), py::arg("grid"),
        py::arg("criterion"), py::arg("options") = GridOptions{});

  py::class_<SsAnovaOptions>(m, "SsAnovaOptions")
      .def(py::init<>())
      .def_readwrite("box_margin", &SsAnovaOptions::box_margin)
      .def_readwrite("rep_count", &SsAnovaOptions::rep_count)
      .def_readwrite("quad_nodes_per_dim", &SsAnovaOptions::quad_nodes_per_dim)
      .def_readwrite("with_interactions", &SsAnovaOptions::with_interactions)
      .def_readwrite("theta_rescale", &SsAnovaOptions::theta_rescale)
      .def_readwrite("box", &SsAnovaOptions::box)
      .def_readwrite("seed", &SsAnovaOptions::seed);
  py::class_<SsAnovaModel>(m, "SsAnovaModel")
      .def_readonly("lambda1", &SsAnovaModel::lambda1)
      .def_readonly("representers_unit", &SsAnovaModel::representers_unit)
      .def_readonly("null_coef", &SsAnovaModel::null_coef)
      .def_readonly("rep_coef", &SsAnovaModel::rep_coef)
      .def_readonly("log_norm", &SsAnovaModel::log_norm)
      .def_readonly("converged", &SsAnovaModel::converged)
      .def_property_readonly("box", [](const SsAnovaModel& mm) { return mm.config.box; });
  m.def("fit_logistic_density", &fit_logistic_density, py::arg("x"), py::arg("lambda1"),
        py::arg("options") = SsAnovaOptions{});
  m.def("fit_density_auto", &fit_density_auto, py::arg("x"),
        py::arg("options") = SsAnovaOptions{});
  m.def("select_lambda1",
        [](const Matrix& x, const std::vector<double>& grid, const SsAnovaOptions& opts,
           int folds) {
          auto sel = select_lambda1(x, grid, opts, folds);
          return py::make_tuple(sel.lambda1, sel.grid, sel.cv_risk);
        },
        py::arg("x"), py::arg("grid"), py::arg("options") = SsAnovaOptions{},
        py::arg("folds") = 5);
  m.def("default_lambda1_grid", &default_lambda1_grid, py::arg("n_points") = 13);
  m.def("eval_eta", &eval_eta);
  m.def("eval_density", &eval_density);
  m.def("eval_density_rows", [](const SsAnovaModel& model, const Matrix& x) {
    Vector out(x.rows());
    for (long i = 0; i < x.rows(); ++i) out[i] = eval_density(model, x.row(i));
    return out;
  });

  py::class_<ZetaModel>(m, "ZetaModel")
      .def_readonly("m_hat", &ZetaModel::m_hat)
      .def_readonly("center", &ZetaModel::center)
      .def("zeta_at", &ZetaModel::zeta_at)
      .def("delta_at", &ZetaModel::delta_at);
  py::class_<ProjectionResult>(m, "ProjectionResult")
      .def_readonly("ratio", &ProjectionResult::ratio)
      .def_readonly("residual", &ProjectionResult::residual)
      .def_readonly("denominator", &ProjectionResult::denominator)
      .def_readonly("ridged", &ProjectionResult::ridged);
  py::class_<ForwardSelectResult>(m, "ForwardSelectResult")
      .def_readonly("pi", &ForwardSelectResult::pi)
      .def_readonly("ratio_sequence", &ForwardSelectResult::ratio_sequence)
      .def_readonly("pair_ratios", &ForwardSelectResult::pair_ratios)
      .def_readonly("included", &ForwardSelectResult::included);
  py::class_<GraphEstimate>(m, "GraphEstimate")
      .def_readonly("d", &GraphEstimate::d)
      .def_readonly("p", &GraphEstimate::p)
      .def_readonly("labels", &GraphEstimate::labels)
      .def_readonly("adjacency", &GraphEstimate::adjacency)
      .def_readonly("pi", &GraphEstimate::pi)
      .def_readonly("weights", &GraphEstimate::weights);

  m.def("build_zeta", &build_zeta, py::arg("ssanova"), py::arg("cggm"),
        py::arg("record") = StandardizeRecord{});
  m.def("project", &project, py::arg("zeta"), py::arg("included_pairs"));
  m.def("pairwise_ratios", &pairwise_ratios);
  m.def("forward_select", &forward_select, py::arg("zeta"), py::arg("cutoff") = 0.03,
        py::arg("recompute_ranks") = false);
  m.def("assemble_graph", &assemble_graph, py::arg("cggm"), py::arg("pi"),
        py::arg("labels") = std::vector<std::string>{}, py::arg("pair_ratios") = Matrix{});
  m.def("write_edge_tsv", &write_edge_tsv);
  m.def("write_dot", &write_dot);

  py::class_<SimulationConfig>(m, "SimulationConfig")
      .def(py::init<>())
      .def_readwrite("n", &SimulationConfig::n)
      .def_readwrite("d", &SimulationConfig::d)
      .def_readwrite("p", &SimulationConfig::p)
      .def_readwrite("omega", &SimulationConfig::omega)
      .def_readwrite("sigma", &SimulationConfig::sigma)
      .def_readwrite("mu1", &SimulationConfig::mu1)
      .def_readwrite("mu2", &SimulationConfig::mu2)
      .def_readwrite("pure_gaussian", &SimulationConfig::pure_gaussian)
      .def_readwrite("edge_prob", &SimulationConfig::edge_prob)
      .def_readwrite("seed", &SimulationConfig::seed);
  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("omega_full", &GroundTruth::omega_full)
      .def_readonly("theta_true", &GroundTruth::theta_true)
      .def_readonly("lambda_true", &GroundTruth::lambda_true)
      .def_readonly("adjacency", &GroundTruth::adjacency);

  m.def("gen_mixture_x", [](const SimulationConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    return gen_mixture_x(cfg, rng);
  });
  m.def("gen_sparse_precision", [](int dim, int d, double edge_prob, std::uint64_t seed) {
    Rng rng(seed);
    return gen_sparse_precision(dim, d, edge_prob, rng);
  });
  m.def("sample_y_given_x", [](const Matrix& x, const Matrix& theta, const Matrix& lambda,
                               std::uint64_t seed) {
    Rng rng(seed);
    return sample_y_given_x(x, theta, lambda, rng);
  });
  m.def("skl_conditional_explicit", &skl_conditional_explicit);
  m.def("kl_cond_empirical", &kl_cond_empirical);
}
