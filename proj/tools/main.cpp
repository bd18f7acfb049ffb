// command line front end: fit / graph / simulate / eval

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "splinecggm/io.hpp"

namespace fs = std::filesystem;
using namespace scg;

namespace {

Json flags_echo(const std::vector<std::pair<std::string, std::string>>& kv) {
  Json j = Json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

StandardizeTarget parse_standardize(const std::string& s, bool& enabled) {
  enabled = true;
  if (s == "x") return StandardizeTarget::X;
  if (s == "y") return StandardizeTarget::Y;
  if (s == "both") return StandardizeTarget::Both;
  enabled = false;
  return StandardizeTarget::Both;
}

struct FitArgs {
  std::string data_path;
  std::vector<std::string> x_cols;
  int x_count = -1;
  int x_auto = -1;
  double lambda1 = -1.0;
  double lambda2 = -1.0;
  double lambda3 = -1.0;
  std::string tune = "cv";
  std::string standardize_mode = "none";
  std::string rho = "uniform";
  std::uint64_t seed = 0;
  std::string out_path = "model.json";
  int grid_per_axis = 10;
  int kfold_k = 5;
  bool no_theta_rescale = false;
  int threads = 1;
};

RhoKind parse_rho(const std::string& s) {
  if (s == "uniform") return RhoKind::Uniform;
  if (s == "gaussian") return RhoKind::GaussianProduct;
  if (s == "marginal") return RhoKind::MarginalProduct;
  return RhoKind::JointKde;
}

int run_fit(const FitArgs& args) {
  Dataset data;
  if (args.x_auto >= 0) {
    Dataset all = load_csv(args.data_path, 0);
    auto ranked = normality_rank(all, args.x_auto);
    std::vector<std::string> names;
    for (int idx : ranked) names.push_back(all.column_names[idx]);
    data = load_csv(args.data_path, names);
    std::cout << "selected X columns by normality rank:";
    for (const auto& n : names) std::cout << ' ' << n;
    std::cout << '\n';
  } else if (args.x_count >= 0) {
    data = load_csv(args.data_path, args.x_count);
  } else {
    data = load_csv(args.data_path, args.x_cols);
  }

  ModelBundle bundle;
  bundle.column_names = data.column_names;

  bool do_standardize = false;
  StandardizeTarget target = parse_standardize(args.standardize_mode, do_standardize);
  if (do_standardize) {
    auto [std_data, rec] = standardize(data, target);
    data = std_data;
    bundle.record = rec;
  }

  if (data.d() > 0) {
    SsAnovaOptions ss_opts;
    ss_opts.seed = derive_stream(args.seed, 1);
    ss_opts.theta_rescale = !args.no_theta_rescale;
    ss_opts.rho = parse_rho(args.rho);
    SsAnovaModel eta;
    if (args.lambda1 > 0) {
      eta = fit_logistic_density(data.x, args.lambda1, ss_opts);
    } else {
      eta = fit_density_auto(data.x, ss_opts);
    }
    std::cout << "ssanova: lambda1=" << eta.lambda1 << " newton_iters=" << eta.newton_iters
              << (eta.converged ? " converged" : " NOT converged") << '\n';
    bundle.ssanova = eta;
  }

  SufficientStats stats = sufficient_stats(data);
  double lam2 = args.lambda2, lam3 = args.lambda3;
  Json selection_echo = nullptr;
  GridOptions gopts;
  gopts.n_lambda2 = args.grid_per_axis;
  gopts.n_lambda3 = data.d() > 0 ? args.grid_per_axis : 1;
  gopts.kfold_k = args.kfold_k;
  gopts.seed = derive_stream(args.seed, 2);
  if (lam2 < 0 || lam3 < 0) {
    TuneCriterion crit = args.tune == "lookl" ? TuneCriterion::Lookl
                         : args.tune == "bic" ? TuneCriterion::Bic
                                              : TuneCriterion::Kfold;
    auto grid = default_grid(stats, gopts);
    SelectionResult sel = grid_select(data, grid, crit, gopts);
    lam2 = sel.chosen.first;
    lam3 = sel.chosen.second;
    selection_echo = selection_to_json(sel);
    std::cout << "selection (" << args.tune << "):\n";
    std::cout << "  lambda2      lambda3      score\n";
    for (std::size_t g = 0; g < sel.grid.size(); ++g) {
      std::cout << "  " << sel.grid[g].first << '\t' << sel.grid[g].second << '\t'
                << sel.scores(0, g) << (static_cast<int>(g) == sel.chosen_index ? "  *" : "")
                << '\n';
    }
  }
  bundle.cggm = fit_cggm(stats, lam2, lam3, gopts.solver);
  std::cout << "cggm: lambda2=" << lam2 << " lambda3=" << lam3
            << " iterations=" << bundle.cggm.iterations
            << " kkt=" << bundle.cggm.kkt_residual
            << (bundle.cggm.converged ? " converged" : " NOT converged") << '\n';

  std::string joined_cols;
  for (const auto& c : args.x_cols) joined_cols += (joined_cols.empty() ? "" : ",") + c;
  bundle.run_config = flags_echo({{"command", "fit"},
                                  {"data", args.data_path},
                                  {"x_cols", joined_cols},
                                  {"x_count", std::to_string(args.x_count)},
                                  {"x_auto", std::to_string(args.x_auto)},
                                  {"lambda1", std::to_string(args.lambda1)},
                                  {"lambda2", std::to_string(args.lambda2)},
                                  {"lambda3", std::to_string(args.lambda3)},
                                  {"tune", args.tune},
                                  {"standardize", args.standardize_mode},
                                  {"rho", args.rho},
                                  {"seed", std::to_string(args.seed)},
                                  {"grid", std::to_string(args.grid_per_axis)},
                                  {"kfold", std::to_string(args.kfold_k)},
                                  {"theta_rescale", args.no_theta_rescale ? "0" : "1"}});
  bundle.run_config["selection"] = selection_echo;
  save_bundle(bundle, args.out_path);
  std::cout << "wrote " << args.out_path << '\n';
  return 0;
}

struct GraphArgs {
  std::string model_path;
  double cutoff = 0.03;
  bool recompute_ranks = false;
  std::string out_dir = ".";
};

int run_graph(const GraphArgs& args) {
  ModelBundle bundle = load_bundle(args.model_path);
  IntMatrix pi = IntMatrix::Zero(bundle.d(), bundle.d());
  Matrix ratios;
  if (bundle.ssanova && bundle.d() >= 2) {
    ZetaModel zeta = build_zeta(*bundle.ssanova, bundle.cggm, bundle.record);
    ForwardSelectResult sel = forward_select(zeta, args.cutoff, args.recompute_ranks);
    pi = sel.pi;
    ratios = sel.pair_ratios;
    std::cout << "projection ratios per step:";
    for (double r : sel.ratio_sequence) std::cout << ' ' << r;
    std::cout << '\n';
  }
  GraphEstimate graph = assemble_graph(bundle.cggm, pi, bundle.column_names, ratios);

  fs::create_directories(args.out_dir);
  write_edge_tsv(graph, (fs::path(args.out_dir) / "edges.tsv").string());
  write_dot(graph, (fs::path(args.out_dir) / "graph.dot").string());
  write_graph_json(graph, (fs::path(args.out_dir) / "graph.json").string());

  long edges = 0;
  for (int i = 0; i < graph.d + graph.p; ++i)
    for (int j = i + 1; j < graph.d + graph.p; ++j)
      if (graph.adjacency(i, j)) ++edges;
  std::cout << "graph: " << edges << " edges -> " << args.out_dir
            << "/{edges.tsv, graph.dot, graph.json}\n";
  return 0;
}

struct SimArgs {
  std::string preset = "table1";
  double sigma = -1.0;
  double omega = -1.0;
  int n = -1;
  int p = -1;
  int d = -1;
  double edge_prob = 0.2;
  int reps = 10;
  std::uint64_t seed = 0;
  std::string out_dir = "study";
  int grid_per_axis = 6;
  int threads = 1;
  std::vector<std::string> methods = {"cv", "bic", "mle", "single"};
};

int run_simulate(const SimArgs& args) {
  SimulationConfig cfg;
  cfg.n = 200;
  cfg.d = 3;
  cfg.p = 25;
  cfg.edge_prob = args.edge_prob;
  if (args.preset == "table2") {
    cfg.pure_gaussian = true;
  } else if (args.preset == "table1") {
    cfg.sigma = 0.5;
    cfg.omega = 0.9;
  } else {
    throw DataError("unknown preset '" + args.preset + "' (use table1 or table2)");
  }
  if (args.sigma > 0) cfg.sigma = args.sigma;
  if (args.omega >= 0) cfg.omega = args.omega;
  if (args.n > 0) cfg.n = args.n;
  if (args.p > 0) cfg.p = args.p;
  if (args.d >= 0) cfg.d = args.d;
  cfg.seed = args.seed;
  cfg.fill_defaults();

  std::vector<StudyMethod> methods;
  for (const auto& m : args.methods) {
    if (m == "cv") methods.push_back(StudyMethod::CsscggCv);
    else if (m == "bic") methods.push_back(StudyMethod::CsscggBic);
    else if (m == "lookl") methods.push_back(StudyMethod::CsscggLookl);
    else if (m == "mle") methods.push_back(StudyMethod::MleBaseline);
    else if (m == "single") methods.push_back(StudyMethod::SinglePenaltyBic);
    else throw DataError("unknown method '" + m + "'");
  }

  StudyOptions opts;
  opts.grid_per_axis = args.grid_per_axis;
  opts.threads = args.threads;
  opts.density_metrics = !cfg.pure_gaussian;

  // stream rows as replications finish so an interrupted run keeps a usable
  // prefix of the study
  fs::create_directories(args.out_dir);
  std::ofstream csv((fs::path(args.out_dir) / "replications.csv").string(),
                    std::ios::binary);
  if (!csv) throw DataError("simulate: cannot open the output CSV");
  csv << "replication,method,metric,value\n";
  csv.precision(17);
  csv.flush();
  opts.on_replication = [&csv](int, const std::vector<StudyRow>& rows) {
    for (const auto& row : rows)
      csv << row.replication << ',' << row.method << ',' << row.metric << ','
          << row.value << '\n';
    csv.flush();
  };
  StudySummary summary = run_replication_study(cfg, methods, args.reps, args.seed, opts);
  csv.close();
  Json echo = flags_echo({{"preset", args.preset},
                          {"sigma", std::to_string(cfg.sigma)},
                          {"omega", std::to_string(cfg.omega)},
                          {"n", std::to_string(cfg.n)},
                          {"p", std::to_string(cfg.p)},
                          {"d", std::to_string(cfg.d)},
                          {"edge_prob", std::to_string(cfg.edge_prob)},
                          {"reps", std::to_string(args.reps)},
                          {"seed", std::to_string(args.seed)}});
  write_text_file((fs::path(args.out_dir) / "summary.json").string(),
                  study_summary_to_json(summary, echo).dump(2) + "\n");
  std::cout << "study: " << summary.rows.size() << " rows, " << summary.failures
            << " failed replications -> " << args.out_dir
            << "/{replications.csv, summary.json}\n";
  for (const auto& [key, agg] : summary.aggregate)
    std::cout << "  " << key.first << " " << key.second << ": mean=" << agg[0]
              << " sd=" << agg[1] << " n=" << agg[2] << '\n';
  return 0;
}

struct EvalArgs {
  std::string model_path;
  std::string truth_path;
  std::string data_path;
  std::string out_path;
};

int run_eval(const EvalArgs& args) {
  if (args.truth_path.empty() && args.data_path.empty())
    throw DataError("eval needs --truth and/or --data");
  ModelBundle bundle = load_bundle(args.model_path);
  Json report;
  report["schema_version"] = 1;

  if (!args.truth_path.empty()) {
    TruthSpec truth = load_truth(args.truth_path);
    if (truth.lambda_true.rows() != bundle.p() || truth.theta_true.rows() != bundle.d())
      throw DataError("eval: truth dimensions do not match the model");

    Matrix m_fhat;
    if (bundle.ssanova) {
      // second moment of the fitted X density by quadrature
      const auto& model = *bundle.ssanova;
      const int d = bundle.d();
      m_fhat = Matrix::Zero(d, d);
      for (long i = 0; i < model.quad.size(); ++i) {
        Vector xo = model.quad.to_original(model.quad.nodes.row(i));
        m_fhat += model.quad.weights[i] * model.quad.volume() *
                  eval_density(model, xo) * xo * xo.transpose();
      }
    } else {
      m_fhat = Matrix::Identity(bundle.d(), bundle.d());
    }
    Matrix m_f0 = truth.x_second_moment ? *truth.x_second_moment : m_fhat;
    double skl = skl_conditional_explicit(truth.theta_true, truth.lambda_true,
                                          bundle.cggm.theta_mat, bundle.cggm.lambda_mat,
                                          m_f0, m_fhat);
    report["skl_cond"] = skl;

    // graph recovery when a truth adjacency is available (an adjacency is
    // derived from a model bundle's own supports when truth is a bundle)
    IntMatrix truth_adj;
    bool have_truth_adj = false;
    if (truth.adjacency) {
      truth_adj = *truth.adjacency;
      have_truth_adj = true;
    } else {
      Json tj = load_json_file(args.truth_path);
      if (tj.contains("cggm")) {
        ModelBundle tb = bundle_from_json(tj);
        IntMatrix tpi = IntMatrix::Zero(tb.d(), tb.d());
        if (tb.ssanova && tb.d() >= 2) {
          ZetaModel zeta = build_zeta(*tb.ssanova, tb.cggm, tb.record);
          tpi = forward_select(zeta).pi;
        }
        truth_adj =
            assemble_graph(tb.cggm, tpi, tb.column_names).adjacency;
        have_truth_adj = true;
      }
    }
    if (have_truth_adj) {
      IntMatrix pi = IntMatrix::Zero(bundle.d(), bundle.d());
      if (bundle.ssanova && bundle.d() >= 2) {
        ZetaModel zeta = build_zeta(*bundle.ssanova, bundle.cggm, bundle.record);
        pi = forward_select(zeta).pi;
      }
      GraphEstimate est = assemble_graph(bundle.cggm, pi, bundle.column_names);
      MetricsReport mr = confusion_metrics(est, truth_adj);
      auto block = [](const ConfusionMetrics& c) {
        Json b;
        b["spe"] = c.specificity;
        b["sen"] = c.sensitivity;
        b["f1"] = c.f1;
        return b;
      };
      report["confusion"]["xx"] = block(mr.xx);
      report["confusion"]["xy"] = block(mr.xy);
      report["confusion"]["yy"] = block(mr.yy);
      report["confusion"]["overall"] = block(mr.overall);
    }
  }

  if (!args.data_path.empty()) {
    std::vector<std::string> x_names(bundle.column_names.begin(),
                                     bundle.column_names.begin() + bundle.d());
    Dataset data = load_csv(args.data_path, x_names);
    if (data.p() != bundle.p()) throw DataError("eval: data dimensions do not match");
    if (bundle.record.applied_x || bundle.record.applied_y) {
      for (int j = 0; j < data.d(); ++j)
        if (bundle.record.applied_x)
          data.x.col(j) = (data.x.col(j).array() - bundle.record.x_mean[j]) /
                          bundle.record.x_scale[j];
      for (int j = 0; j < data.p(); ++j)
        if (bundle.record.applied_y)
          data.y.col(j) = (data.y.col(j).array() - bundle.record.y_mean[j]) /
                          bundle.record.y_scale[j];
    }
    double cond = 0.0;
    for (int i = 0; i < data.n(); ++i) {
      Vector xi = data.d() > 0 ? Vector(data.x.row(i)) : Vector();
      cond += heldout_neg_loglik(xi, data.y.row(i), bundle.cggm);
    }
    report["heldout_neg_loglik_cond"] = cond / data.n();

    if (!args.truth_path.empty()) {
      TruthSpec truth = load_truth(args.truth_path);
      report["kl_cond_empirical"] = kl_cond_empirical(truth.theta_true, truth.lambda_true,
                                                      bundle.cggm, data.x);
    }
    if (bundle.ssanova) {
      double marg = 0.0;
      long inside = 0;
      for (int i = 0; i < data.n(); ++i) {
        Vector xi = data.x.row(i);
        bool in_box = true;
        for (int k = 0; k < data.d(); ++k)
          if (xi[k] < bundle.ssanova->config.box(k, 0) ||
              xi[k] > bundle.ssanova->config.box(k, 1))
            in_box = false;
        if (!in_box) continue;
        marg += -std::log(eval_density(*bundle.ssanova, xi));
        ++inside;
      }
      if (inside > 0) report["heldout_neg_loglik_x"] = marg / inside;
      report["heldout_rows_in_box"] = inside;
    }
  }

  std::string text = report.dump(2) + "\n";
  std::cout << text;
  if (!args.out_path.empty()) write_text_file(args.out_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiparametric density and graph estimation (smoothing-spline X block + sparse conditional Gaussian Y block)"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit the density model to a CSV");
  fit_cmd->add_option("data", fit.data_path, "input CSV with a header row")->required();
  fit_cmd->add_option("--x-cols", fit.x_cols, "column names for the nonparametric block")
      ->delimiter(',');
  fit_cmd->add_option("--x-count", fit.x_count, "use the first N columns as X");
  fit_cmd->add_option("--x-auto", fit.x_auto,
                      "pick N columns by Shapiro-Wilk normality ranking");
  fit_cmd->add_option("--lambda1", fit.lambda1, "smoothing parameter (default: 5-fold CV)");
  fit_cmd->add_option("--lambda2", fit.lambda2, "Lambda off-diagonal l1 penalty");
  fit_cmd->add_option("--lambda3", fit.lambda3, "Theta l1 penalty");
  fit_cmd->add_option("--tune", fit.tune, "criterion when lambda2/lambda3 unset")
      ->check(CLI::IsMember({"lookl", "bic", "cv"}));
  fit_cmd->add_option("--standardize", fit.standardize_mode, "none|x|y|both")
      ->check(CLI::IsMember({"none", "x", "y", "both"}));
  fit_cmd->add_option("--rho", fit.rho,
                      "pseudo-likelihood reference density; uniform (default) and the "
                      "product kinds keep edge selection assumptions intact, joint_kde "
                      "gives the best density estimates")
      ->check(CLI::IsMember({"uniform", "gaussian", "marginal", "joint_kde"}));
  fit_cmd->add_option("--seed", fit.seed, "master seed");
  fit_cmd->add_option("--out", fit.out_path, "output model JSON path");
  fit_cmd->add_option("--grid", fit.grid_per_axis, "penalty grid points per axis");
  fit_cmd->add_option("--kfold", fit.kfold_k, "folds for --tune=cv");
  fit_cmd->add_flag("--no-theta-rescale", fit.no_theta_rescale,
                    "skip the pilot rescale of per-term weights");
  fit_cmd->add_option("--threads", fit.threads, "worker cap (reserved)");

  GraphArgs graph;
  auto* graph_cmd = app.add_subcommand("graph", "edge selection from a fitted model");
  graph_cmd->add_option("model", graph.model_path, "model JSON from fit")->required();
  graph_cmd->add_option("--cutoff", graph.cutoff, "projection-ratio stopping cutoff");
  graph_cmd->add_flag("--recompute-ranks", graph.recompute_ranks,
                      "re-rank interactions after each inclusion");
  graph_cmd->add_option("--out", graph.out_dir, "output directory");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "replication study on synthetic data");
  sim_cmd->add_option("--preset", sim.preset, "table1 (mixture X) or table2 (Gaussian)");
  sim_cmd->add_option("--sigma", sim.sigma, "mixture component sd");
  sim_cmd->add_option("--omega", sim.omega, "mixture weight");
  sim_cmd->add_option("--n", sim.n, "sample size");
  sim_cmd->add_option("--p", sim.p, "parametric block width");
  sim_cmd->add_option("--d", sim.d, "nonparametric block width");
  sim_cmd->add_option("--edge-prob", sim.edge_prob, "precision support probability");
  sim_cmd->add_option("--reps", sim.reps, "replications");
  sim_cmd->add_option("--seed", sim.seed, "master seed");
  sim_cmd->add_option("--out", sim.out_dir, "output directory");
  sim_cmd->add_option("--grid", sim.grid_per_axis, "penalty grid points per axis");
  sim_cmd->add_option("--threads", sim.threads, "parallel replications");
  sim_cmd->add_option("--methods", sim.methods, "subset of cv,bic,lookl,mle,single")
      ->delimiter(',');

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a fitted model");
  eval_cmd->add_option("model", eval.model_path, "model JSON from fit")->required();
  eval_cmd->add_option("--truth", eval.truth_path, "truth JSON (or another model JSON)");
  eval_cmd->add_option("--data", eval.data_path, "held-out CSV");
  eval_cmd->add_option("--out", eval.out_path, "also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(fit_cmd)) return run_fit(fit);
    if (app.got_subcommand(graph_cmd)) return run_graph(graph);
    if (app.got_subcommand(sim_cmd)) return run_simulate(sim);
    if (app.got_subcommand(eval_cmd)) return run_eval(eval);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
