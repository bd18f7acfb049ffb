#include "splinecggm/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>
#include <thread>

#include "splinecggm/tuning.hpp"

namespace scg {

void SimulationConfig::fill_defaults() {
  if (mu1.size() == 0) {
    mu1 = Vector::Zero(d);
    mu2 = Vector::Zero(d);
    for (int k = 0; k < d; ++k) {
      // defaults (1,0,-1) and (0,-1,1), cycled past d=3
      const double a[3] = {1.0, 0.0, -1.0};
      const double b[3] = {0.0, -1.0, 1.0};
      mu1[k] = a[k % 3];
      mu2[k] = b[k % 3];
    }
  }
}

void SimulationConfig::validate() const {
  require(n >= 1 && d >= 0 && p >= 1, "SimulationConfig: bad dimensions");
  require(omega >= 0.0 && omega <= 1.0, "SimulationConfig: omega in [0,1]");
  require(sigma > 0.0, "SimulationConfig: sigma > 0");
  require(edge_prob > 0.0 && edge_prob < 1.0, "SimulationConfig: edge_prob in (0,1)");
}

Matrix gen_mixture_x(const SimulationConfig& config, Rng& rng) {
  SimulationConfig c = config;
  c.fill_defaults();
  c.validate();
  Matrix x(c.n, c.d);
  for (int i = 0; i < c.n; ++i) {
    bool first = rng.uniform() < c.omega;
    const Vector& mu = first ? c.mu1 : c.mu2;
    for (int k = 0; k < c.d; ++k) x(i, k) = mu[k] + c.sigma * rng.normal();
  }
  return x;
}

GroundTruth gen_sparse_precision(int dim, int d, double edge_prob, Rng& rng) {
  require(dim >= 2 && d >= 0 && d < dim, "gen_sparse_precision: bad dimensions");
  Matrix off = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      if (rng.uniform() < edge_prob) {
        double mag = rng.uniform(0.1, 0.4);
        double v = rng.uniform() < 0.5 ? mag : -mag;
        off(i, j) = off(j, i) = v;
      }
    }
  Eigen::SelfAdjointEigenSolver<Matrix> es(off);
  double diag = std::abs(es.eigenvalues().minCoeff()) + 0.5;
  Matrix omega = off + diag * Matrix::Identity(dim, dim);
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success)
    throw DataError("gen_sparse_precision: repair failed to give a PD matrix");

  GroundTruth truth;
  truth.omega_full = omega;
  const int p = dim - d;
  truth.theta_true = omega.block(0, d, d, p);
  truth.lambda_true = omega.block(d, d, p, p);
  truth.adjacency = IntMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      if (i != j && std::abs(omega(i, j)) > 1e-10) truth.adjacency(i, j) = 1;
  return truth;
}

Matrix sample_y_given_x(const Matrix& x, const Matrix& theta_true,
                        const Matrix& lambda_true, Rng& rng) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(lambda_true.rows());
  Eigen::LLT<Matrix> llt(lambda_true);
  if (llt.info() != Eigen::Success)
    throw DataError("sample_y_given_x: Lambda is not positive definite");
  Matrix l = llt.matrixL();
  Matrix y(n, p);
  Vector z(p);
  for (int i = 0; i < n; ++i) {
    Vector mean = -llt.solve(theta_true.transpose() * x.row(i).transpose());
    for (int k = 0; k < p; ++k) z[k] = rng.normal();
    // cov = Lambda^-1 = L^-T L^-1, so mean + L^-T z has the target law
    Vector draw = l.transpose().triangularView<Eigen::Upper>().solve(z);
    y.row(i) = (mean + draw).transpose();
  }
  return y;
}

double skl_conditional_explicit(const Matrix& theta0, const Matrix& lambda0,
                                const Matrix& theta_hat, const Matrix& lambda_hat,
                                const Matrix& second_moment_f0,
                                const Matrix& second_moment_fhat) {
  const int p = static_cast<int>(lambda0.rows());
  if (lambda0 == lambda_hat && theta0 == theta_hat) return 0.0;
  Eigen::LLT<Matrix> llt0(lambda0), llth(lambda_hat);
  if (llt0.info() != Eigen::Success || llth.info() != Eigen::Success)
    throw DataError("skl_conditional_explicit: precision not positive definite");
  double trace_part =
      0.5 * (llth.solve(lambda0).trace() + llt0.solve(lambda_hat).trace()) - p;
  const int d = static_cast<int>(theta0.rows());
  if (d == 0) return trace_part;
  // a maps x to the difference of conditional means (p x d)
  Matrix a = llth.solve(theta_hat.transpose()) - llt0.solve(theta0.transpose());
  if (a.cwiseAbs().maxCoeff() == 0.0) return trace_part;
  double quad = 0.5 * (a.transpose() * lambda_hat * a * second_moment_f0).trace() +
                0.5 * (a.transpose() * lambda0 * a * second_moment_fhat).trace();
  return quad + trace_part;
}

double kl_cond_empirical(const Matrix& theta0, const Matrix& lambda0,
                         const CggmModel& model, const Matrix& x) {
  const int p = static_cast<int>(lambda0.rows());
  Eigen::LLT<Matrix> llt0(lambda0);
  Eigen::LLT<Matrix> llth(model.lambda_mat);
  if (llt0.info() != Eigen::Success || llth.info() != Eigen::Success)
    throw DataError("kl_cond_empirical: precision not positive definite");
  auto logdet = [](const Eigen::LLT<Matrix>& f) {
    return 2.0 * f.matrixL().toDenseMatrix().diagonal().array().log().sum();
  };
  // KL(N(m0,L0^-1), N(mh,Lh^-1)) = 0.5[tr(Lh L0^-1) + dm' Lh dm - p + log|L0|/|Lh|]
  double base = 0.5 * (llt0.solve(model.lambda_mat).trace() - p + logdet(llt0) - logdet(llth));
  const int d = static_cast<int>(theta0.rows());
  if (d == 0 || x.rows() == 0) return base;
  Matrix a = llth.solve(model.theta_mat.transpose()) - llt0.solve(theta0.transpose());
  double quad = 0.0;
  for (long i = 0; i < x.rows(); ++i) {
    Vector dm = a * x.row(i).transpose();
    quad += dm.dot(model.lambda_mat * dm);
  }
  return base + 0.5 * quad / static_cast<double>(x.rows());
}

double kl_marginal_x(const DensityFn& f0, const DensityFn& fhat, const QuadratureSpec& quad) {
  const double vol = quad.volume();
  double total = 0.0;
  for (long i = 0; i < quad.size(); ++i) {
    Vector x = quad.to_original(quad.nodes.row(i));
    double a = f0(x);
    double b = fhat(x);
    if (!(a > 0.0) || !(b > 0.0)) {
      std::string coords;
      for (long k = 0; k < x.size(); ++k)
        coords += (k ? ", " : "") + std::to_string(x[k]);
      throw DataError("kl_marginal_x: non-positive density at node (" + coords + ")");
    }
    total += quad.weights[i] * a * std::log(a / b);
  }
  return total * vol;
}

ConfusionMetrics confusion_block(const IntMatrix& est, const IntMatrix& truth,
                                 int row_lo, int row_hi, int col_lo, int col_hi,
                                 bool symmetric_block) {
  require(est.rows() == truth.rows() && est.cols() == truth.cols(),
          "confusion_block: dimension mismatch");
  ConfusionMetrics m;
  auto tally = [&](int i, int j) {
    bool e = est(i, j) != 0;
    bool t = truth(i, j) != 0;
    if (e && t)
      ++m.tp;
    else if (e && !t)
      ++m.fp;
    else if (!e && t)
      ++m.fn;
    else
      ++m.tn;
  };
  if (symmetric_block) {
    for (int i = row_lo; i < row_hi; ++i)
      for (int j = i + 1; j < col_hi; ++j) tally(i, j);
  } else {
    for (int i = row_lo; i < row_hi; ++i)
      for (int j = col_lo; j < col_hi; ++j) tally(i, j);
  }
  m.sensitivity = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 1.0;
  m.specificity = (m.tn + m.fp) > 0 ? static_cast<double>(m.tn) / (m.tn + m.fp) : 1.0;
  m.f1 = (2 * m.tp + m.fp + m.fn) > 0 ? 2.0 * m.tp / (2.0 * m.tp + m.fp + m.fn) : 1.0;
  return m;
}

MetricsReport confusion_metrics(const GraphEstimate& est, const IntMatrix& truth_adjacency) {
  const int total = est.d + est.p;
  require(truth_adjacency.rows() == total && truth_adjacency.cols() == total,
          "confusion_metrics: adjacency dimension mismatch");
  MetricsReport rep;
  rep.xx = confusion_block(est.adjacency, truth_adjacency, 0, est.d, 0, est.d, true);
  rep.xy = confusion_block(est.adjacency, truth_adjacency, 0, est.d, est.d, total, false);
  rep.yy = confusion_block(est.adjacency, truth_adjacency, est.d, total, est.d, total, true);
  rep.overall = confusion_block(est.adjacency, truth_adjacency, 0, total, 0, total, true);
  return rep;
}

DensityFn mixture_density(const SimulationConfig& config) {
  SimulationConfig c = config;
  c.fill_defaults();
  const int d = c.d;
  const double norm_const = std::pow(2.0 * M_PI * c.sigma * c.sigma, -0.5 * d);
  return [c, norm_const, d](const Vector& x) {
    double q1 = (x - c.mu1).squaredNorm() / (2.0 * c.sigma * c.sigma);
    double q2 = (x - c.mu2).squaredNorm() / (2.0 * c.sigma * c.sigma);
    return norm_const * (c.omega * std::exp(-q1) + (1.0 - c.omega) * std::exp(-q2));
  };
}

double mixture_box_mass(const SimulationConfig& config, const QuadratureSpec& quad) {
  return quad.integrate(mixture_density(config));
}

Matrix mixture_second_moment(const SimulationConfig& config) {
  SimulationConfig c = config;
  c.fill_defaults();
  Matrix m = c.sigma * c.sigma * Matrix::Identity(c.d, c.d);
  m += c.omega * c.mu1 * c.mu1.transpose() + (1.0 - c.omega) * c.mu2 * c.mu2.transpose();
  return m;
}

DensityFn gaussian_density_fit(const Matrix& x) {
  const int d = static_cast<int>(x.cols());
  const double n = static_cast<double>(x.rows());
  Vector mean = x.colwise().mean();
  Matrix centered = x.rowwise() - mean.transpose();
  Matrix cov = centered.transpose() * centered / n;
  cov.diagonal().array() += 1e-10;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw DataError("gaussian_density_fit: singular covariance");
  double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  double log_norm = -0.5 * (d * std::log(2.0 * M_PI) + logdet);
  auto solver = std::make_shared<Eigen::LLT<Matrix>>(llt);
  return [mean, solver, log_norm](const Vector& x0) {
    Vector c = x0 - mean;
    double quad = c.dot(solver->solve(c));
    return std::exp(log_norm - 0.5 * quad);
  };
}

std::string method_name(StudyMethod m) {
  switch (m) {
    case StudyMethod::CsscggCv: return "csscgg_cv";
    case StudyMethod::CsscggBic: return "csscgg_bic";
    case StudyMethod::CsscggLookl: return "csscgg_lookl";
    case StudyMethod::MleBaseline: return "mle";
    case StudyMethod::SinglePenaltyBic: return "single_penalty_bic";
  }
  return "unknown";
}

namespace {

struct RepOutcome {
  std::vector<StudyRow> rows;
  bool failed = false;
  std::string error;
};

void push_confusion(std::vector<StudyRow>& rows, int rep, const std::string& method,
                    const MetricsReport& m) {
  auto push_block = [&](const std::string& tag, const ConfusionMetrics& c) {
    rows.push_back({rep, method, "spe_" + tag, c.specificity});
    rows.push_back({rep, method, "sen_" + tag, c.sensitivity});
    rows.push_back({rep, method, "f1_" + tag, c.f1});
  };
  push_block("xx", m.xx);
  push_block("xy", m.xy);
  push_block("yy", m.yy);
  push_block("overall", m.overall);
}

CggmModel fit_tuned(const Dataset& data, const std::vector<std::pair<double, double>>& grid,
                    TuneCriterion crit, const GridOptions& gopts) {
  SelectionResult sel = grid_select(data, grid, crit, gopts);
  return fit_cggm(sufficient_stats(data), sel.chosen.first, sel.chosen.second, gopts.solver);
}

RepOutcome run_one_replication(const SimulationConfig& config,
                               const std::vector<StudyMethod>& methods, int rep,
                               std::uint64_t seed, const StudyOptions& opts) {
  RepOutcome out;
  try {
    SimulationConfig cfg = config;
    cfg.fill_defaults();
    cfg.validate();
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(rep)));

    GroundTruth truth = gen_sparse_precision(cfg.d + cfg.p, cfg.d, cfg.edge_prob, rng);
    Matrix x, y;
    if (cfg.pure_gaussian) {
      // Z ~ N(0, Omega^-1)
      Eigen::LLT<Matrix> llt(truth.omega_full);
      Matrix l = llt.matrixL();
      Matrix z(cfg.n, cfg.d + cfg.p);
      Vector draw(cfg.d + cfg.p);
      for (int i = 0; i < cfg.n; ++i) {
        for (int k = 0; k < cfg.d + cfg.p; ++k) draw[k] = rng.normal();
        z.row(i) = l.transpose().triangularView<Eigen::Upper>().solve(draw).transpose();
      }
      x = z.leftCols(cfg.d);
      y = z.rightCols(cfg.p);
    } else {
      x = gen_mixture_x(cfg, rng);
      y = sample_y_given_x(x, truth.theta_true, truth.lambda_true, rng);
    }

    Dataset data;
    data.x = x;
    data.y = y;
    for (int k = 0; k < cfg.d; ++k) data.column_names.push_back("x" + std::to_string(k + 1));
    for (int k = 0; k < cfg.p; ++k) data.column_names.push_back("y" + std::to_string(k + 1));

    SufficientStats stats = sufficient_stats(data);
    GridOptions gopts;
    gopts.n_lambda2 = opts.grid_per_axis;
    gopts.n_lambda3 = opts.grid_per_axis;
    gopts.kfold_k = opts.kfold_k;
    gopts.seed = derive_stream(seed, 7000 + rep);
    gopts.solver = opts.solver;
    auto grid = default_grid(stats, gopts);

    std::vector<std::pair<double, double>> single_grid;
    {
      GridOptions g1 = gopts;
      g1.n_lambda2 = opts.grid_per_axis * opts.grid_per_axis;
      g1.n_lambda3 = 1;
      auto axis = default_grid(stats, g1);
      for (auto [l2, l3] : axis) single_grid.emplace_back(l2, l2);
      (void)axis;
    }

    // nonparametric X fits shared by the cSScGG methods: one tuned for
    // density quality, one with an additive-in-log reference for edge
    // selection
    SsAnovaModel ss_density, ss_graph;
    bool have_density = false, have_graph = false;
    if (cfg.d > 0 && opts.density_metrics) {
      SsAnovaOptions ss_opts;
      ss_opts.seed = derive_stream(seed, 9000 + rep);
      ss_opts.theta_rescale = opts.theta_rescale;
      ss_opts.rho = opts.density_rho;
      ss_density = fit_density_auto(x, ss_opts);
      have_density = true;
    }
    if (cfg.d > 0 && opts.graph_metrics) {
      SsAnovaOptions ss_opts;
      ss_opts.seed = derive_stream(seed, 9500 + rep);
      ss_opts.theta_rescale = opts.theta_rescale;
      ss_opts.rho = RhoKind::Uniform;
      ss_graph = fit_density_auto(x, ss_opts);
      have_graph = true;
    }

    double kl_x_ss = 0.0, kl_x_gauss = 0.0;
    if (opts.density_metrics && cfg.d > 0 && have_density) {
      DensityFn f0;
      if (cfg.pure_gaussian) {
        Matrix omega_x_marginal =
            truth.omega_full.topLeftCorner(cfg.d, cfg.d) -
            truth.theta_true *
                Eigen::LLT<Matrix>(truth.lambda_true).solve(truth.theta_true.transpose());
        Matrix cov = chol_inverse(omega_x_marginal);
        Eigen::LLT<Matrix> llt(cov);
        double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        double log_norm = -0.5 * (cfg.d * std::log(2 * M_PI) + logdet);
        f0 = [cov, log_norm](const Vector& v) {
          Eigen::LLT<Matrix> s(cov);
          return std::exp(log_norm - 0.5 * v.dot(s.solve(v)));
        };
      } else {
        f0 = mixture_density(cfg);
      }
      double mass = ss_density.quad.integrate(f0);
      DensityFn f0_renorm = [f0, mass](const Vector& v) {
        return std::max(f0(v) / mass, 1e-300);
      };
      DensityFn f_ss = [&ss_density](const Vector& v) { return eval_density(ss_density, v); };
      DensityFn f_gauss = gaussian_density_fit(x);
      kl_x_ss = kl_marginal_x(f0_renorm, f_ss, ss_density.quad);
      kl_x_gauss = kl_marginal_x(f0_renorm, f_gauss, ss_density.quad);
      out.rows.push_back({rep, "csscgg", "kl_x", kl_x_ss});
      out.rows.push_back({rep, "gaussian_fit", "kl_x", kl_x_gauss});
    }

    for (StudyMethod method : methods) {
      CggmModel fit;
      switch (method) {
        case StudyMethod::CsscggCv:
          fit = fit_tuned(data, grid, TuneCriterion::Kfold, gopts);
          break;
        case StudyMethod::CsscggBic:
          fit = fit_tuned(data, grid, TuneCriterion::Bic, gopts);
          break;
        case StudyMethod::CsscggLookl:
          fit = fit_tuned(data, grid, TuneCriterion::Lookl, gopts);
          break;
        case StudyMethod::SinglePenaltyBic:
          fit = fit_tuned(data, single_grid, TuneCriterion::Bic, gopts);
          break;
        case StudyMethod::MleBaseline:
          fit = fit_cggm(stats, 0.0, 0.0, gopts.solver);
          break;
      }
      const std::string name = method_name(method);

      if (opts.density_metrics) {
        double kl_cond = kl_cond_empirical(truth.theta_true, truth.lambda_true, fit, x);
        double kl_x_m = method == StudyMethod::MleBaseline ? kl_x_gauss : kl_x_ss;
        out.rows.push_back({rep, name, "kl_cond", kl_cond});
        out.rows.push_back({rep, name, "kl_overall", kl_x_m + kl_cond});
      }

      if (opts.graph_metrics && method != StudyMethod::MleBaseline && have_graph) {
        ZetaModel zeta = build_zeta(ss_graph, fit);
        ForwardSelectResult sel = forward_select(zeta, opts.cutoff);
        GraphEstimate graph = assemble_graph(fit, sel.pi, data.column_names, sel.pair_ratios);
        MetricsReport mr = confusion_metrics(graph, truth.adjacency);
        push_confusion(out.rows, rep, name, mr);
      }
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace

StudySummary run_replication_study(const SimulationConfig& config,
                                   const std::vector<StudyMethod>& methods, int n_reps,
                                   std::uint64_t seed, const StudyOptions& opts) {
  require(n_reps >= 1, "run_replication_study: need n_reps >= 1");
  std::vector<RepOutcome> outcomes(n_reps);

  // flush finished replications to the callback in replication order
  std::mutex flush_mutex;
  std::vector<bool> done(n_reps, false);
  int next_to_flush = 0;
  auto flush_ready = [&](int r) {
    if (!opts.on_replication) return;
    std::lock_guard<std::mutex> lock(flush_mutex);
    done[r] = true;
    while (next_to_flush < n_reps && done[next_to_flush]) {
      if (!outcomes[next_to_flush].failed)
        opts.on_replication(next_to_flush, outcomes[next_to_flush].rows);
      ++next_to_flush;
    }
  };

  const int workers = std::max(1, std::min(opts.threads, n_reps));
  if (workers == 1) {
    for (int r = 0; r < n_reps; ++r) {
      outcomes[r] = run_one_replication(config, methods, r, seed, opts);
      flush_ready(r);
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int wkr = 0; wkr < workers; ++wkr) {
      pool.emplace_back([&]() {
        for (;;) {
          int r = next.fetch_add(1);
          if (r >= n_reps) break;
          outcomes[r] = run_one_replication(config, methods, r, seed, opts);
          flush_ready(r);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  StudySummary summary;
  for (auto& o : outcomes) {
    if (o.failed) {
      ++summary.failures;
      continue;
    }
    summary.rows.insert(summary.rows.end(), o.rows.begin(), o.rows.end());
  }

  std::map<std::pair<std::string, std::string>, std::vector<double>> buckets;
  for (const auto& row : summary.rows) buckets[{row.method, row.metric}].push_back(row.value);
  for (const auto& [key, values] : buckets) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    double sd = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
    summary.aggregate[key] = {mean, sd, static_cast<double>(values.size())};
  }
  return summary;
}

}  // namespace scg
