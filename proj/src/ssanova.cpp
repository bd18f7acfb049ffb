#include "splinecggm/ssanova.hpp"

#include <algorithm>
#include <cmath>

#include "splinecggm/rng.hpp"

namespace scg {

double spline_k1(double t) { return t - 0.5; }

double spline_k2(double t) {
  double k1 = t - 0.5;
  return 0.5 * k1 * k1 - 1.0 / 24.0;
}

double spline_k4(double t) {
  double s = t - 0.5;
  double s2 = s * s;
  return (s2 * s2) / 24.0 - s2 / 48.0 + 7.0 / 5760.0;
}

double cubic_spline_kernel(double x, double y) {
  return spline_k2(x) * spline_k2(y) - spline_k4(std::abs(x - y));
}

double univariate_kernel(double x, double y) {
  return spline_k1(x) * spline_k1(y) + cubic_spline_kernel(x, y);
}

void KernelConfig::validate() const {
  require(box.rows() >= 1 && box.cols() == 2, "KernelConfig: box must be d x 2");
  for (int k = 0; k < dim(); ++k)
    require(box(k, 1) > box(k, 0), "KernelConfig: box must have positive widths");
  std::vector<bool> has_main(dim(), false);
  for (int k : main_effects) {
    require(k >= 0 && k < dim(), "KernelConfig: main effect index out of range");
    has_main[k] = true;
  }
  for (auto [i, j] : interactions) {
    require(i >= 0 && j > i && j < dim(), "KernelConfig: bad interaction pair");
    require(has_main[i] && has_main[j],
            "KernelConfig: interaction requires both main effects");
  }
  require(static_cast<int>(theta_v.size()) == n_terms(),
          "KernelConfig: theta_v length must match the term count");
  require((theta_v.array() > 0).all(), "KernelConfig: theta_v must be positive");
}

KernelConfig KernelConfig::all_terms(const Matrix& box, bool with_interactions) {
  KernelConfig c;
  c.box = box;
  const int d = static_cast<int>(box.rows());
  for (int k = 0; k < d; ++k) c.main_effects.push_back(k);
  if (with_interactions) {
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) c.interactions.emplace_back(i, j);
  }
  c.theta_v = Vector::Ones(c.n_terms());
  return c;
}

KernelEvaluator::KernelEvaluator(const KernelConfig& config) : config_(&config) {
  config.validate();
}

KernelEvaluator build_kernel(const KernelConfig& config) { return KernelEvaluator(config); }

namespace {

void check_unit(const Vector& u) {
  for (long k = 0; k < u.size(); ++k)
    if (u[k] < -1e-9 || u[k] > 1.0 + 1e-9)
      throw DataError("kernel evaluation: point outside the domain box");
}

}  // namespace

double KernelEvaluator::term(int t, const Vector& u, const Vector& v) const {
  check_unit(u);
  check_unit(v);
  const int n_main = static_cast<int>(config_->main_effects.size());
  if (t < n_main) {
    int k = config_->main_effects[t];
    return cubic_spline_kernel(u[k], v[k]);
  }
  auto [i, j] = config_->interactions[t - n_main];
  return univariate_kernel(u[i], v[i]) * univariate_kernel(u[j], v[j]);
}

double KernelEvaluator::combined(const Vector& u, const Vector& v) const {
  double s = 0.0;
  for (int t = 0; t < config_->n_terms(); ++t) s += config_->theta_v[t] * term(t, u, v);
  return s;
}

double KernelEvaluator::combined_masked(const Vector& u, const Vector& v,
                                        const std::vector<bool>& term_mask) const {
  double s = 0.0;
  for (int t = 0; t < config_->n_terms(); ++t)
    if (term_mask[t]) s += config_->theta_v[t] * term(t, u, v);
  return s;
}

double SsAnovaModel::eta_unit(const Vector& u) const {
  double v = null_coef[0];
  for (int k = 0; k < config.dim(); ++k) v += null_coef[k + 1] * spline_k1(u[k]);
  KernelEvaluator kernel(config);
  for (int j = 0; j < q(); ++j)
    v += rep_coef[j] * kernel.combined(u, representers_unit.row(j));
  return v;
}

namespace {

// per-dimension Gaussian KDE in unit coordinates, floored so logs stay finite
double log_marginal_kde(const Matrix& points, const Vector& bandwidth, int k, double u) {
  const long n = points.rows();
  const double bw = bandwidth[k];
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    double z = (u - points(i, k)) / bw;
    acc += std::exp(-0.5 * z * z);
  }
  double dens = acc / (n * bw * std::sqrt(2.0 * M_PI));
  return std::log(std::max(dens, 1e-35));
}

double log_joint_kde(const Matrix& points, const Vector& bandwidth, const Vector& u) {
  const long n = points.rows();
  const int d = static_cast<int>(points.cols());
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    double quad = 0.0;
    for (int k = 0; k < d; ++k) {
      double z = (u[k] - points(i, k)) / bandwidth[k];
      quad += z * z;
    }
    acc += std::exp(-0.5 * quad);
  }
  double log_norm = 0.0;
  for (int k = 0; k < d; ++k) log_norm += std::log(bandwidth[k] * std::sqrt(2.0 * M_PI));
  double dens = acc / n * std::exp(-log_norm);
  return std::log(std::max(dens, 1e-80));
}

}  // namespace

double SsAnovaModel::log_rho_unit(const Vector& u) const {
  if (rho_kind == RhoKind::Uniform) return 0.0;
  if (rho_kind == RhoKind::MarginalProduct) {
    double lg = 0.0;
    for (int k = 0; k < config.dim(); ++k)
      lg += log_marginal_kde(rho_points, rho_bandwidth, k, u[k]);
    return lg - rho_log_mass;
  }
  if (rho_kind == RhoKind::JointKde)
    return log_joint_kde(rho_points, rho_bandwidth, u) - rho_log_mass;
  double lg = 0.0;
  for (int k = 0; k < config.dim(); ++k) {
    double z = (u[k] - rho_mean[k]) / rho_sd[k];
    lg += -0.5 * z * z - std::log(rho_sd[k]) - 0.5 * std::log(2.0 * M_PI);
  }
  return lg - rho_log_mass;
}

namespace {

Matrix unit_coords(const Matrix& x, const Matrix& box) {
  Matrix u = x;
  for (long k = 0; k < box.rows(); ++k) {
    double w = box(k, 1) - box(k, 0);
    u.col(k) = (x.col(k).array() - box(k, 0)) / w;
  }
  return u;
}

Matrix data_box(const Matrix& x, double margin) {
  Matrix box(x.cols(), 2);
  for (long k = 0; k < x.cols(); ++k) {
    double lo = x.col(k).minCoeff();
    double hi = x.col(k).maxCoeff();
    double pad = std::max((hi - lo) * margin, 1e-8);
    box(k, 0) = lo - pad;
    box(k, 1) = hi + pad;
  }
  return box;
}

Vector null_basis_at(const Vector& u, int d) {
  Vector phi(d + 1);
  phi[0] = 1.0;
  for (int k = 0; k < d; ++k) phi[k + 1] = spline_k1(u[k]);
  return phi;
}

}  // namespace

SsAnovaDesign make_design(const Matrix& x_original, const KernelConfig& config,
                          const Matrix& representers_unit, const QuadratureSpec& quad,
                          const Vector& rho_weights) {
  config.validate();
  const int n = static_cast<int>(x_original.rows());
  const int d = config.dim();
  const int q = static_cast<int>(representers_unit.rows());
  KernelEvaluator kernel(config);

  SsAnovaDesign design;
  design.config = config;
  design.quad = quad;
  design.representers_unit = representers_unit;
  design.rho_weights = rho_weights.size() > 0 ? rho_weights : quad.weights;
  require(design.rho_weights.size() == quad.size(),
          "make_design: rho_weights length must match the quadrature");
  design.x_unit = unit_coords(x_original, config.box);
  if (design.x_unit.size() > 0 &&
      (design.x_unit.minCoeff() < -1e-9 || design.x_unit.maxCoeff() > 1.0 + 1e-9))
    throw DataError("make_design: data outside the domain box");

  design.phi.resize(n, d + 1);
  design.xi.resize(n, q);
  for (int i = 0; i < n; ++i) {
    Vector u = design.x_unit.row(i);
    design.phi.row(i) = null_basis_at(u, d);
    for (int j = 0; j < q; ++j)
      design.xi(i, j) = kernel.combined(u, representers_unit.row(j));
  }

  design.qmat.resize(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = i; j < q; ++j) {
      double v = kernel.combined(representers_unit.row(i), representers_unit.row(j));
      design.qmat(i, j) = v;
      design.qmat(j, i) = v;
    }

  design.mu = Vector::Zero(d + 1 + q);
  for (long t = 0; t < quad.size(); ++t) {
    Vector u = quad.nodes.row(t);
    double w = design.rho_weights[t];
    design.mu.head(d + 1) += w * null_basis_at(u, d);
    for (int j = 0; j < q; ++j)
      design.mu[d + 1 + j] += w * kernel.combined(u, representers_unit.row(j));
  }
  return design;
}

PseudoLik pseudo_loglik_l1(const SsAnovaDesign& design, const Vector& coef, double lambda1,
                           bool with_hessian) {
  const int n = design.n();
  const int m = design.m();
  const int q = design.q();
  require(static_cast<int>(coef.size()) == m + q, "pseudo_loglik_l1: bad coefficient length");

  Vector eta = design.phi * coef.head(m) + design.xi * coef.tail(q);
  PseudoLik out;
  // e^-eta with a linear continuation below eta = -40: the continuation keeps
  // the objective convex and the restoring gradient alive where a hard clamp
  // would go flat and let the integral term run away.
  const double e40 = std::exp(40.0);
  Vector e(n);           // -d/deta of the likelihood term (also the weight)
  double lik_value = 0;  // sum of the per-observation terms
  for (int i = 0; i < n; ++i) {
    double t = eta[i];
    if (t < -40.0) {
      out.clamped = true;
      e[i] = e40;
      lik_value += e40 * (1.0 - (t + 40.0));
    } else {
      if (t > 40.0) out.clamped = true;
      e[i] = std::exp(-t);
      lik_value += e[i];
    }
  }
  const Vector c = coef.tail(q);
  out.value = lik_value / n + design.mu.dot(coef) + 0.5 * lambda1 * c.dot(design.qmat * c);

  out.grad = Vector::Zero(m + q);
  out.grad.head(m) = -design.phi.transpose() * e / n;
  out.grad.tail(q) = -design.xi.transpose() * e / n + lambda1 * (design.qmat * c);
  out.grad += design.mu;

  if (with_hessian) {
    Matrix full(n, m + q);
    full.leftCols(m) = design.phi;
    full.rightCols(q) = design.xi;
    out.hess = full.transpose() * e.asDiagonal() * full / n;
    out.hess.bottomRightCorner(q, q) += lambda1 * design.qmat;
    out.hess = ((out.hess + out.hess.transpose()) / 2.0).eval();
  }
  return out;
}

namespace {

Vector newton_fit(const SsAnovaDesign& design, double lambda1, int max_iters, double grad_tol,
                  bool* converged, int* iters, double* grad_norm, bool* clamped) {
  const int k = design.m() + design.q();
  Vector coef = Vector::Zero(k);
  PseudoLik cur = pseudo_loglik_l1(design, coef, lambda1);
  *clamped = cur.clamped;
  int it = 0;
  for (; it < max_iters; ++it) {
    if (cur.grad.norm() < grad_tol) break;
    Eigen::LDLT<Matrix> ldlt(cur.hess);
    Vector step = ldlt.solve(-cur.grad);
    if (!step.allFinite() || ldlt.info() != Eigen::Success) {
      Matrix h = cur.hess;
      h.diagonal().array() += 1e-10 * (1.0 + h.trace() / k);
      step = Eigen::LDLT<Matrix>(h).solve(-cur.grad);
    }
    double t = 1.0;
    bool moved = false;
    while (t > 1e-14) {
      PseudoLik cand = pseudo_loglik_l1(design, coef + t * step, lambda1);
      if (cand.value <= cur.value + 1e-12 * std::max(1.0, std::abs(cur.value))) {
        coef += t * step;
        cur = std::move(cand);
        *clamped = *clamped || cur.clamped;
        moved = true;
        break;
      }
      t /= 2.0;
    }
    if (!moved) break;
  }
  *converged = cur.grad.norm() < grad_tol;
  *iters = it;
  *grad_norm = cur.grad.norm();
  return coef;
}

int default_rep_count(int n) {
  return std::min(n, static_cast<int>(std::ceil(10.0 * std::pow(n, 2.0 / 9.0))));
}

struct RhoSetup {
  Vector mean, sd;        // unit coordinates (GaussianProduct)
  Matrix points;          // KDE centers (MarginalProduct)
  Vector bandwidth;
  double log_mass = 0.0;  // log quadrature mass of the unnormalized product
  Vector weights;         // per-node weights of the normalized rho, sum 1
};

RhoSetup make_rho(RhoKind kind, const Matrix& x_unit, const QuadratureSpec& quad) {
  RhoSetup rho;
  if (kind == RhoKind::Uniform) {
    rho.weights = quad.weights;
    return rho;
  }
  const int d = static_cast<int>(x_unit.cols());
  const long n = x_unit.rows();
  Vector log_g = Vector::Zero(quad.size());

  if (kind == RhoKind::GaussianProduct) {
    rho.mean.resize(d);
    rho.sd.resize(d);
    for (int k = 0; k < d; ++k) {
      rho.mean[k] = x_unit.col(k).mean();
      double ss = (x_unit.col(k).array() - rho.mean[k]).square().sum();
      rho.sd[k] = std::max(std::sqrt(ss / std::max<long>(n - 1, 1)), 1e-3);
    }
    for (long t = 0; t < quad.size(); ++t)
      for (int k = 0; k < d; ++k) {
        double z = (quad.nodes(t, k) - rho.mean[k]) / rho.sd[k];
        log_g[t] += -0.5 * z * z - std::log(rho.sd[k]) - 0.5 * std::log(2.0 * M_PI);
      }
  } else {
    // Gaussian KDE centers with robust per-dimension bandwidths; the joint
    // variant uses the slower multivariate rate
    rho.points = x_unit;
    rho.bandwidth.resize(d);
    const double rate = kind == RhoKind::JointKde ? -1.0 / (d + 4.0) : -0.2;
    for (int k = 0; k < d; ++k) {
      std::vector<double> col(x_unit.col(k).data(), x_unit.col(k).data() + n);
      std::sort(col.begin(), col.end());
      double mean = x_unit.col(k).mean();
      double sd = std::sqrt((x_unit.col(k).array() - mean).square().sum() /
                            std::max<long>(n - 1, 1));
      double iqr = col[(3 * n) / 4] - col[n / 4];
      double spread = std::min(sd, iqr / 1.34);
      if (spread <= 0) spread = std::max(sd, 1e-3);
      rho.bandwidth[k] = std::max(0.9 * spread * std::pow(n, rate), 1e-4);
    }
    if (kind == RhoKind::JointKde) {
      for (long t = 0; t < quad.size(); ++t)
        log_g[t] = log_joint_kde(rho.points, rho.bandwidth, quad.nodes.row(t));
    } else {
      for (long t = 0; t < quad.size(); ++t)
        for (int k = 0; k < d; ++k)
          log_g[t] += log_marginal_kde(rho.points, rho.bandwidth, k, quad.nodes(t, k));
    }
  }
  Vector g = log_g.array().exp();
  double mass = quad.weights.dot(g);
  rho.log_mass = std::log(mass);
  rho.weights = quad.weights.cwiseProduct(g) / mass;
  return rho;
}

}  // namespace

namespace {

// per-term weights from a fitted model's term norms, geometric mean one
Vector rescaled_theta(const SsAnovaModel& model) {
  const KernelConfig& config = model.config;
  KernelEvaluator kernel(config);
  const int q = model.q();
  Vector scale(config.n_terms());
  for (int t = 0; t < config.n_terms(); ++t) {
    Matrix gt(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        gt(i, j) = kernel.term(t, model.representers_unit.row(i),
                               model.representers_unit.row(j));
    double s = config.theta_v[t] * config.theta_v[t] *
               model.rep_coef.dot(gt * model.rep_coef);
    scale[t] = std::sqrt(std::max(s, 0.0));
  }
  double floor_val = 1e-6 * std::max(scale.maxCoeff(), 1e-300);
  scale = scale.cwiseMax(floor_val);
  double log_gm = scale.array().log().mean();
  return scale / std::exp(log_gm);
}

}  // namespace

SsAnovaModel fit_logistic_density(const Matrix& x_original, double lambda1,
                                  const SsAnovaOptions& opts) {
  const int n = static_cast<int>(x_original.rows());
  const int d = static_cast<int>(x_original.cols());
  require(d >= 1, "fit_logistic_density: need d >= 1");
  require(n >= 10, "fit_logistic_density: need n >= 10");
  require(lambda1 > 0, "fit_logistic_density: lambda1 must be positive");

  Matrix box = opts.box.size() > 0 ? opts.box : data_box(x_original, opts.box_margin);
  KernelConfig config = KernelConfig::all_terms(box, opts.with_interactions && d >= 2);
  if (opts.theta_override.size() > 0) {
    require(opts.theta_override.size() == config.n_terms(),
            "fit_logistic_density: theta_override length mismatch");
    config.theta_v = opts.theta_override;
  }

  const int q = opts.rep_count > 0 ? std::min(opts.rep_count, n) : default_rep_count(n);
  Rng rng(derive_stream(opts.seed, 0x55a0u));
  auto pick = rng.sample_without_replacement(n, q);
  std::sort(pick.begin(), pick.end());
  Matrix x_unit_all = unit_coords(x_original, box);
  Matrix reps(q, d);
  for (int j = 0; j < q; ++j) reps.row(j) = x_unit_all.row(pick[j]);

  QuadratureSpec quad = make_default_quadrature(box, q, derive_stream(opts.seed, 0x4d43u),
                                                opts.quad_nodes_per_dim);
  RhoSetup rho = make_rho(opts.rho, x_unit_all, quad);

  SsAnovaModel model;
  model.lambda1 = lambda1;
  model.seed = opts.seed;
  model.representers_unit = reps;
  model.quad = quad;
  model.rho_kind = opts.rho;
  model.rho_mean = rho.mean;
  model.rho_sd = rho.sd;
  model.rho_points = rho.points;
  model.rho_bandwidth = rho.bandwidth;
  model.rho_log_mass = rho.log_mass;

  auto run = [&](const KernelConfig& cfg) {
    SsAnovaDesign design = make_design(x_original, cfg, reps, quad, rho.weights);
    Vector coef = newton_fit(design, lambda1, opts.max_newton_iters, opts.grad_tol,
                             &model.converged, &model.newton_iters, &model.grad_norm,
                             &model.clamped);
    model.config = cfg;
    model.null_coef = coef.head(design.m());
    model.rep_coef = coef.tail(design.q());
    return design;
  };

  SsAnovaDesign design = run(config);

  if (opts.theta_rescale && config.n_terms() > 1) {
    // one pass of the usual rescaling from the initial fit's term norms
    config.theta_v = rescaled_theta(model);
    design = run(config);
  }

  // normalization constant of the density
  double z = 0.0;
  for (long t = 0; t < quad.size(); ++t)
    z += rho.weights[t] * std::exp(model.eta_unit(quad.nodes.row(t)));
  model.log_norm = std::log(z);
  return model;
}

std::vector<double> default_lambda1_grid(int n_points) {
  std::vector<double> g(n_points);
  for (int i = 0; i < n_points; ++i)
    g[i] = std::pow(10.0, -5.0 + 6.0 * i / std::max(n_points - 1, 1));
  return g;
}

Lambda1Selection select_lambda1(const Matrix& x_original, const std::vector<double>& grid,
                                const SsAnovaOptions& opts, int folds) {
  require(!grid.empty(), "select_lambda1: empty grid");
  const int n = static_cast<int>(x_original.rows());
  require(folds >= 2 && folds <= n, "select_lambda1: bad fold count");

  Matrix box = opts.box.size() > 0 ? opts.box : data_box(x_original, opts.box_margin);
  SsAnovaOptions fold_opts = opts;
  fold_opts.box = box;

  Rng rng(derive_stream(opts.seed, 0xf01d));
  auto perm = rng.permutation(n);
  std::vector<std::vector<int>> fold_rows(folds);
  for (int i = 0; i < n; ++i) fold_rows[i % folds].push_back(perm[i]);

  Lambda1Selection sel;
  sel.grid = grid;
  sel.cv_risk.assign(grid.size(), 0.0);

  for (int f = 0; f < folds; ++f) {
    std::vector<bool> held(n, false);
    for (int i : fold_rows[f]) held[i] = true;
    std::vector<int> train;
    for (int i = 0; i < n; ++i)
      if (!held[i]) train.push_back(i);

    Matrix x_train(train.size(), x_original.cols());
    for (std::size_t r = 0; r < train.size(); ++r) x_train.row(r) = x_original.row(train[r]);
    Matrix x_held(fold_rows[f].size(), x_original.cols());
    for (std::size_t r = 0; r < fold_rows[f].size(); ++r)
      x_held.row(r) = x_original.row(fold_rows[f][r]);

    fold_opts.seed = derive_stream(opts.seed, 100 + f);
    // one design per fold; lambda1 only changes the penalty
    KernelConfig config = KernelConfig::all_terms(
        box, fold_opts.with_interactions && x_original.cols() >= 2);
    if (fold_opts.theta_override.size() > 0) config.theta_v = fold_opts.theta_override;
    const int nt = static_cast<int>(train.size());
    const int q = fold_opts.rep_count > 0 ? std::min(fold_opts.rep_count, nt)
                                          : default_rep_count(nt);
    Rng rep_rng(derive_stream(fold_opts.seed, 0x55a0u));
    auto pick = rep_rng.sample_without_replacement(nt, q);
    std::sort(pick.begin(), pick.end());
    Matrix train_unit = unit_coords(x_train, box);
    Matrix reps(q, x_original.cols());
    for (int j = 0; j < q; ++j) reps.row(j) = train_unit.row(pick[j]);
    QuadratureSpec quad = make_default_quadrature(
        box, q, derive_stream(fold_opts.seed, 0x4d43u), fold_opts.quad_nodes_per_dim);
    RhoSetup rho = make_rho(fold_opts.rho, train_unit, quad);
    SsAnovaDesign design = make_design(x_train, config, reps, quad, rho.weights);

    Matrix held_unit = unit_coords(x_held, box);
    KernelEvaluator kernel(config);
    Matrix held_basis(held_unit.rows(), design.m() + design.q());
    for (long i = 0; i < held_unit.rows(); ++i) {
      Vector u = held_unit.row(i);
      held_basis.row(i).head(design.m()) = null_basis_at(u, config.dim());
      for (int j = 0; j < design.q(); ++j)
        held_basis(i, design.m() + j) = kernel.combined(u, reps.row(j));
    }

    for (std::size_t g = 0; g < grid.size(); ++g) {
      bool conv;
      int iters;
      double gnorm;
      bool clamped;
      Vector coef = newton_fit(design, grid[g], fold_opts.max_newton_iters,
                               fold_opts.grad_tol, &conv, &iters, &gnorm, &clamped);
      double risk;
      if (clamped) {
        // a fit that left the e^-eta window at its own data is degenerate;
        // disqualify this lambda1 on this fold
        risk = 1e300;
      } else {
        // held-out pseudo-likelihood risk
        Vector eta = held_basis * coef;
        risk = 0.0;
        for (long i = 0; i < eta.size(); ++i)
          risk += std::exp(-std::clamp(eta[i], -40.0, 40.0));
        risk /= static_cast<double>(eta.size());
        risk += design.mu.dot(coef);  // int eta rho
      }
      sel.cv_risk[g] += risk / folds;
    }
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (sel.cv_risk[g] < sel.cv_risk[best] ||
        (sel.cv_risk[g] == sel.cv_risk[best] && grid[g] > grid[best]))
      best = g;
  }
  sel.lambda1 = grid[best];
  return sel;
}

SsAnovaModel fit_density_auto(const Matrix& x_original, const SsAnovaOptions& opts) {
  SsAnovaOptions work = opts;
  if (work.box.size() == 0) work.box = data_box(x_original, work.box_margin);
  if (work.theta_rescale && work.theta_override.size() == 0 && x_original.cols() >= 2) {
    // pilot fit fixes the per-term weights before lambda1 selection
    SsAnovaOptions pilot = work;
    pilot.theta_rescale = false;
    SsAnovaModel first = fit_logistic_density(x_original, 1e-2, pilot);
    work.theta_override = rescaled_theta(first);
  }
  work.theta_rescale = false;
  Lambda1Selection sel = select_lambda1(x_original, default_lambda1_grid(), work);
  return fit_logistic_density(x_original, sel.lambda1, work);
}

double eval_eta(const SsAnovaModel& model, const Vector& x_original) {
  Vector u(model.config.dim());
  for (int k = 0; k < model.config.dim(); ++k) {
    double lo = model.config.box(k, 0), hi = model.config.box(k, 1);
    if (x_original[k] < lo - 1e-12 || x_original[k] > hi + 1e-12)
      throw DataError("eval_eta: point outside the domain box");
    u[k] = (x_original[k] - lo) / (hi - lo);
  }
  return model.eta_unit(u);
}

double eval_log_density(const SsAnovaModel& model, const Vector& x_original) {
  Vector u = model.quad.to_unit(x_original);
  double eta = eval_eta(model, x_original);
  return eta + model.log_rho_unit(u) - model.log_norm - std::log(model.quad.volume());
}

double eval_density(const SsAnovaModel& model, const Vector& x_original) {
  // floor far below any statistical scale so deep tails never return exact 0
  return std::exp(std::max(eval_log_density(model, x_original), -700.0));
}

}  // namespace scg
