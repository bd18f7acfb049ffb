#include "splinecggm/tuning.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <map>

#include "splinecggm/rng.hpp"

namespace scg {

namespace {

// LLT with the spec'd ridge repair; sets `ridged` when the ridge was needed.
Eigen::LLT<Matrix> factor_with_ridge(Matrix m, bool& ridged, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  double eps = 1e-8 * m.trace() / static_cast<double>(m.rows());
  if (!(eps > 0)) eps = 1e-12;
  m.diagonal().array() += eps;
  llt.compute(m);
  ridged = true;
  if (llt.info() != Eigen::Success)
    throw DataError(std::string("lookl_score: ") + what +
                    " is numerically singular; consider larger penalties");
  return llt;
}

}  // namespace

LookklWorkspace LookklWorkspace::build(const SufficientStats& stats, const CggmModel& model) {
  const int p = model.p();
  const int d = model.d();
  require(static_cast<long>(p) * d <= 10000,
          "LookklWorkspace: p*d too large for dense assembly (cap 1e4)");
  LookklWorkspace ws;
  const Matrix& sigma = model.sigma_mat;
  if (d > 0) {
    Matrix sxx_th_sig = stats.sxx * model.theta_mat * sigma;  // d x p
    Matrix sig_tht = sigma * model.theta_mat.transpose();     // p x d
    ws.a = -2.0 * Eigen::kroneckerProduct(sigma, stats.sxx);
    ws.b = 2.0 * Eigen::kroneckerProduct(sigma, sxx_th_sig);
    Matrix inner = sigma + 2.0 * sig_tht * stats.sxx * sig_tht.transpose();
    ws.c = -Eigen::kroneckerProduct(sigma, inner);
    ws.d = -2.0 * Eigen::kroneckerProduct(sig_tht, Matrix::Identity(d, d));
    ws.e = Eigen::kroneckerProduct(sig_tht, sig_tht);
  } else {
    ws.c = -Eigen::kroneckerProduct(sigma, sigma);
  }
  if (d > 0) {
    Eigen::LLT<Matrix> neg_a = factor_with_ridge(-ws.a, ws.ridged, "-A");
    Eigen::LLT<Matrix> neg_c = factor_with_ridge(-ws.c, ws.ridged, "-C");
    Matrix sl = -ws.c + ws.b.transpose() * (-neg_a.solve(ws.b));
    Matrix st = -ws.a + ws.b * (-neg_c.solve(ws.b.transpose()));
    ws.schur_lambda = ((sl + sl.transpose()) / 2.0).eval();
    ws.schur_theta = ((st + st.transpose()) / 2.0).eval();
  } else {
    ws.schur_lambda = -ws.c;
  }
  return ws;
}

namespace {

struct LookklSystem {
  // dLambda_k = solve_lambda(P1 vxx + 2 P2 vxy - vyy)
  // dTheta_k  = solve_theta (P3 vxx + P4 vyy - 2 vxy)
  Eigen::LLT<Matrix> schur_lambda;
  Eigen::LLT<Matrix> schur_theta;
  Matrix p1, p2, p3, p4;
  bool has_theta = false;
  bool ridged = false;
  std::vector<int> idx_lambda;  // active vec indices (reduced mode)
  std::vector<int> idx_theta;
};

std::vector<int> all_indices(int n) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

Matrix select_rows_cols(const Matrix& m, const std::vector<int>& rows,
                        const std::vector<int>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

LookklSystem build_system(const SufficientStats& stats, const CggmModel& model,
                          const LookklOptions& opts) {
  const int p = model.p();
  const int d = model.d();
  LookklWorkspace ws = LookklWorkspace::build(stats, model);
  LookklSystem sys;
  sys.has_theta = d > 0;

  if (opts.reduced_index) {
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < p; ++i)
        if (i == j || model.lambda_mat(i, j) != 0.0)
          sys.idx_lambda.push_back(j * p + i);  // column-major vec
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < d; ++i)
        if (model.theta_mat(i, j) != 0.0) sys.idx_theta.push_back(j * d + i);
  } else {
    sys.idx_lambda = all_indices(p * p);
    if (d > 0) sys.idx_theta = all_indices(p * d);
  }
  const auto xx_idx = all_indices(d * d);

  Matrix c_sub = select_rows_cols(ws.c, sys.idx_lambda, sys.idx_lambda);
  if (sys.has_theta && !sys.idx_theta.empty()) {
    Matrix a_sub = select_rows_cols(ws.a, sys.idx_theta, sys.idx_theta);
    Matrix b_sub = select_rows_cols(ws.b, sys.idx_theta, sys.idx_lambda);
    Matrix d_sub = select_rows_cols(ws.d, sys.idx_theta, xx_idx);
    Matrix e_sub = select_rows_cols(ws.e, sys.idx_lambda, xx_idx);
    // A and C are negative definite; factor their negatives.
    Eigen::LLT<Matrix> neg_a = factor_with_ridge(-a_sub, sys.ridged, "-A");
    Eigen::LLT<Matrix> neg_c = factor_with_ridge(-c_sub, sys.ridged, "-C");
    Matrix ainv_b = -neg_a.solve(b_sub);            // A^-1 B
    Matrix cinv_bt = -neg_c.solve(b_sub.transpose());  // C^-1 B'

    Matrix schur_l = -c_sub + b_sub.transpose() * ainv_b;
    Matrix schur_t = -a_sub + b_sub * cinv_bt;
    sys.schur_lambda = factor_with_ridge((schur_l + schur_l.transpose()) / 2.0,
                                         sys.ridged, "Lambda Schur complement");
    sys.schur_theta = factor_with_ridge((schur_t + schur_t.transpose()) / 2.0,
                                        sys.ridged, "Theta Schur complement");
    const long nt = static_cast<long>(sys.idx_theta.size());
    const long nl = static_cast<long>(sys.idx_lambda.size());
    sys.p1 = e_sub - b_sub.transpose() * (-neg_a.solve(d_sub));       // E - B'A^-1 D
    sys.p2 = b_sub.transpose() * (-neg_a.solve(Matrix(Matrix::Identity(nt, nt))));  // B'A^-1
    sys.p3 = d_sub - b_sub * (-neg_c.solve(e_sub));                   // D - B C^-1 E
    sys.p4 = b_sub * (-neg_c.solve(Matrix(Matrix::Identity(nl, nl))));  // B C^-1
  } else {
    sys.has_theta = false;
    Matrix schur_l = -c_sub;
    sys.schur_lambda = factor_with_ridge((schur_l + schur_l.transpose()) / 2.0,
                                         sys.ridged, "Lambda Schur complement");
  }
  return sys;
}

Vector gather(const Vector& full, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = full[idx[i]];
  return out;
}

}  // namespace

double lookl_score(const Dataset& data, const CggmModel& model, const LookklOptions& opts) {
  data.validate();
  const int n = data.n();
  const int p = model.p();
  const int d = model.d();
  require(n >= 2, "lookl_score: need n >= 2");
  require(data.p() == p && data.d() == d, "lookl_score: model/data dimension mismatch");

  SufficientStats stats = sufficient_stats(data);
  LookklSystem sys = build_system(stats, model, opts);

  const Matrix& sigma = model.sigma_mat;
  const Matrix theta_sigma = d > 0 ? Matrix(model.theta_mat * sigma) : Matrix();

  // leading term: the in-sample average held-out likelihood, -(1/n) sum_k l~_k
  // evaluated at the fit, which equals l2/2.
  double score = 0.5 * neg_loglik_l2(stats, model.lambda_mat, model.theta_mat);

  double correction = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vector yk = data.y.row(k);
    const Vector xk = d > 0 ? Vector(data.x.row(k)) : Vector();

    // v = vec(S^(-k) - S) with the 1/n convention: -vec(S_k)/n.
    Matrix syy_k = yk * yk.transpose();
    Vector v_yy = -Eigen::Map<const Vector>(syy_k.data(), p * p) / n;

    Matrix u_mat = sigma - syy_k;
    if (d > 0) {
      Vector g = sigma * (model.theta_mat.transpose() * xk);  // Sigma Theta' x_k
      u_mat += g * g.transpose();
      Matrix sxx_k = xk * xk.transpose();
      Matrix sxy_k = xk * yk.transpose();
      Vector v_xx = -Eigen::Map<const Vector>(sxx_k.data(), d * d) / n;
      Vector v_xy = -Eigen::Map<const Vector>(sxy_k.data(), p * d) / n;
      Matrix w_mat = -2.0 * sxy_k - 2.0 * sxx_k * theta_sigma;
      Vector u_full = Eigen::Map<const Vector>(u_mat.data(), p * p);
      Vector w_full = Eigen::Map<const Vector>(w_mat.data(), p * d);

      if (sys.has_theta) {
        Vector rhs_l = sys.p1 * v_xx + 2.0 * (sys.p2 * gather(v_xy, sys.idx_theta)) -
                       gather(v_yy, sys.idx_lambda);
        Vector d_lambda = sys.schur_lambda.solve(rhs_l);
        Vector rhs_t = sys.p3 * v_xx + sys.p4 * gather(v_yy, sys.idx_lambda) -
                       2.0 * gather(v_xy, sys.idx_theta);
        Vector d_theta = sys.schur_theta.solve(rhs_t);
        correction += gather(u_full, sys.idx_lambda).dot(d_lambda) +
                      gather(w_full, sys.idx_theta).dot(d_theta);
      } else {
        Vector rhs_l = -gather(v_yy, sys.idx_lambda);
        correction += gather(u_full, sys.idx_lambda).dot(sys.schur_lambda.solve(rhs_l));
      }
    } else {
      Vector u_full = Eigen::Map<const Vector>(u_mat.data(), p * p);
      Vector rhs_l = -gather(v_yy, sys.idx_lambda);
      correction += gather(u_full, sys.idx_lambda).dot(sys.schur_lambda.solve(rhs_l));
    }
  }
  score -= correction / (2.0 * n);
  return score;
}

double heldout_neg_loglik(const Vector& x, const Vector& y, const CggmModel& model) {
  Eigen::LLT<Matrix> llt(model.lambda_mat);
  if (llt.info() != Eigen::Success)
    throw DataError("heldout_neg_loglik: Lambda not positive definite");
  double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  Vector resid = y;
  if (model.d() > 0) resid += model.sigma_mat * (model.theta_mat.transpose() * x);
  double quad = resid.dot(model.lambda_mat * resid);
  return 0.5 * (-logdet + quad);
}

double loocv_oracle(const Dataset& data, double lambda2, double lambda3,
                    const SolverOptions& opts) {
  data.validate();
  const int n = data.n();
  require(n >= 2, "loocv_oracle: need n >= 2");
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    Dataset rest = data.without_row(k);
    CggmModel fit;
    try {
      fit = fit_cggm(sufficient_stats(rest), lambda2, lambda3, opts);
    } catch (const std::exception& e) {
      throw DataError("loocv_oracle: leave-one-out fit failed at row " +
                      std::to_string(k) + ": " + e.what());
    }
    Vector xk = data.d() > 0 ? Vector(data.x.row(k)) : Vector();
    total += heldout_neg_loglik(xk, data.y.row(k), fit);
  }
  return total / n;
}

double bic_score(const CggmModel& model, const SufficientStats& stats, long n) {
  const double nd = static_cast<double>(n);
  double fit_term = nd * neg_loglik_l2(stats, model.lambda_mat, model.theta_mat);
  const double tol = 1e-10;
  long xi_lambda = 0;
  for (long i = 0; i < model.lambda_mat.rows(); ++i)
    for (long j = 0; j < model.lambda_mat.cols(); ++j)
      if (i != j && std::abs(model.lambda_mat(i, j)) > tol) ++xi_lambda;
  long xi_theta = 0;
  for (long i = 0; i < model.theta_mat.rows(); ++i)
    for (long j = 0; j < model.theta_mat.cols(); ++j)
      if (std::abs(model.theta_mat(i, j)) > tol) ++xi_theta;
  return fit_term + std::log(nd) * (xi_lambda / 2.0 + static_cast<double>(xi_theta));
}

namespace {

std::vector<std::vector<int>> make_folds(int n, int k, std::uint64_t seed) {
  Rng rng(derive_stream(seed, 0x6f6c64u));
  auto perm = rng.permutation(n);
  std::vector<std::vector<int>> folds(k);
  for (int i = 0; i < n; ++i) folds[i % k].push_back(perm[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace

double kfold_cv_score(const Dataset& data, double lambda2, double lambda3, int k,
                      std::uint64_t seed, const SolverOptions& opts) {
  data.validate();
  const int n = data.n();
  require(k >= 2 && k <= n, "kfold_cv_score: need 2 <= k <= n");
  auto folds = make_folds(n, k, seed);
  double total = 0.0;
  long count = 0;
  for (const auto& fold : folds) {
    if (fold.empty()) throw DataError("kfold_cv_score: empty fold");
    std::vector<bool> held(n, false);
    for (int i : fold) held[i] = true;
    std::vector<int> train;
    for (int i = 0; i < n; ++i)
      if (!held[i]) train.push_back(i);
    CggmModel fit = fit_cggm(sufficient_stats(data.subset_rows(train)), lambda2, lambda3, opts);
    for (int i : fold) {
      Vector xi = data.d() > 0 ? Vector(data.x.row(i)) : Vector();
      total += heldout_neg_loglik(xi, data.y.row(i), fit);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

std::vector<std::pair<double, double>> default_grid(const SufficientStats& stats,
                                                    const GridOptions& opts) {
  const int p = stats.p();
  // Null model: diagonal Lambda matched to Syy, Theta = 0.
  Matrix lambda0 = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) lambda0(i, i) = 1.0 / std::max(stats.syy(i, i), 1e-12);
  Matrix theta0 = Matrix::Zero(stats.d(), p);
  Matrix gh = grad_h_lambda(stats, lambda0, theta0);
  double lam2_max = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j) lam2_max = std::max(lam2_max, std::abs(gh(i, j)));
  double lam3_max = stats.d() > 0 ? 2.0 * stats.sxy.cwiseAbs().maxCoeff() : 0.0;
  if (lam2_max <= 0) lam2_max = 1.0;
  if (lam3_max <= 0) lam3_max = 1.0;

  auto logspace = [](double lo, double hi, int m) {
    std::vector<double> v(m);
    if (m == 1) {
      v[0] = hi;
      return v;
    }
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < m; ++i)
      v[i] = std::exp(llo + (lhi - llo) * i / (m - 1));
    return v;
  };
  auto l2s = logspace(opts.lo_frac * lam2_max, opts.hi_frac * lam2_max, opts.n_lambda2);
  auto l3s = logspace(opts.lo_frac * lam3_max, opts.hi_frac * lam3_max, opts.n_lambda3);
  std::vector<std::pair<double, double>> grid;
  for (double a : l2s)
    for (double b : l3s) grid.emplace_back(a, b);
  return grid;
}

SelectionResult grid_select(const Dataset& data,
                            const std::vector<std::pair<double, double>>& grid,
                            TuneCriterion criterion, const GridOptions& opts) {
  require(!grid.empty(), "grid_select: empty grid");
  SufficientStats stats = sufficient_stats(data);

  // Fit order: decreasing penalties so warm starts carry along the path.
  std::vector<int> order(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return grid[a] > grid[b]; });

  std::vector<double> scores(grid.size());
  std::map<std::pair<double, double>, double> memo;  // duplicate points score once
  SolverOptions solver = opts.solver;
  for (int idx : order) {
    const auto [l2, l3] = grid[idx];
    if (auto it = memo.find(grid[idx]); it != memo.end()) {
      scores[idx] = it->second;
      continue;
    }
    CggmModel fit;
    try {
      fit = fit_cggm(stats, l2, l3, solver);
      switch (criterion) {
        case TuneCriterion::Lookl:
          scores[idx] = lookl_score(data, fit);
          break;
        case TuneCriterion::Bic:
          scores[idx] = bic_score(fit, stats, stats.n);
          break;
        case TuneCriterion::Kfold:
          scores[idx] = kfold_cv_score(data, l2, l3, opts.kfold_k, opts.seed, opts.solver);
          break;
        case TuneCriterion::LoocvOracle:
          scores[idx] = loocv_oracle(data, l2, l3, opts.solver);
          break;
      }
    } catch (const std::exception& e) {
      throw DataError("grid_select: failure at (lambda2=" + std::to_string(l2) +
                      ", lambda3=" + std::to_string(l3) + "): " + e.what());
    }
    memo[grid[idx]] = scores[idx];
    solver.init = CggmInit::Warm;
    solver.warm_lambda = fit.lambda_mat;
    solver.warm_theta = fit.theta_mat;
  }

  int best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (scores[i] < scores[best] ||
        (scores[i] == scores[best] && grid[i] > grid[best]))
      best = static_cast<int>(i);
  }

  SelectionResult res;
  res.grid = grid;
  res.scores = Eigen::Map<const Matrix>(scores.data(), 1, scores.size());
  res.chosen = grid[best];
  res.chosen_index = best;
  res.criterion = criterion;
  return res;
}

}  // namespace scg
