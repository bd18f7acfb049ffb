#include "splinecggm/cggm.hpp"

#include <algorithm>
#include <cmath>

namespace scg {

void SolverOptions::validate() const {
  require(max_outer_iters > 0 && max_theta_sweeps > 0 && max_newton_cd_sweeps > 0,
          "SolverOptions: iteration budgets must be positive");
  require(tol_rel_obj > 0 && tol_theta_sweep > 0 && tol_kkt > 0,
          "SolverOptions: tolerances must be positive");
  require(tol_obj_increase >= 0, "SolverOptions: tol_obj_increase must be >= 0");
  require(armijo_beta > 0 && armijo_beta < 1, "SolverOptions: beta must be in (0,1)");
  require(armijo_sigma > 0 && armijo_sigma < 0.5, "SolverOptions: sigma must be in (0,0.5)");
  require(armijo_max_backtracks >= 0, "SolverOptions: armijo_max_backtracks >= 0");
}

bool ActiveSets::theta_contains(int i, int j) const {
  return std::find(s_theta.begin(), s_theta.end(), std::make_pair(i, j)) != s_theta.end();
}

bool ActiveSets::lambda_contains(int i, int j) const {
  auto key = i <= j ? std::make_pair(i, j) : std::make_pair(j, i);
  return std::find(s_lambda.begin(), s_lambda.end(), key) != s_lambda.end();
}

bool is_positive_definite(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

Matrix chol_inverse(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw DataError("chol_inverse: matrix is not positive definite");
  Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  return ((inv + inv.transpose()) / 2.0).eval();
}

namespace {

double log_det_chol(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw DataError("log_det_chol: matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double offdiag_l1(const Matrix& m) {
  double s = 0.0;
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j)
      if (i != j) s += std::abs(m(i, j));
  return s;
}

}  // namespace

double neg_loglik_l2(const SufficientStats& stats, const Matrix& lambda_mat,
                     const Matrix& theta_mat) {
  Eigen::LLT<Matrix> llt(lambda_mat);
  if (llt.info() != Eigen::Success)
    throw DataError("neg_loglik_l2: Lambda is not positive definite");
  double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  double val = -logdet + (stats.syy * lambda_mat).trace();
  if (theta_mat.rows() > 0) {
    val += 2.0 * (stats.sxy.transpose() * theta_mat).trace();
    Matrix m = theta_mat.transpose() * stats.sxx * theta_mat;  // p x p
    val += llt.solve(m).trace();
  }
  return val;
}

double penalized_objective(const SufficientStats& stats, const Matrix& lambda_mat,
                           const Matrix& theta_mat, double lambda2, double lambda3) {
  return neg_loglik_l2(stats, lambda_mat, theta_mat) +
         lambda2 * offdiag_l1(lambda_mat) +
         lambda3 * theta_mat.cwiseAbs().sum();
}

Matrix grad_theta(const SufficientStats& stats, const Matrix& lambda_mat,
                  const Matrix& theta_mat) {
  if (theta_mat.rows() == 0) return theta_mat;
  Matrix sigma = chol_inverse(lambda_mat);
  return 2.0 * stats.sxy + 2.0 * stats.sxx * theta_mat * sigma;
}

Matrix grad_h_lambda(const SufficientStats& stats, const Matrix& lambda_t,
                     const Matrix& theta_t) {
  Matrix sigma = chol_inverse(lambda_t);
  Matrix g = stats.syy - sigma;
  if (theta_t.rows() > 0) {
    Matrix st = sigma * theta_t.transpose();               // p x d
    g += st * stats.sxx * st.transpose();                  // Sigma Th' Sxx Th Sigma
    Matrix cross = 2.0 * st * stats.sxy;                   // 2 Sigma Th' Sxy, p x p
    g += (cross + cross.transpose()) / 2.0;
  }
  return ((g + g.transpose()) / 2.0).eval();
}

double soft_threshold(double x, double omega) {
  require(omega >= 0, "soft_threshold: omega must be >= 0");
  double mag = std::abs(x) - omega;
  if (mag <= 0) return 0.0;
  return x > 0 ? mag : -mag;
}

Matrix update_theta_pass(const SufficientStats& stats, const Matrix& sigma_mat,
                         const Matrix& theta_mat, const ActiveSets& active,
                         double lambda3) {
  Matrix theta = theta_mat;
  Matrix prod = theta * sigma_mat;  // Theta Sigma, d x p, kept in sync
  for (const auto& [i, j] : active.s_theta) {
    const double sxx_ii = stats.sxx(i, i);
    if (sxx_ii <= 0.0) {
      // degenerate column: coordinate frozen at zero
      if (theta(i, j) != 0.0) {
        prod.row(i) -= theta(i, j) * sigma_mat.row(j);
        theta(i, j) = 0.0;
      }
      continue;
    }
    const double a = 2.0 * sigma_mat(j, j) * sxx_ii;
    const double b = 2.0 * stats.sxy(i, j) + 2.0 * stats.sxx.row(i).dot(prod.col(j));
    const double c = theta(i, j);
    const double next = soft_threshold(c - b / a, lambda3 / a);
    const double delta = next - c;
    if (delta != 0.0) {
      theta(i, j) = next;
      prod.row(i) += delta * sigma_mat.row(j);
    }
  }
  return theta;
}

Matrix lambda_newton_direction(const SufficientStats& stats, const Matrix& lambda_t,
                               const Matrix& sigma_t, const Matrix& theta_t,
                               const ActiveSets& active, double lambda2, int sweeps) {
  const int p = static_cast<int>(lambda_t.rows());
  Matrix grad = grad_h_lambda(stats, lambda_t, theta_t);
  Matrix delta = Matrix::Zero(p, p);
  Matrix u = Matrix::Zero(p, p);  // Delta * Sigma
  for (int s = 0; s < sweeps; ++s) {
    double max_step = 0.0;
    for (const auto& [i, j] : active.s_lambda) {
      const double a = sigma_t(i, j) * sigma_t(i, j) + sigma_t(i, i) * sigma_t(j, j);
      const double b = grad(i, j) + sigma_t.row(i).dot(u.col(j));  // (Sigma Delta Sigma)_ij
      const double c = lambda_t(i, j) + delta(i, j);
      const double next = i == j ? c - b / a : soft_threshold(c - b / a, lambda2 / a);
      const double mu = next - c;
      if (mu != 0.0) {
        delta(i, j) += mu;
        u.row(i) += mu * sigma_t.row(j);
        if (i != j) {
          delta(j, i) += mu;
          u.row(j) += mu * sigma_t.row(i);
        }
        max_step = std::max(max_step, std::abs(mu));
      }
    }
    if (max_step <= 1e-14 * (1.0 + lambda_t.cwiseAbs().maxCoeff())) break;
  }
  return delta;
}

namespace {

// h_t(Lambda) = -log|Lambda| + <Lambda, N_t> with N_t independent of Lambda.
Matrix surrogate_linear_term(const SufficientStats& stats, const Matrix& sigma_t,
                             const Matrix& theta_t) {
  Matrix n = stats.syy;
  if (theta_t.rows() > 0) {
    Matrix st = sigma_t * theta_t.transpose();  // p x d
    n += st * stats.sxx * st.transpose();
    Matrix cross = 2.0 * st * stats.sxy;
    n += (cross + cross.transpose()) / 2.0;
  }
  return ((n + n.transpose()) / 2.0).eval();
}

}  // namespace

ArmijoResult armijo_step(const SufficientStats& stats, const Matrix& lambda_t,
                         const Matrix& direction, const Matrix& theta_t,
                         double lambda2, const SolverOptions& opts) {
  Matrix sigma_t = chol_inverse(lambda_t);
  Matrix nmat = surrogate_linear_term(stats, sigma_t, theta_t);
  Matrix grad = nmat - sigma_t;

  auto surrogate = [&](const Matrix& lam) {
    return -log_det_chol(lam) + (nmat * lam).trace() + lambda2 * offdiag_l1(lam);
  };

  const double p0 = surrogate(lambda_t);
  const double decrease = (grad * direction).trace() +
                          lambda2 * offdiag_l1(lambda_t + direction) -
                          lambda2 * offdiag_l1(lambda_t);

  ArmijoResult res;
  double alpha = 1.0;
  for (int k = 0; k <= opts.armijo_max_backtracks; ++k) {
    Matrix cand = lambda_t + alpha * direction;
    cand = ((cand + cand.transpose()) / 2.0).eval();
    if (is_positive_definite(cand)) {
      double pv = surrogate(cand);
      if (pv <= p0 + alpha * opts.armijo_sigma * decrease + 1e-12 * std::abs(p0)) {
        res.alpha = alpha;
        res.lambda_next = cand;
        res.accepted = true;
        res.backtracks = k;
        return res;
      }
    }
    alpha *= opts.armijo_beta;
  }
  res.alpha = 0.0;
  res.lambda_next = lambda_t;
  res.accepted = false;
  res.backtracks = opts.armijo_max_backtracks + 1;
  return res;
}

ActiveSets compute_active_sets(const SufficientStats& stats, const Matrix& lambda_mat,
                               const Matrix& theta_mat, double lambda2, double lambda3) {
  ActiveSets sets;
  const int p = static_cast<int>(lambda_mat.rows());
  const int d = static_cast<int>(theta_mat.rows());
  if (d > 0) {
    Matrix gt = grad_theta(stats, lambda_mat, theta_mat);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < p; ++j)
        if (std::abs(gt(i, j)) > lambda3 || theta_mat(i, j) != 0.0)
          sets.s_theta.emplace_back(i, j);
  }
  Matrix gh = grad_h_lambda(stats, lambda_mat, theta_mat);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j)
      if (i == j || std::abs(gh(i, j)) > lambda2 || lambda_mat(i, j) != 0.0)
        sets.s_lambda.emplace_back(i, j);
  return sets;
}

std::pair<Matrix, Matrix> initialize(const SufficientStats& stats, const SolverOptions& opts) {
  const int p = stats.p();
  const int d = stats.d();

  auto identity_zero = [&]() {
    return std::make_pair(Matrix(Matrix::Identity(p, p)), Matrix(Matrix::Zero(d, p)));
  };

  if (opts.init == CggmInit::IdentityZero) return identity_zero();
  if (opts.init == CggmInit::Warm) {
    require(opts.warm_lambda.rows() == p && opts.warm_theta.rows() == d,
            "initialize: warm start dimensions do not match stats");
    return {opts.warm_lambda, opts.warm_theta};
  }

  auto mle = [&]() -> std::pair<Matrix, Matrix> {
    Matrix cond = stats.syy;
    Matrix sxx_inv_sxy;
    if (d > 0) {
      Eigen::LLT<Matrix> llt_xx(stats.sxx);
      if (llt_xx.info() != Eigen::Success)
        throw DataError("initialize: Sxx is singular, MLE start unavailable");
      sxx_inv_sxy = llt_xx.solve(stats.sxy);  // d x p
      cond -= stats.sxy.transpose() * sxx_inv_sxy;
    }
    cond = ((cond + cond.transpose()) / 2.0).eval();
    Matrix lambda0 = chol_inverse(cond);
    Matrix theta0 = d > 0 ? Matrix(-sxx_inv_sxy * lambda0) : Matrix::Zero(d, p);
    return {lambda0, theta0};
  };

  if (opts.init == CggmInit::Mle) return mle();

  // Auto: MLE when n is large enough and both factor matrices are well
  // conditioned, otherwise the identity/zero start.
  if (stats.n <= std::max(p, d)) return identity_zero();
  auto cond_number = [](const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0) return std::numeric_limits<double>::infinity();
    return hi / lo;
  };
  Matrix cond = stats.syy;
  if (d > 0) {
    if (cond_number(stats.sxx) >= 1e10) return identity_zero();
    Eigen::LLT<Matrix> llt_xx(stats.sxx);
    cond -= stats.sxy.transpose() * llt_xx.solve(stats.sxy);
    cond = ((cond + cond.transpose()) / 2.0).eval();
  }
  if (cond_number(cond) >= 1e10) return identity_zero();
  return mle();
}

double kkt_residual(const SufficientStats& stats, const Matrix& lambda_mat,
                    const Matrix& theta_mat, double lambda2, double lambda3) {
  double res = 0.0;
  if (theta_mat.rows() > 0) {
    Matrix gt = grad_theta(stats, lambda_mat, theta_mat);
    for (long i = 0; i < gt.rows(); ++i)
      for (long j = 0; j < gt.cols(); ++j) {
        if (stats.sxx(i, i) <= 0.0) continue;  // frozen coordinate
        double r = theta_mat(i, j) != 0.0
                       ? std::abs(gt(i, j) + lambda3 * (theta_mat(i, j) > 0 ? 1.0 : -1.0))
                       : std::max(0.0, std::abs(gt(i, j)) - lambda3);
        res = std::max(res, r);
      }
  }
  Matrix gh = grad_h_lambda(stats, lambda_mat, theta_mat);
  for (long i = 0; i < gh.rows(); ++i)
    for (long j = 0; j < gh.cols(); ++j) {
      double r;
      if (i == j) {
        r = std::abs(gh(i, j));
      } else if (lambda_mat(i, j) != 0.0) {
        r = std::abs(gh(i, j) + lambda2 * (lambda_mat(i, j) > 0 ? 1.0 : -1.0));
      } else {
        r = std::max(0.0, std::abs(gh(i, j)) - lambda2);
      }
      res = std::max(res, r);
    }
  return res;
}

CggmModel fit_cggm(const SufficientStats& stats, double lambda2, double lambda3,
                   const SolverOptions& opts) {
  opts.validate();
  require(lambda2 >= 0 && lambda3 >= 0, "fit_cggm: penalties must be >= 0");

  CggmModel model;
  model.lambda2 = lambda2;
  model.lambda3 = lambda3;

  auto [lambda, theta] = initialize(stats, opts);
  const int d = stats.d();
  for (int i = 0; i < d; ++i)
    if (stats.sxx(i, i) <= 0.0) {
      theta.row(i).setZero();
      model.degenerate_x_cols.push_back(i);
    }

  Matrix sigma = chol_inverse(lambda);
  double obj = penalized_objective(stats, lambda, theta, lambda2, lambda3);
  model.objective_trace.push_back(obj);
  double best_obj = obj;

  int t = 0;
  for (; t < opts.max_outer_iters; ++t) {
    ActiveSets active = compute_active_sets(stats, lambda, theta, lambda2, lambda3);
    if (!model.degenerate_x_cols.empty()) {
      std::erase_if(active.s_theta, [&](const std::pair<int, int>& ij) {
        return stats.sxx(ij.first, ij.first) <= 0.0;
      });
    }

    for (int sweep = 0; sweep < opts.max_theta_sweeps && !active.s_theta.empty(); ++sweep) {
      Matrix next = update_theta_pass(stats, sigma, theta, active, lambda3);
      double change = (next - theta).cwiseAbs().maxCoeff();
      theta = std::move(next);
      if (change < opts.tol_theta_sweep) break;
    }

    Matrix direction = lambda_newton_direction(stats, lambda, sigma, theta, active,
                                               lambda2, opts.max_newton_cd_sweeps);
    ArmijoResult step = armijo_step(stats, lambda, direction, theta, lambda2, opts);

    double new_obj;
    if (!step.accepted) {
      model.no_progress = true;
      new_obj = penalized_objective(stats, lambda, theta, lambda2, lambda3);
    } else {
      // Safety valve: the surrogate step may raise the Eq.-(8) objective
      // transiently. Allow a bounded rise over the running minimum and
      // otherwise backtrack further / revert.
      const double budget =
          best_obj + std::max(opts.tol_obj_increase, 1e-12) * std::max(1.0, std::abs(best_obj));
      Matrix cand = step.lambda_next;
      double alpha = step.alpha;
      new_obj = penalized_objective(stats, cand, theta, lambda2, lambda3);
      int extra = 0;
      while (new_obj > budget && extra < opts.armijo_max_backtracks) {
        alpha *= opts.armijo_beta;
        cand = lambda + alpha * direction;
        cand = ((cand + cand.transpose()) / 2.0).eval();
        if (is_positive_definite(cand))
          new_obj = penalized_objective(stats, cand, theta, lambda2, lambda3);
        ++extra;
      }
      if (new_obj > budget) {
        model.no_progress = true;
        new_obj = penalized_objective(stats, lambda, theta, lambda2, lambda3);
      } else {
        lambda = std::move(cand);
        sigma = chol_inverse(lambda);
      }
    }

    model.objective_trace.push_back(new_obj);
    best_obj = std::min(best_obj, new_obj);
    double kkt = kkt_residual(stats, lambda, theta, lambda2, lambda3);
    double rel_change = std::abs(obj - new_obj) / std::max(1.0, std::abs(obj));
    obj = new_obj;
    if (model.no_progress) break;
    if (rel_change < opts.tol_rel_obj && kkt <= opts.tol_kkt) {
      ++t;
      break;
    }
  }

  model.lambda_mat = ((lambda + lambda.transpose()) / 2.0).eval();
  model.theta_mat = theta;
  model.sigma_mat = chol_inverse(model.lambda_mat);
  model.iterations = t;
  model.kkt_residual = kkt_residual(stats, model.lambda_mat, model.theta_mat, lambda2, lambda3);
  model.converged = !model.no_progress && model.kkt_residual <= opts.tol_kkt;
  return model;
}

}  // namespace scg
