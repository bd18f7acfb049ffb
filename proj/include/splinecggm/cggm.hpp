#pragma once

#include <optional>
#include <vector>

#include "splinecggm/dataset.hpp"
#include "splinecggm/types.hpp"

namespace scg {

// Fitted conditional Gaussian model Y|X=x ~ N(-Lambda^-1 Theta' x, Lambda^-1)
// with elementwise l1 penalties lambda2 (off-diagonal Lambda) and lambda3
// (Theta).
struct CggmModel {
  Matrix lambda_mat;  // p x p precision, symmetric positive definite
  Matrix theta_mat;   // d x p cross block
  Matrix sigma_mat;   // cached Lambda^-1
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  std::vector<double> objective_trace;  // penalized objective per outer iteration
  bool converged = false;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool no_progress = false;
  std::vector<int> degenerate_x_cols;  // Theta rows frozen at zero

  int p() const { return static_cast<int>(lambda_mat.rows()); }
  int d() const { return static_cast<int>(theta_mat.rows()); }
};

enum class CggmInit { Auto, IdentityZero, Mle, Warm };

struct SolverOptions {
  int max_outer_iters = 100;
  int max_theta_sweeps = 50;
  int max_newton_cd_sweeps = 50;
  double tol_rel_obj = 1e-6;
  double tol_theta_sweep = 1e-9;
  double armijo_beta = 0.5;    // in (0,1)
  double armijo_sigma = 0.25;  // in (0,0.5)
  int armijo_max_backtracks = 30;
  double tol_kkt = 1e-4;
  // The surrogate Lambda step does not descend the Eq.-(8) objective exactly:
  // near its fixed point the trajectory rises back by a few 1e-6..1e-4
  // relative after overshooting below. tol_obj_increase bounds the allowed
  // transient rise over the running minimum (relative); beyond it the step is
  // reverted and the fit stops with no_progress. Set to 0 for strictly
  // monotone mode (which can stall short of the fixed point).
  double tol_obj_increase = 1e-3;
  CggmInit init = CggmInit::Auto;
  Matrix warm_lambda;  // used when init == Warm
  Matrix warm_theta;

  void validate() const;
};

// Entries updated during a sweep. s_lambda is stored as upper-triangle pairs
// (i <= j) and is symmetric by construction; the diagonal is always active.
struct ActiveSets {
  std::vector<std::pair<int, int>> s_theta;
  std::vector<std::pair<int, int>> s_lambda;

  bool theta_contains(int i, int j) const;
  bool lambda_contains(int i, int j) const;  // symmetric membership
};

// l2(Theta,Lambda) = -log|Lambda| + tr(Syy Lambda + 2 Sxy' Theta
//                    + Lambda^-1 Theta' Sxx Theta).
double neg_loglik_l2(const SufficientStats& stats, const Matrix& lambda_mat,
                     const Matrix& theta_mat);

// l2 plus the two l1 penalty terms (off-diagonal for Lambda).
double penalized_objective(const SufficientStats& stats, const Matrix& lambda_mat,
                           const Matrix& theta_mat, double lambda2, double lambda3);

// grad_Theta l2 = 2 Sxy + 2 Sxx Theta Sigma
Matrix grad_theta(const SufficientStats& stats, const Matrix& lambda_mat,
                  const Matrix& theta_mat);

// Gradient of the frozen-mean surrogate h_t at Lambda_t:
//   Syy + Sigma Theta' Sxx Theta Sigma + 2 sym(Sigma Theta' Sxy) - Sigma.
Matrix grad_h_lambda(const SufficientStats& stats, const Matrix& lambda_t,
                     const Matrix& theta_t);

double soft_threshold(double x, double omega);

// One Gauss-Seidel sweep over s_theta in row-major order. sigma_mat is held
// fixed; the gradient coordinate is recomputed from the running Theta.
Matrix update_theta_pass(const SufficientStats& stats, const Matrix& sigma_mat,
                         const Matrix& theta_mat, const ActiveSets& active,
                         double lambda3);

// Coordinate descent for the regularized Newton direction, entries restricted
// to s_lambda; (i,j) and (j,i) move together and the diagonal is never
// thresholded. Runs at most `sweeps` passes.
Matrix lambda_newton_direction(const SufficientStats& stats, const Matrix& lambda_t,
                               const Matrix& sigma_t, const Matrix& theta_t,
                               const ActiveSets& active, double lambda2, int sweeps);

struct ArmijoResult {
  double alpha = 0.0;
  Matrix lambda_next;
  bool accepted = false;
  int backtracks = 0;
};

// Backtracking on the surrogate objective p_t = h_t + lambda2 |.|_1,off with a
// Cholesky positive-definiteness guard. alpha = 0 signals no progress.
ArmijoResult armijo_step(const SufficientStats& stats, const Matrix& lambda_t,
                         const Matrix& direction, const Matrix& theta_t,
                         double lambda2, const SolverOptions& opts);

ActiveSets compute_active_sets(const SufficientStats& stats, const Matrix& lambda_mat,
                               const Matrix& theta_mat, double lambda2, double lambda3);

// MLE start when well conditioned, otherwise (I, 0). Explicit Mle mode throws
// if Sxx or the conditional covariance is singular.
std::pair<Matrix, Matrix> initialize(const SufficientStats& stats, const SolverOptions& opts);

// Subgradient optimality residual of the backfitting fixed point: grad_theta
// for the Theta block and grad_h_lambda for the Lambda block (the algorithm's
// own working gradient), diagonal of Lambda unpenalized.
double kkt_residual(const SufficientStats& stats, const Matrix& lambda_mat,
                    const Matrix& theta_mat, double lambda2, double lambda3);

CggmModel fit_cggm(const SufficientStats& stats, double lambda2, double lambda3,
                   const SolverOptions& opts = {});

// Cholesky-based inverse; throws DataError if m is not positive definite.
Matrix chol_inverse(const Matrix& m);

bool is_positive_definite(const Matrix& m);

}  // namespace scg
