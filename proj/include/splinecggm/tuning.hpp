#pragma once

#include <vector>

#include "splinecggm/cggm.hpp"
#include "splinecggm/dataset.hpp"

namespace scg {

// Dense second-derivative blocks of f(S, Lambda, Theta) used by the LOOKL
// score, with column-major vec ordering throughout:
//   A = -2 Sigma (x) Sxx                      (pd x pd)
//   B =  2 Sigma (x) Sxx Theta Sigma          (pd x p^2)
//   C = -Sigma (x) (Sigma + 2 Sigma Theta' Sxx Theta Sigma)   (p^2 x p^2)
//   D = -2 Sigma Theta' (x) I_d               (pd x d^2)
//   E =  Sigma Theta' (x) Sigma Theta'        (p^2 x d^2)
struct LookklWorkspace {
  Matrix a, b, c, d, e;
  Matrix schur_lambda;  // -C + B' A^-1 B, factored for the dLambda solves
  Matrix schur_theta;   // -A + B C^-1 B', factored for the dTheta solves
  bool ridged = false;  // a Schur complement needed the ridge repair

  static LookklWorkspace build(const SufficientStats& stats, const CggmModel& model);
};

struct LookklOptions {
  // Restrict the Taylor system to nonzero entries of Theta and Lambda (plus
  // the Lambda diagonal). Partials at zero elements are dropped for penalized
  // fits; the dense variant is kept for unpenalized models and comparison.
  bool reduced_index = true;
};

// Closed-form leave-one-out approximation of the cross-validated KL risk.
double lookl_score(const Dataset& data, const CggmModel& model,
                   const LookklOptions& opts = {});

// Brute force: refits the model n times on leave-one-out data and averages
// the held-out negative log-likelihood.
double loocv_oracle(const Dataset& data, double lambda2, double lambda3,
                    const SolverOptions& opts = {});

double bic_score(const CggmModel& model, const SufficientStats& stats, long n);

double kfold_cv_score(const Dataset& data, double lambda2, double lambda3, int k,
                      std::uint64_t seed, const SolverOptions& opts = {});

// Held-out negative log-likelihood of one observation, matching l2 up to the
// 1/2 scale: -(1/2){log|Lambda| - y'Ly - 2x'Ty - x'T L^-1 T'x}.
double heldout_neg_loglik(const Vector& x, const Vector& y, const CggmModel& model);

enum class TuneCriterion { Lookl, Bic, Kfold, LoocvOracle };

struct SelectionResult {
  std::vector<std::pair<double, double>> grid;  // (lambda2, lambda3)
  Matrix scores;          // shaped n_lambda2 x n_lambda3 for product grids, else 1 x N
  std::pair<double, double> chosen;
  int chosen_index = -1;
  TuneCriterion criterion = TuneCriterion::Bic;
};

struct GridOptions {
  int n_lambda2 = 10;
  int n_lambda3 = 10;
  double lo_frac = 0.01;  // grid spans [lo_frac, 1] * max-gradient scale
  double hi_frac = 1.0;
  int kfold_k = 5;
  std::uint64_t seed = 0;
  SolverOptions solver;
};

// Log-spaced default grid anchored at the null-model gradient norms.
std::vector<std::pair<double, double>> default_grid(const SufficientStats& stats,
                                                    const GridOptions& opts);

// Evaluates the criterion at every grid point with warm starts in decreasing
// penalty order; ties broken toward larger (lambda2, lambda3).
SelectionResult grid_select(const Dataset& data,
                            const std::vector<std::pair<double, double>>& grid,
                            TuneCriterion criterion, const GridOptions& opts);

}  // namespace scg
