#pragma once

#include <cstdint>
#include <vector>

#include "splinecggm/quadrature.hpp"
#include "splinecggm/types.hpp"

namespace scg {

// Cubic-spline reproducing kernel pieces on [0, 1].
double spline_k1(double t);                     // t - 1/2
double spline_k2(double t);                     // (1/2) k1^2 - 1/24
double spline_k4(double t);                     // applied to |x - y|
double cubic_spline_kernel(double x, double y); // R1 = k2 k2 - k4(|x-y|)
double univariate_kernel(double x, double y);   // k1 k1 + R1 (piece used in products)

// Model space: null span {1, k1(x_k)}, one penalized term per main effect
// (cubic-spline kernel) and per included two-way interaction (product of the
// univariate pieces). theta_v holds per-term scale weights, mains first.
struct KernelConfig {
  Matrix box;  // d x 2
  std::vector<int> main_effects;
  std::vector<std::pair<int, int>> interactions;  // i < j
  Vector theta_v;

  int dim() const { return static_cast<int>(box.rows()); }
  int n_terms() const {
    return static_cast<int>(main_effects.size() + interactions.size());
  }
  void validate() const;

  static KernelConfig all_terms(const Matrix& box, bool with_interactions);
};

// Kernel evaluator over unit coordinates; `mask` selects a term subset.
class KernelEvaluator {
 public:
  explicit KernelEvaluator(const KernelConfig& config);

  double term(int t, const Vector& u, const Vector& v) const;
  double combined(const Vector& u, const Vector& v) const;
  double combined_masked(const Vector& u, const Vector& v,
                         const std::vector<bool>& term_mask) const;

  const KernelConfig& config() const { return *config_; }

 private:
  const KernelConfig* config_;
};

KernelEvaluator build_kernel(const KernelConfig& config);

// Reference density of the pseudo-likelihood. Uniform keeps the estimation
// target eta = log(f/rho) equal to the whole log density; GaussianProduct
// (per-dimension normal fit) and MarginalProduct (per-dimension Gaussian
// kernel density estimates) flatten the target and are far more efficient
// for peaked or multimodal data; JointKde (full product-kernel density
// estimate) additionally tracks joint structure and keeps the pseudo-risk
// aligned with the KL in hard multimodal regimes. The additive kinds keep
// -log rho inside the projection null space; the graph stage projects
// log f-hat with a constant reference either way.
enum class RhoKind { Uniform, GaussianProduct, MarginalProduct, JointKde };

// Fitted logistic density eta for X: f = e^eta rho / int e^eta rho.
struct SsAnovaModel {
  KernelConfig config;
  Matrix representers_unit;  // q x d
  Vector null_coef;          // constant + k1 per dimension
  Vector rep_coef;           // q
  double lambda1 = 0.0;
  QuadratureSpec quad;
  RhoKind rho_kind = RhoKind::Uniform;
  Vector rho_mean;        // unit coordinates, GaussianProduct only
  Vector rho_sd;
  Matrix rho_points;      // unit-coordinate KDE centers (marginal or joint KDE)
  Vector rho_bandwidth;   // per-dimension KDE bandwidths
  double rho_log_mass = 0.0;  // log int_box g(u) du of the unnormalized product
  double log_norm = 0.0;      // log int e^eta rho-bar du
  bool converged = false;
  int newton_iters = 0;
  double grad_norm = 0.0;
  bool clamped = false;
  std::uint64_t seed = 0;

  int q() const { return static_cast<int>(rep_coef.size()); }
  int m() const { return static_cast<int>(null_coef.size()); }

  double eta_unit(const Vector& u) const;
  // log of the (box-renormalized) reference density at unit coordinates
  double log_rho_unit(const Vector& u) const;
};

struct SsAnovaOptions {
  double box_margin = 0.05;
  int rep_count = 0;  // 0 -> ceil(10 n^{2/9}), capped at n
  int quad_nodes_per_dim = 24;
  int max_newton_iters = 50;
  double grad_tol = 1e-6;
  bool with_interactions = true;
  bool theta_rescale = false;
  Vector theta_override;  // fixed per-term weights when nonempty
  RhoKind rho = RhoKind::Uniform;
  Matrix box;  // empty -> data range with margin
  std::uint64_t seed = 0;
};

// Precomputed design for one representer set: basis values at the data, the
// penalty Gram, and the rho-means of every basis function.
struct SsAnovaDesign {
  KernelConfig config;
  Matrix x_unit;             // n x d data in unit coordinates
  Matrix representers_unit;  // q x d
  Matrix phi;                // n x m null basis at data
  Matrix xi;                 // n x q combined kernel vs representers
  Matrix qmat;               // q x q representer Gram of the penalized kernel
  Vector mu;                 // (m+q) rho-means of the basis
  Vector rho_weights;        // per-node quadrature weights of rho-bar, sum 1
  QuadratureSpec quad;

  int n() const { return static_cast<int>(phi.rows()); }
  int m() const { return static_cast<int>(phi.cols()); }
  int q() const { return static_cast<int>(xi.cols()); }
};

SsAnovaDesign make_design(const Matrix& x_original, const KernelConfig& config,
                          const Matrix& representers_unit, const QuadratureSpec& quad,
                          const Vector& rho_weights = {});

struct PseudoLik {
  double value = 0.0;
  Vector grad;
  Matrix hess;
  bool clamped = false;
};

// l1(eta) + (lambda1/2) c'Qc with eta = phi'd + xi'c, plus its gradient and
// Hessian in (d, c). The exponential is clamped at exp(+-40).
PseudoLik pseudo_loglik_l1(const SsAnovaDesign& design, const Vector& coef, double lambda1,
                           bool with_hessian = true);

SsAnovaModel fit_logistic_density(const Matrix& x_original, double lambda1,
                                  const SsAnovaOptions& opts = {});

struct Lambda1Selection {
  double lambda1 = 0.0;
  std::vector<double> grid;
  std::vector<double> cv_risk;
};

// 5-fold CV on the pseudo-likelihood risk; ties broken toward larger lambda1.
Lambda1Selection select_lambda1(const Matrix& x_original, const std::vector<double>& grid,
                                const SsAnovaOptions& opts = {}, int folds = 5);

// Full pipeline: optional pilot fit and theta_v rescale, CV selection of
// lambda1 on the default grid, final fit.
SsAnovaModel fit_density_auto(const Matrix& x_original, const SsAnovaOptions& opts = {});

// log-spaced over [1e-5, 10]; 13 points gives half-decade steps
std::vector<double> default_lambda1_grid(int n_points = 13);

double eval_eta(const SsAnovaModel& model, const Vector& x_original);
double eval_density(const SsAnovaModel& model, const Vector& x_original);
double eval_log_density(const SsAnovaModel& model, const Vector& x_original);

}  // namespace scg
