#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

#include "splinecggm/rng.hpp"
#include "splinecggm/tuning.hpp"

using namespace scg;

namespace {

Dataset random_dataset(int n, int d, int p, std::uint64_t seed, double couple = 0.6) {
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rng.normal();
    for (int j = 0; j < p; ++j) data.y(i, j) = 0.8 * rng.normal();
  }
  if (d > 0)
    for (int j = 0; j < std::min(d, p); ++j) data.y.col(j) += couple * data.x.col(j);
  for (int j = 0; j < d; ++j) data.column_names.push_back("x" + std::to_string(j));
  for (int j = 0; j < p; ++j) data.column_names.push_back("y" + std::to_string(j));
  return data;
}

}  // namespace

TEST_CASE("lookl reduces to the GACV formula when d = 0") {
  const int n = 25, p = 3;
  Dataset data = random_dataset(n, 0, p, 301);
  SufficientStats stats = sufficient_stats(data);
  CggmModel fit = fit_cggm(stats, 0.05, 0.0);

  LookklOptions dense;
  dense.reduced_index = false;
  double score = lookl_score(data, fit, dense);

  // printed reduction: -(1/n) sum l~_k at the fit plus the u' (L (x) L) v term
  Matrix lambda = fit.lambda_mat;
  Matrix sigma = fit.sigma_mat;
  Matrix lkron = Eigen::kroneckerProduct(lambda, lambda);
  double lead = 0.5 * neg_loglik_l2(stats, lambda, fit.theta_mat);
  double corr = 0.0;
  for (int k = 0; k < n; ++k) {
    Vector yk = data.y.row(k);
    Matrix syyk = yk * yk.transpose();
    Matrix u = sigma - syyk;
    Matrix vm = -syyk / n;  // S^(-k) - S with the 1/n convention
    Vector uv = Eigen::Map<const Vector>(u.data(), p * p);
    Vector vv = Eigen::Map<const Vector>(vm.data(), p * p);
    corr += uv.dot(lkron * vv);
  }
  double gacv = lead + corr / (2.0 * n);
  CHECK(std::abs(score - gacv) < 1e-10 * std::max(1.0, std::abs(gacv)));
}

TEST_CASE("lookl workspace blocks satisfy the Kronecker vec identity") {
  Dataset data = random_dataset(40, 2, 3, 311);
  SufficientStats stats = sufficient_stats(data);
  CggmModel fit = fit_cggm(stats, 0.02, 0.02);
  auto ws = LookklWorkspace::build(stats, fit);

  const int p = 3, d = 2;
  Rng rng(312);
  Matrix mdp(d, p), mpp(p, p), mdd(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < p; ++j) mdp(i, j) = rng.normal();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) mpp(i, j) = rng.normal();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) mdd(i, j) = rng.normal();
  Matrix sigma = fit.sigma_mat;
  Matrix theta = fit.theta_mat;
  Matrix sig_tht = sigma * theta.transpose();

  auto vec = [](const Matrix& m) {
    return Vector(Eigen::Map<const Vector>(m.data(), m.size()));
  };
  // (X (x) Y) vec(M) = vec(Y M X')
  Matrix a_expect = -2.0 * stats.sxx * mdp * sigma;
  CHECK((ws.a * vec(mdp) - vec(a_expect)).cwiseAbs().maxCoeff() < 1e-10);
  Matrix b_expect = 2.0 * (stats.sxx * theta * sigma) * mpp * sigma;
  CHECK((ws.b * vec(mpp) - vec(b_expect)).cwiseAbs().maxCoeff() < 1e-10);
  Matrix inner = sigma + 2.0 * sig_tht * stats.sxx * sig_tht.transpose();
  Matrix c_expect = -inner * mpp * sigma;
  CHECK((ws.c * vec(mpp) - vec(c_expect)).cwiseAbs().maxCoeff() < 1e-10);
  Matrix d_expect = -2.0 * mdd * sig_tht.transpose();
  CHECK((ws.d * vec(mdd) - vec(d_expect)).cwiseAbs().maxCoeff() < 1e-10);
  Matrix e_expect = sig_tht * mdd * sig_tht.transpose();
  CHECK((ws.e * vec(mdd) - vec(e_expect)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("lookl correction halves when every row is duplicated") {
  Dataset data = random_dataset(20, 2, 3, 321);
  SufficientStats stats = sufficient_stats(data);
  CggmModel fit = fit_cggm(stats, 0.05, 0.05);

  Dataset doubled;
  doubled.column_names = data.column_names;
  doubled.x.resize(2 * data.n(), data.d());
  doubled.y.resize(2 * data.n(), data.p());
  doubled.x << data.x, data.x;
  doubled.y << data.y, data.y;

  double base = 0.5 * neg_loglik_l2(stats, fit.lambda_mat, fit.theta_mat);
  double corr_single = lookl_score(data, fit) - base;
  double corr_double = lookl_score(doubled, fit) - base;
  CHECK(corr_double == doctest::Approx(corr_single / 2.0).epsilon(1e-10));
}

TEST_CASE("lookl tracks the brute-force LOOCV oracle") {
  const int n = 30, p = 4, d = 2;
  std::vector<double> lambdas = {0.02, 0.06, 0.18, 0.54, 1.2};
  for (std::uint64_t seed : {1001u, 1002u}) {
    Dataset data = random_dataset(n, d, p, seed, 1.0);
    data.y.col(2) += 0.5 * data.y.col(3);
    SufficientStats stats = sufficient_stats(data);
    std::size_t best_fast = 0, best_slow = 0;
    double fast_best = 1e300, slow_best = 1e300;
    for (std::size_t g = 0; g < lambdas.size(); ++g) {
      CggmModel fit = fit_cggm(stats, lambdas[g], lambdas[g]);
      double fast = lookl_score(data, fit);
      double slow = loocv_oracle(data, lambdas[g], lambdas[g]);
      CHECK(std::abs(fast - slow) / std::abs(slow) < 0.05);
      if (fast < fast_best) {
        fast_best = fast;
        best_fast = g;
      }
      if (slow < slow_best) {
        slow_best = slow;
        best_slow = g;
      }
    }
    CHECK(best_fast == best_slow);
  }
}

TEST_CASE("loocv oracle trivial cases") {
  // two identical observations with heavy penalties
  Dataset data;
  data.x.resize(2, 1);
  data.x << 0.7, 0.7;
  data.y.resize(2, 2);
  data.y << 1.0, -0.5, 1.0, -0.5;
  data.column_names = {"x", "y1", "y2"};
  double score = loocv_oracle(data, 1e6, 1e6);
  CggmModel single = fit_cggm(sufficient_stats(data.without_row(0)), 1e6, 1e6);
  double fold = heldout_neg_loglik(data.x.row(0), data.y.row(0), single);
  CHECK(score == doctest::Approx(fold).epsilon(1e-12));

  // permutation invariance
  Dataset big = random_dataset(12, 1, 2, 331);
  double a = loocv_oracle(big, 0.1, 0.1);
  Rng rng(332);
  Dataset shuffled = big.subset_rows(rng.permutation(big.n()));
  double b = loocv_oracle(shuffled, 0.1, 0.1);
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("loocv optimism is non-negative on average") {
  double mean_gap = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Dataset data = random_dataset(20, 1, 3, 500 + s);
    SufficientStats stats = sufficient_stats(data);
    CggmModel fit = fit_cggm(stats, 0.05, 0.05);
    double in_sample = 0.5 * neg_loglik_l2(stats, fit.lambda_mat, fit.theta_mat);
    mean_gap += loocv_oracle(data, 0.05, 0.05) - in_sample;
  }
  CHECK(mean_gap / seeds >= 0.0);
}

TEST_CASE("bic_score pieces") {
  Dataset data = random_dataset(50, 2, 4, 341);
  SufficientStats stats = sufficient_stats(data);

  CggmModel diag = fit_cggm(stats, 1e6, 1e6);
  double b0 = bic_score(diag, stats, stats.n);
  CHECK(b0 == doctest::Approx(stats.n * neg_loglik_l2(stats, diag.lambda_mat,
                                                      diag.theta_mat)));

  // adding one symmetric off-diagonal pair costs exactly log n
  CggmModel bumped = diag;
  bumped.lambda_mat(0, 1) = bumped.lambda_mat(1, 0) = 1e-3;
  double fit_term = stats.n * neg_loglik_l2(stats, bumped.lambda_mat, bumped.theta_mat);
  CHECK(bic_score(bumped, stats, stats.n) - fit_term ==
        doctest::Approx(std::log(static_cast<double>(stats.n))));

  CggmModel fit = fit_cggm(stats, 0.05, 0.05);
  double braces = bic_score(fit, stats, stats.n);
  long xi_l = 0, xi_t = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j && std::abs(fit.lambda_mat(i, j)) > 1e-10) ++xi_l;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(fit.theta_mat(i, j)) > 1e-10) ++xi_t;
  double expected = stats.n * neg_loglik_l2(stats, fit.lambda_mat, fit.theta_mat) +
                    std::log(static_cast<double>(stats.n)) * (xi_l / 2.0 + xi_t);
  CHECK(braces == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kfold with k = n reproduces the LOOCV oracle") {
  Dataset data = random_dataset(14, 1, 2, 351);
  double loo = loocv_oracle(data, 0.08, 0.08);
  double k_n_a = kfold_cv_score(data, 0.08, 0.08, data.n(), 1);
  double k_n_b = kfold_cv_score(data, 0.08, 0.08, data.n(), 999);
  CHECK(k_n_a == doctest::Approx(loo).epsilon(1e-12));
  CHECK(k_n_a == doctest::Approx(k_n_b).epsilon(1e-14));  // seed-free at k = n
}

TEST_CASE("grid_select basics") {
  Dataset data = random_dataset(40, 1, 3, 361);
  GridOptions opts;
  opts.seed = 5;

  std::vector<std::pair<double, double>> one = {{0.1, 0.1}};
  auto sel = grid_select(data, one, TuneCriterion::Bic, opts);
  CHECK(sel.chosen == one[0]);

  std::vector<std::pair<double, double>> dup = {{0.1, 0.1}, {0.2, 0.05}, {0.1, 0.1}};
  auto sel2 = grid_select(data, dup, TuneCriterion::Bic, opts);
  CHECK(sel2.scores(0, 0) == doctest::Approx(sel2.scores(0, 2)).epsilon(1e-12));

  // determinism across repeated calls, both criteria recorded and reproducible
  auto bic1 = grid_select(data, dup, TuneCriterion::Bic, opts);
  auto bic2 = grid_select(data, dup, TuneCriterion::Bic, opts);
  CHECK(bic1.chosen == bic2.chosen);
  auto cv1 = grid_select(data, dup, TuneCriterion::Kfold, opts);
  auto cv2 = grid_select(data, dup, TuneCriterion::Kfold, opts);
  CHECK(cv1.chosen == cv2.chosen);
  for (long i = 0; i < cv1.scores.size(); ++i)
    CHECK(cv1.scores(0, i) == doctest::Approx(cv2.scores(0, i)).epsilon(1e-14));
}

TEST_CASE("reduced-index lookl equals the full version on a dense fit") {
  Dataset data = random_dataset(60, 1, 3, 371);
  SufficientStats stats = sufficient_stats(data);
  CggmModel mle = fit_cggm(stats, 0.0, 0.0);  // dense: every index active
  LookklOptions full, reduced;
  reduced.reduced_index = true;
  CHECK(lookl_score(data, mle, full) ==
        doctest::Approx(lookl_score(data, mle, reduced)).epsilon(1e-12));

  // with sparsity both variants are finite and close
  CggmModel sparse = fit_cggm(stats, 0.1, 0.1);
  double a = lookl_score(data, sparse, full);
  double b = lookl_score(data, sparse, reduced);
  CHECK(std::isfinite(a));
  CHECK(std::isfinite(b));
}
