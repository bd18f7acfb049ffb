#include <doctest.h>

#include <cmath>

#include "splinecggm/cggm.hpp"
#include "splinecggm/rng.hpp"

using namespace scg;

namespace {

SufficientStats random_stats(int p, int d, int n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, d), y(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
    for (int j = 0; j < p; ++j) y(i, j) = 0.5 * rng.normal();
  }
  // correlate y with x a little so Theta matters
  if (d > 0) y.col(0) += 0.7 * x.col(0);
  SufficientStats s;
  s.n = n;
  s.sxx = x.transpose() * x / n;
  s.syy = y.transpose() * y / n;
  s.sxy = x.transpose() * y / n;
  return s;
}

Matrix random_spd(int p, std::uint64_t seed, double ridge = 0.5) {
  Rng rng(seed);
  Matrix a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  return a * a.transpose() / p + ridge * Matrix::Identity(p, p);
}

Matrix random_mat(int r, int c, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

ActiveSets full_active(int p, int d) {
  ActiveSets sets;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < p; ++j) sets.s_theta.emplace_back(i, j);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) sets.s_lambda.emplace_back(i, j);
  return sets;
}

// h_t evaluated from the printed formula, used by the finite-difference check
double surrogate_h(const SufficientStats& s, const Matrix& lambda_t, const Matrix& theta_t,
                   const Matrix& lambda) {
  Matrix sigma_t = chol_inverse(lambda_t);
  Eigen::LLT<Matrix> llt(lambda);
  double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  double val = -logdet + (s.syy * lambda).trace();
  if (theta_t.rows() > 0) {
    val += 2.0 * (s.sxy.transpose() * theta_t * sigma_t * lambda).trace();
    val += (sigma_t * lambda * sigma_t * theta_t.transpose() * s.sxx * theta_t).trace();
  }
  return val;
}

}  // namespace

TEST_CASE("neg_loglik_l2 closed forms") {
  const int p = 3;
  SufficientStats s;
  s.n = 10;
  s.syy = Matrix::Identity(p, p);
  s.sxx = Matrix::Zero(0, 0);
  s.sxy = Matrix::Zero(0, p);
  CHECK(neg_loglik_l2(s, Matrix::Identity(p, p), Matrix::Zero(0, p)) ==
        doctest::Approx(p).epsilon(1e-12));

  SufficientStats s1;
  s1.n = 5;
  s1.syy = Matrix::Constant(1, 1, 1.0);
  s1.sxx = Matrix::Constant(1, 1, 2.0);
  s1.sxy = Matrix::Constant(1, 1, 0.3);
  Matrix lam = Matrix::Constant(1, 1, 2.0);
  CHECK(neg_loglik_l2(s1, lam, Matrix::Zero(1, 1)) ==
        doctest::Approx(-std::log(2.0) + 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(neg_loglik_l2(s1, Matrix::Constant(1, 1, -1.0), Matrix::Zero(1, 1)),
                  DataError);
}

TEST_CASE("neg_loglik_l2 equals the per-observation Gaussian density sum") {
  const int p = 4, d = 2, n = 40;
  Rng rng(99);
  Matrix x = random_mat(n, d, 11);
  Matrix y = random_mat(n, p, 12, 0.8);
  SufficientStats s;
  s.n = n;
  s.sxx = x.transpose() * x / n;
  s.syy = y.transpose() * y / n;
  s.sxy = x.transpose() * y / n;

  Matrix lambda = random_spd(p, 13);
  Matrix theta = random_mat(d, p, 14, 0.4);

  // observation-loop oracle: -(2/n) sum log N(y_i; -L^-1 T' x_i, L^-1) - p log 2pi
  Eigen::LLT<Matrix> llt(lambda);
  double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    Vector mean = -llt.solve(theta.transpose() * x.row(i).transpose());
    Vector r = y.row(i).transpose() - mean;
    double logpdf = -0.5 * p * std::log(2 * M_PI) + 0.5 * logdet - 0.5 * r.dot(lambda * r);
    acc += logpdf;
  }
  double oracle = -2.0 / n * acc - p * std::log(2 * M_PI);
  CHECK(neg_loglik_l2(s, lambda, theta) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("grad_theta closed forms and finite differences") {
  const int p = 4, d = 3;
  auto s = random_stats(p, d, 80, 21);
  Matrix lambda = random_spd(p, 22);

  CHECK((grad_theta(s, lambda, Matrix::Zero(d, p)) - 2.0 * s.sxy).cwiseAbs().maxCoeff() <
        1e-13);

  SufficientStats s0 = s;
  s0.sxy.setZero();
  CHECK(grad_theta(s0, lambda, Matrix::Zero(d, p)).cwiseAbs().maxCoeff() == 0.0);

  Matrix theta = random_mat(d, p, 23, 0.3);
  Matrix g = grad_theta(s, lambda, theta);
  Matrix g_fd(d, p);
  const double h = 1e-5;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < p; ++j) {
      Matrix tp = theta, tm = theta;
      tp(i, j) += h;
      tm(i, j) -= h;
      g_fd(i, j) = (neg_loglik_l2(s, lambda, tp) - neg_loglik_l2(s, lambda, tm)) / (2 * h);
    }
  CHECK((g - g_fd).norm() / g_fd.norm() < 1e-6);
}

TEST_CASE("grad_h_lambda closed forms, MLE stationarity, finite differences") {
  const int p = 4, d = 2;
  auto s = random_stats(p, d, 300, 31);

  Matrix lambda = random_spd(p, 32);
  Matrix sigma = chol_inverse(lambda);
  CHECK((grad_h_lambda(s, lambda, Matrix::Zero(d, p)) - (s.syy - sigma)).cwiseAbs().maxCoeff() <
        1e-11);

  // at the closed-form MLE the surrogate gradient vanishes
  SolverOptions mle_opts;
  mle_opts.init = CggmInit::Mle;
  auto [lam_mle, th_mle] = initialize(s, mle_opts);
  CHECK(grad_h_lambda(s, lam_mle, th_mle).cwiseAbs().maxCoeff() < 1e-8);

  // symmetric-direction finite differences
  Matrix theta = random_mat(d, p, 33, 0.4);
  Matrix g = grad_h_lambda(s, lambda, theta);
  Matrix g_fd(p, p);
  const double h = 1e-5;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      Matrix dp = Matrix::Zero(p, p);
      dp(i, j) += 1.0;
      dp(j, i) += 1.0;  // diagonal gets 2
      if (i == j) dp(i, i) = 1.0;
      double up = surrogate_h(s, lambda, theta, lambda + h * dp);
      double dn = surrogate_h(s, lambda, theta, lambda - h * dp);
      double dir = (up - dn) / (2 * h);
      g_fd(i, j) = g_fd(j, i) = i == j ? dir : dir / 2.0;
    }
  CHECK((g - g_fd).norm() / g_fd.norm() < 1e-6);
}

TEST_CASE("soft_threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  for (double x : {-2.5, 0.0, 0.7}) CHECK(soft_threshold(x, 0.0) == x);
  CHECK_THROWS_AS(soft_threshold(1.0, -0.1), InvalidArgument);
}

TEST_CASE("update_theta_pass fixed points and descent") {
  const int p = 3, d = 2;
  auto s = random_stats(p, d, 100, 41);
  Matrix lambda = random_spd(p, 42);
  Matrix sigma = chol_inverse(lambda);
  auto active = full_active(p, d);

  // huge threshold keeps Theta at zero
  double lam3_huge = 2.0 * grad_theta(s, lambda, Matrix::Zero(d, p)).cwiseAbs().maxCoeff();
  Matrix still = update_theta_pass(s, sigma, Matrix::Zero(d, p), active, lam3_huge);
  CHECK(still.cwiseAbs().maxCoeff() == 0.0);

  // 1-d stationary point at -Sxy when lambda3 = 0
  SufficientStats s1;
  s1.n = 10;
  s1.sxx = Matrix::Constant(1, 1, 1.0);
  s1.syy = Matrix::Constant(1, 1, 1.0);
  s1.sxy = Matrix::Constant(1, 1, 0.35);
  Matrix th = Matrix::Zero(1, 1);
  Matrix eye = Matrix::Identity(1, 1);
  auto act1 = full_active(1, 1);
  for (int k = 0; k < 50; ++k) th = update_theta_pass(s1, eye, th, act1, 0.0);
  CHECK(th(0, 0) == doctest::Approx(-0.35).epsilon(1e-10));
}

TEST_CASE("update_theta_pass matches a per-coordinate golden-section oracle") {
  const int p = 4, d = 3;
  auto s = random_stats(p, d, 120, 51);
  Matrix lambda = random_spd(p, 52);
  Matrix sigma = chol_inverse(lambda);
  Matrix theta = random_mat(d, p, 53, 0.3);
  const double lambda3 = 0.1;
  auto active = full_active(p, d);

  double before = penalized_objective(s, lambda, theta, 0.0, lambda3);
  Matrix swept = update_theta_pass(s, sigma, theta, active, lambda3);
  double after = penalized_objective(s, lambda, swept, 0.0, lambda3);
  CHECK(after <= before + 1e-12 * std::abs(before));

  // replay the same Gauss-Seidel pass minimizing each scalar objective by
  // golden-section search
  auto objective_at = [&](const Matrix& th, int i, int j, double v) {
    Matrix t = th;
    t(i, j) = v;
    return neg_loglik_l2(s, lambda, t) + lambda3 * t.cwiseAbs().sum();
  };
  Matrix replay = theta;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (auto [i, j] : active.s_theta) {
    double a = replay(i, j) - 5.0, b = replay(i, j) + 5.0;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = objective_at(replay, i, j, c1), f2 = objective_at(replay, i, j, c2);
    for (int it = 0; it < 120; ++it) {
      if (f1 < f2) {
        b = c2;
        c2 = c1;
        f2 = f1;
        c1 = b - gr * (b - a);
        f1 = objective_at(replay, i, j, c1);
      } else {
        a = c1;
        c1 = c2;
        f1 = f2;
        c2 = a + gr * (b - a);
        f2 = objective_at(replay, i, j, c2);
      }
    }
    replay(i, j) = (a + b) / 2;
  }
  CHECK((swept - replay).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lambda_newton_direction solves the unpenalized Newton system") {
  for (std::uint64_t seed : {61u, 62u, 63u}) {
    const int p = 5, d = 2;
    auto s = random_stats(p, d, 150, seed);
    Matrix lambda = random_spd(p, seed + 100);
    Matrix sigma = chol_inverse(lambda);
    Matrix theta = random_mat(d, p, seed + 200, 0.3);
    auto active = full_active(p, d);
    Matrix dir = lambda_newton_direction(s, lambda, sigma, theta, active, 0.0, 2000);
    Matrix grad = grad_h_lambda(s, lambda, theta);
    Matrix expected = -lambda * grad * lambda;
    CHECK((dir - expected).norm() / expected.norm() < 1e-6);
  }
}

TEST_CASE("lambda_newton_direction is zero at a stationary point") {
  const int p = 3;
  SufficientStats s;
  s.n = 50;
  s.syy = Matrix::Identity(p, p);
  s.sxx = Matrix::Zero(0, 0);
  s.sxy = Matrix::Zero(0, p);
  Matrix lambda = Matrix::Identity(p, p);
  auto active = full_active(p, 0);
  Matrix dir = lambda_newton_direction(s, lambda, lambda, Matrix::Zero(0, p), active, 0.3, 50);
  CHECK(dir.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lambda_newton_direction matches a proximal-gradient oracle at p=2") {
  const int p = 2, d = 1;
  auto s = random_stats(p, d, 90, 71);
  Matrix lambda = random_spd(p, 72);
  Matrix sigma = chol_inverse(lambda);
  Matrix theta = random_mat(d, p, 73, 0.5);
  const double lambda2 = 0.05;
  auto active = full_active(p, d);
  Matrix dir = lambda_newton_direction(s, lambda, sigma, theta, active, lambda2, 5000);

  // slow projected/proximal gradient on the quadratic model
  Matrix grad = grad_h_lambda(s, lambda, theta);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  double lip = es.eigenvalues().maxCoeff();
  lip = lip * lip;
  double step = 1.0 / lip;
  Matrix delta = Matrix::Zero(p, p);
  for (int it = 0; it < 200000; ++it) {
    Matrix g = grad + sigma * delta * sigma;
    Matrix z = delta - step * g;
    Matrix next(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        if (i == j)
          next(i, j) = z(i, j);
        else
          next(i, j) = soft_threshold(lambda(i, j) + z(i, j), step * lambda2) - lambda(i, j);
      }
    next = ((next + next.transpose()) / 2.0).eval();
    if ((next - delta).cwiseAbs().maxCoeff() < 1e-13) {
      delta = next;
      break;
    }
    delta = next;
  }
  CHECK((dir - delta).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("armijo_step behavior") {
  const int p = 3, d = 1;
  auto s = random_stats(p, d, 100, 81);
  Matrix lambda = random_spd(p, 82);
  Matrix theta = random_mat(d, p, 83, 0.3);
  SolverOptions opts;

  // zero direction accepted at alpha = 1
  auto res0 = armijo_step(s, lambda, Matrix::Zero(p, p), theta, 0.1, opts);
  CHECK(res0.accepted);
  CHECK(res0.alpha == 1.0);
  CHECK((res0.lambda_next - lambda).cwiseAbs().maxCoeff() < 1e-14);

  // shrink step on the identity decreases the surrogate, full step accepted
  SufficientStats sy;
  sy.n = 30;
  sy.syy = 2.0 * Matrix::Identity(p, p);
  sy.sxx = Matrix::Zero(0, 0);
  sy.sxy = Matrix::Zero(0, p);
  Matrix eye = Matrix::Identity(p, p);
  Matrix dir = -0.4 * eye;  // toward the optimum Lambda = Syy^-1 = 0.5 I
  auto res1 = armijo_step(sy, eye, dir, Matrix::Zero(0, p), 0.0, opts);
  CHECK(res1.accepted);
  CHECK(res1.alpha == 1.0);

  // indefinite target forces backtracking yet stays positive definite
  Matrix bad = -2.0 * eye;
  auto res2 = armijo_step(sy, eye, bad, Matrix::Zero(0, p), 0.0, opts);
  CHECK(res2.accepted);
  CHECK(res2.alpha < 1.0);
  CHECK(is_positive_definite(res2.lambda_next));
}

TEST_CASE("compute_active_sets matches the definitions") {
  const int p = 4, d = 2;
  auto s = random_stats(p, d, 70, 91);
  Matrix lambda = Matrix::Identity(p, p);
  Matrix theta = Matrix::Zero(d, p);
  theta(0, 1) = 0.2;

  // huge penalties leave only the diagonal (plus nonzero entries)
  auto sets_inf = compute_active_sets(s, Matrix::Identity(p, p), Matrix::Zero(d, p), 1e9, 1e9);
  CHECK(sets_inf.s_theta.empty());
  CHECK(sets_inf.s_lambda.size() == static_cast<std::size_t>(p));
  for (auto [i, j] : sets_inf.s_lambda) CHECK(i == j);

  double lambda2 = 0.08, lambda3 = 0.15;
  auto sets = compute_active_sets(s, lambda, theta, lambda2, lambda3);
  Matrix gt = grad_theta(s, lambda, theta);
  Matrix gh = grad_h_lambda(s, lambda, theta);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < p; ++j) {
      bool expect = std::abs(gt(i, j)) > lambda3 || theta(i, j) != 0.0;
      CHECK(sets.theta_contains(i, j) == expect);
    }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      bool expect = i == j || std::abs(gh(i, j)) > lambda2 || lambda(i, j) != 0.0;
      CHECK(sets.lambda_contains(i, j) == expect);
    }

  // zero penalties activate every entry
  auto sets0 = compute_active_sets(s, lambda, theta, 0.0, 0.0);
  CHECK(sets0.s_theta.size() == static_cast<std::size_t>(d * p));
  CHECK(sets0.s_lambda.size() == static_cast<std::size_t>(p * (p + 1) / 2));
}

TEST_CASE("initialize closed forms") {
  // d = 0 reduces to Syy^-1
  SufficientStats s;
  s.n = 100;
  s.syy = random_spd(3, 101);
  s.sxx = Matrix::Zero(0, 0);
  s.sxy = Matrix::Zero(0, 3);
  SolverOptions opts;
  opts.init = CggmInit::Mle;
  auto [lam, th] = initialize(s, opts);
  CHECK((lam * s.syy - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(th.rows() == 0);

  // scalar case
  SufficientStats s1;
  s1.n = 100;
  s1.sxx = Matrix::Constant(1, 1, 1.0);
  s1.syy = Matrix::Constant(1, 1, 2.0);
  s1.sxy = Matrix::Constant(1, 1, 1.0);
  auto [l1, t1] = initialize(s1, opts);
  CHECK(l1(0, 0) == doctest::Approx(1.0));
  CHECK(t1(0, 0) == doctest::Approx(-1.0));

  // MLE requested with singular Sxx fails
  SufficientStats s2 = s1;
  s2.sxx.setZero();
  CHECK_THROWS_AS(initialize(s2, opts), DataError);
}

TEST_CASE("initialize equals the zero-penalty fixed point") {
  auto s = random_stats(5, 2, 500, 111);
  SolverOptions opts;
  opts.init = CggmInit::IdentityZero;  // start away from the MLE
  opts.tol_rel_obj = 1e-12;
  opts.max_outer_iters = 200;
  CggmModel fit = fit_cggm(s, 0.0, 0.0, opts);
  SolverOptions mle;
  mle.init = CggmInit::Mle;
  auto [lam, th] = initialize(s, mle);
  CHECK((fit.lambda_mat - lam).norm() / lam.norm() < 1e-5);
  CHECK((fit.theta_mat - th).norm() / th.norm() < 1e-5);
}

TEST_CASE("fit_cggm with huge penalties gives the diagonal solution") {
  auto s = random_stats(4, 2, 80, 121);
  CggmModel fit = fit_cggm(s, 1e6, 1e6);
  CHECK(fit.theta_mat.cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j)
        CHECK(fit.lambda_mat(i, i) == doctest::Approx(1.0 / s.syy(i, i)).epsilon(1e-6));
      else
        CHECK(fit.lambda_mat(i, j) == 0.0);
    }
}

TEST_CASE("fit_cggm invariants on a penalized fit") {
  auto s = random_stats(6, 3, 200, 131);
  SolverOptions opts;
  CggmModel fit = fit_cggm(s, 0.05, 0.05, opts);
  CHECK(fit.converged);
  CHECK(fit.kkt_residual <= opts.tol_kkt);
  CHECK(is_positive_definite(fit.lambda_mat));
  CHECK((fit.lambda_mat - fit.lambda_mat.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
    CHECK(fit.objective_trace[k] <=
          fit.objective_trace[k - 1] + 1e-12 * std::abs(fit.objective_trace[k - 1]));
  CHECK((fit.sigma_mat * fit.lambda_mat - Matrix::Identity(6, 6)).norm() /
            std::sqrt(6.0) <
        1e-8);
}

TEST_CASE("fit_cggm is invariant to row permutations of the data") {
  Rng rng(141);
  const int n = 60, d = 2, p = 3;
  Matrix x = random_mat(n, d, 142);
  Matrix y = random_mat(n, p, 143, 0.7);
  auto stats_of = [&](const Matrix& xx, const Matrix& yy) {
    SufficientStats s;
    s.n = n;
    s.sxx = xx.transpose() * xx / n;
    s.syy = yy.transpose() * yy / n;
    s.sxy = xx.transpose() * yy / n;
    return s;
  };
  auto perm = rng.permutation(n);
  Matrix xp(n, d), yp(n, p);
  for (int i = 0; i < n; ++i) {
    xp.row(i) = x.row(perm[i]);
    yp.row(i) = y.row(perm[i]);
  }
  CggmModel a = fit_cggm(stats_of(x, y), 0.08, 0.08);
  CggmModel b = fit_cggm(stats_of(xp, yp), 0.08, 0.08);
  CHECK((a.lambda_mat - b.lambda_mat).cwiseAbs().maxCoeff() < 2e-4);
  CHECK((a.theta_mat - b.theta_mat).cwiseAbs().maxCoeff() < 2e-4);
}

TEST_CASE("off-diagonal support shrinks along a warm-started lambda2 path") {
  auto s = random_stats(6, 2, 150, 151);
  SolverOptions opts;
  auto count_offdiag = [](const Matrix& m) {
    int c = 0;
    for (long i = 0; i < m.rows(); ++i)
      for (long j = 0; j < m.cols(); ++j)
        if (i != j && m(i, j) != 0.0) ++c;
    return c;
  };
  int prev = -1;
  for (double lam2 : {0.01, 0.03, 0.08, 0.2, 0.5}) {
    CggmModel fit = fit_cggm(s, lam2, 0.05, opts);
    int now = count_offdiag(fit.lambda_mat);
    if (prev >= 0) CHECK(now <= prev);
    prev = now;
    opts.init = CggmInit::Warm;
    opts.warm_lambda = fit.lambda_mat;
    opts.warm_theta = fit.theta_mat;
  }
}

TEST_CASE("degenerate X column freezes its Theta row") {
  auto s = random_stats(3, 2, 60, 161);
  s.sxx(1, 1) = 0.0;
  s.sxx(0, 1) = s.sxx(1, 0) = 0.0;
  s.sxy.row(1).setZero();
  CggmModel fit = fit_cggm(s, 0.02, 0.02);
  CHECK(fit.degenerate_x_cols == std::vector<int>{1});
  CHECK(fit.theta_mat.row(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-convergence within budget is reported, not hidden") {
  auto s = random_stats(8, 3, 120, 171);
  SolverOptions opts;
  opts.max_outer_iters = 1;
  opts.init = CggmInit::IdentityZero;
  CggmModel fit = fit_cggm(s, 0.01, 0.01, opts);
  CHECK_FALSE(fit.converged);
  CHECK(fit.kkt_residual > 0.0);
  CHECK(std::isfinite(fit.kkt_residual));
  CHECK(fit.iterations <= 1);
}

TEST_CASE("dataset validation rejects non-finite entries") {
  Dataset data;
  data.x.resize(2, 1);
  data.x << 0.0, std::numeric_limits<double>::quiet_NaN();
  data.y.resize(2, 1);
  data.y << 1.0, 2.0;
  data.column_names = {"x", "y"};
  CHECK_THROWS_AS(data.validate(), DataError);
}
