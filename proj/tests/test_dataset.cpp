#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "splinecggm/dataset.hpp"
#include "splinecggm/rng.hpp"

using namespace scg;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& body) {
  std::string path = "/tmp/" + name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("load_csv partitions columns") {
  auto path = write_temp_csv("scg_basic.csv", "a,b,c\n1,2,3\n4,5,6\n7,8,9\n");
  Dataset data = load_csv(path, std::vector<std::string>{"a"});
  CHECK(data.n() == 3);
  CHECK(data.d() == 1);
  CHECK(data.p() == 2);
  CHECK(data.x(1, 0) == 4.0);
  CHECK(data.y(2, 1) == 9.0);
  CHECK(data.column_names == std::vector<std::string>{"a", "b", "c"});

  Dataset pure = load_csv(path, std::vector<std::string>{});
  CHECK(pure.d() == 0);
  CHECK(pure.p() == 3);

  Dataset by_count = load_csv(path, 2);
  CHECK(by_count.d() == 2);
  CHECK(by_count.column_names[0] == "a");
}

TEST_CASE("load_csv reports parse and selection errors") {
  auto path = write_temp_csv("scg_bad.csv", "a,b\n1,2\n3,NA\n");
  try {
    load_csv(path, std::vector<std::string>{"a"});
    FAIL("expected a parse error");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("'b'") != std::string::npos);
  }
  auto ok = write_temp_csv("scg_ok.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(load_csv(ok, std::vector<std::string>{"zz"}), DataError);
  CHECK_THROWS_AS(load_csv(ok, std::vector<std::string>{"a", "a"}), DataError);
  CHECK_THROWS_AS(load_csv("/tmp/scg_no_such_file.csv", 0), DataError);
}

TEST_CASE("sufficient_stats hand cases") {
  Dataset data;
  data.x.resize(2, 1);
  data.x << 1, -1;
  data.y.resize(2, 1);
  data.y << 2, 0;
  data.column_names = {"x", "y"};
  auto s = sufficient_stats(data);
  CHECK(s.sxx(0, 0) == doctest::Approx(1.0));
  CHECK(s.syy(0, 0) == doctest::Approx(2.0));
  CHECK(s.sxy(0, 0) == doctest::Approx(1.0));

  data.y.setZero();
  auto s0 = sufficient_stats(data);
  CHECK(s0.syy.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s0.sxy.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sufficient_stats equals per-observation outer products") {
  Rng rng(41);
  const int n = 50, d = 2, p = 3;
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rng.normal();
    for (int j = 0; j < p; ++j) data.y(i, j) = rng.normal();
  }
  data.column_names = {"a", "b", "c", "e", "f"};
  auto s = sufficient_stats(data);

  // loop-based oracle
  Matrix sxx = Matrix::Zero(d, d), syy = Matrix::Zero(p, p), sxy = Matrix::Zero(d, p);
  for (int i = 0; i < n; ++i) {
    sxx += data.x.row(i).transpose() * data.x.row(i);
    syy += data.y.row(i).transpose() * data.y.row(i);
    sxy += data.x.row(i).transpose() * data.y.row(i);
  }
  CHECK((s.sxx - sxx / n).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((s.syy - syy / n).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((s.sxy - sxy / n).cwiseAbs().maxCoeff() < 1e-13);

  // permuting rows changes nothing
  Rng rng2(7);
  auto perm = rng2.permutation(n);
  Dataset shuffled = data.subset_rows(perm);
  auto s2 = sufficient_stats(shuffled);
  CHECK((s.sxx - s2.sxx).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.syy - s2.syy).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.sxy - s2.sxy).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("standardize behavior") {
  Dataset data;
  data.x.resize(3, 1);
  data.x << 1, 2, 3;
  data.y.resize(3, 1);
  data.y << 5, 6, 10;
  data.column_names = {"x", "y"};

  auto [std_data, rec] = standardize(data, StandardizeTarget::X);
  CHECK(rec.applied_x);
  CHECK_FALSE(rec.applied_y);
  CHECK(std_data.x(0, 0) == doctest::Approx(-1.0));
  CHECK(std_data.x(1, 0) == doctest::Approx(0.0));
  CHECK(std_data.x(2, 0) == doctest::Approx(1.0));

  // idempotence
  auto [twice, rec2] = standardize(std_data, StandardizeTarget::X);
  CHECK((twice.x - std_data.x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rec2.x_scale[0] == doctest::Approx(1.0));

  // population-variance convention: syy diagonal is (n-1)/n after scaling
  auto [both, rec3] = standardize(data, StandardizeTarget::Both);
  auto s = sufficient_stats(both);
  const double n = 3.0;
  CHECK(std::abs(s.syy(0, 0) - (n - 1) / n) < 1e-12);

  Dataset flat = data;
  flat.y.col(0).setConstant(4.0);
  CHECK_THROWS_AS(standardize(flat, StandardizeTarget::Y), DataError);
}

// independent AS R94 oracle built on Acklam's quantile with one Halley
// refinement step
namespace oracle {

double acklam_quantile(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // one Halley step against the exact CDF
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1 + x * u / 2);
}

double shapiro_w(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const int n = static_cast<int>(x.size());
  const int nn2 = n / 2;
  std::vector<double> m(nn2), aw(nn2);
  double summ2 = 0;
  for (int i = 0; i < nn2; ++i) {
    m[i] = acklam_quantile((i + 1 - 0.375) / (n + 0.25));
    summ2 += m[i] * m[i];
  }
  summ2 *= 2;
  double ssumm2 = std::sqrt(summ2);
  double rsn = 1.0 / std::sqrt(static_cast<double>(n));
  auto poly5 = [](const double* cc, double t) {
    return cc[0] + t * (cc[1] + t * (cc[2] + t * (cc[3] + t * (cc[4] + t * cc[5]))));
  };
  const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  double a1 = poly5(c1, rsn) - m[0] / ssumm2;
  double a2 = poly5(c2, rsn) - m[1] / ssumm2;
  double fac = std::sqrt((summ2 - 2 * m[0] * m[0] - 2 * m[1] * m[1]) /
                         (1 - 2 * a1 * a1 - 2 * a2 * a2));
  aw[0] = a1;
  aw[1] = a2;
  for (int i = 2; i < nn2; ++i) aw[i] = -m[i] / fac;
  double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  double ssq = 0;
  for (double v : x) ssq += (v - mean) * (v - mean);
  double num = 0;
  for (int i = 0; i < nn2; ++i) num += aw[i] * (x[n - 1 - i] - x[i]);
  return num * num / ssq;
}

}  // namespace oracle

TEST_CASE("shapiro_wilk W matches an independent Royston implementation") {
  Rng rng(2024);
  for (int n : {12, 25, 50, 200}) {
    std::vector<double> sample(n);
    Vector v(n);
    for (int i = 0; i < n; ++i) {
      sample[i] = rng.normal();
      v[i] = sample[i];
    }
    double w_impl = shapiro_wilk(v).w;
    double w_oracle = oracle::shapiro_w(sample);
    CHECK(std::abs(w_impl - w_oracle) < 1e-6);
  }
}

TEST_CASE("shapiro_wilk sanity on normal vs bimodal data") {
  Rng rng(5);
  const int n = 200;
  Vector normal(n), bimodal(n);
  for (int i = 0; i < n; ++i) {
    normal[i] = rng.normal();
    bimodal[i] = (rng.uniform() < 0.5 ? 3.0 : -3.0) + 0.1 * rng.normal();
  }
  auto rn = shapiro_wilk(normal);
  auto rb = shapiro_wilk(bimodal);
  CHECK(rn.p_value > 0.01);
  CHECK(rb.p_value < 1e-6);
  CHECK(rb.w < rn.w);
}

TEST_CASE("normality_rank finds the non-Gaussian column first") {
  Rng rng(77);
  const int n = 200;
  Dataset data;
  data.x.resize(n, 1);
  data.y.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    data.x(i, 0) = (rng.uniform() < 0.5 ? 3.0 : -3.0) + 0.1 * rng.normal();
    for (int j = 0; j < 3; ++j) data.y(i, j) = rng.normal();
  }
  data.column_names = {"mix", "g1", "g2", "g3"};

  auto top = normality_rank(data, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0] == 0);

  auto all = normality_rank(data, 4);
  CHECK(all.size() == 4);
  std::vector<int> seen = all;
  std::sort(seen.begin(), seen.end());
  CHECK(seen == std::vector<int>{0, 1, 2, 3});
  CHECK(all[0] == 0);

  Dataset tiny;
  tiny.x.resize(2, 1);
  tiny.x << 0, 1;
  tiny.y.resize(2, 1);
  tiny.y << 1, 0;
  tiny.column_names = {"a", "b"};
  CHECK_THROWS_AS(normality_rank(tiny, 1), DataError);
}
