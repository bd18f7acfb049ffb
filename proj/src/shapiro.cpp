#include <algorithm>
#include <cmath>
#include <vector>

#include "splinecggm/dataset.hpp"

namespace scg {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Wichura's algorithm AS 241, routine PPND16.
double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw InvalidArgument("normal_quantile: prob must be in (0,1)");
  static const double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4,  4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static const double b[8] = {
      1.0,                      4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3,  2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static const double c[8] = {
      1.42343711074968357734e0,  4.63033784615654529590e0,
      5.76949722146069140550e0,  3.64784832476320460504e0,
      1.27045825245236838258e0,  2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double d[8] = {
      1.0,                       2.05319162663775882187e0,
      1.67638483018380384940e0,  6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static const double e[8] = {
      6.65790464350110377720e0,  5.46378491116411436990e0,
      1.78482653991729133580e0,  2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {
      1.0,                       5.99832206555887937690e-1,
      1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  auto ratio = [](const double* num, const double* den, double r) {
    double n = num[7], m = den[7];
    for (int i = 6; i >= 0; --i) {
      n = n * r + num[i];
      m = m * r + den[i];
    }
    return n / m;
  };

  const double q = prob - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * ratio(a, b, r);
  }
  double r = q < 0 ? prob : 1.0 - prob;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    val = ratio(c, d, r - 1.6);
  } else {
    val = ratio(e, f, r - 5.0);
  }
  return q < 0 ? -val : val;
}

namespace {

double poly(const double* coef, int order, double x) {
  double v = coef[order - 1];
  for (int i = order - 2; i >= 0; --i) v = v * x + coef[i];
  return v;
}

}  // namespace

// Royston (1995), algorithm AS R94.
ShapiroWilkResult shapiro_wilk(const Vector& sample) {
  const int n = static_cast<int>(sample.size());
  if (n < 3 || n > 5000)
    throw DataError("shapiro_wilk: valid for 3 <= n <= 5000, got n=" + std::to_string(n));

  std::vector<double> x(sample.data(), sample.data() + n);
  std::sort(x.begin(), x.end());
  if (x[n - 1] - x[0] <= 0.0)
    throw DataError("shapiro_wilk: sample has zero range");

  const int nn2 = n / 2;
  std::vector<double> aw(nn2);
  if (n == 3) {
    aw[0] = std::sqrt(0.5);
  } else {
    static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    std::vector<double> m(nn2);
    double summ2 = 0.0;
    for (int i = 0; i < nn2; ++i) {
      m[i] = normal_quantile((i + 1 - 0.375) / (n + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(static_cast<double>(n));
    const double a1 = poly(c1, 6, rsn) - m[0] / ssumm2;
    int start;
    double fac;
    if (n > 5) {
      const double a2 = poly(c2, 6, rsn) - m[1] / ssumm2;
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      aw[0] = a1;
      aw[1] = a2;
      start = 2;
    } else {
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
      aw[0] = a1;
      start = 1;
    }
    for (int i = start; i < nn2; ++i) aw[i] = -m[i] / fac;
  }

  // W = (sum_i a_i (x_(n-1-i) - x_(i)))^2 / sum (x - xbar)^2
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ssq = 0.0;
  for (double v : x) ssq += (v - mean) * (v - mean);
  double num = 0.0;
  for (int i = 0; i < nn2; ++i) num += aw[i] * (x[n - 1 - i] - x[i]);
  double w = num * num / ssq;
  if (w > 1.0) w = 1.0;

  ShapiroWilkResult res;
  res.w = w;

  if (n == 3) {
    const double pi6 = 6.0 / M_PI;
    const double stqr = std::asin(std::sqrt(0.75));
    double pw = pi6 * (std::asin(std::sqrt(w)) - stqr);
    res.p_value = std::clamp(pw, 0.0, 1.0);
    return res;
  }

  double y = std::log(1.0 - w);
  double mval, sval;
  if (n <= 11) {
    static const double g[2] = {-2.273, 0.459};
    static const double c3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
    const double an = static_cast<double>(n);
    const double gamma = poly(g, 2, an);
    if (y >= gamma) {
      res.p_value = 1e-99;
      return res;
    }
    y = -std::log(gamma - y);
    mval = poly(c3, 4, an);
    sval = std::exp(poly(c4, 4, an));
  } else {
    static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static const double c6[3] = {-0.4803, -0.082676, 0.0030302};
    const double lx = std::log(static_cast<double>(n));
    mval = poly(c5, 4, lx);
    sval = std::exp(poly(c6, 3, lx));
  }
  res.p_value = 1.0 - normal_cdf((y - mval) / sval);
  return res;
}

}  // namespace scg
