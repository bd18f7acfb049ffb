#include "splinecggm/quadrature.hpp"

#include <cmath>

#include "splinecggm/rng.hpp"

namespace scg {

double QuadratureSpec::volume() const {
  double v = 1.0;
  for (int k = 0; k < dim(); ++k) v *= box(k, 1) - box(k, 0);
  return v;
}

Vector QuadratureSpec::to_original(const Vector& unit) const {
  Vector x(dim());
  for (int k = 0; k < dim(); ++k) x[k] = box(k, 0) + unit[k] * (box(k, 1) - box(k, 0));
  return x;
}

Vector QuadratureSpec::to_unit(const Vector& original) const {
  Vector u(dim());
  for (int k = 0; k < dim(); ++k) {
    double w = box(k, 1) - box(k, 0);
    u[k] = w > 0 ? (original[k] - box(k, 0)) / w : 0.5;
  }
  return u;
}

double QuadratureSpec::integrate_rho(const std::function<double(const Vector&)>& f_unit) const {
  double s = 0.0;
  for (long i = 0; i < size(); ++i) s += weights[i] * f_unit(nodes.row(i));
  return s;
}

double QuadratureSpec::integrate(const std::function<double(const Vector&)>& f_original) const {
  const double vol = volume();
  double s = 0.0;
  for (long i = 0; i < size(); ++i) s += weights[i] * f_original(to_original(nodes.row(i)));
  return s * vol;
}

// Newton iteration on the Legendre recurrence (roots are symmetric).
void gauss_legendre_unit(int m, Vector& nodes, Vector& weights) {
  require(m >= 1, "gauss_legendre_unit: need m >= 1");
  nodes.resize(m);
  weights.resize(m);
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < m; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2 * j + 1) * z * p2 - j * p3) / (j + 1);
      }
      pp = m * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    // map from [-1,1] to [0,1]
    nodes[i] = 0.5 * (1.0 - z);
    nodes[m - 1 - i] = 0.5 * (1.0 + z);
    double w = 1.0 / ((1.0 - z * z) * pp * pp);
    weights[i] = w;
    weights[m - 1 - i] = w;
  }
}

QuadratureSpec make_tensor_quadrature(const Matrix& box, int nodes_per_dim) {
  const int d = static_cast<int>(box.rows());
  require(d >= 1, "make_tensor_quadrature: need d >= 1");
  Vector n1, w1;
  gauss_legendre_unit(nodes_per_dim, n1, w1);

  long total = 1;
  for (int k = 0; k < d; ++k) total *= nodes_per_dim;
  QuadratureSpec q;
  q.rule = QuadratureRule::TensorGaussLegendre;
  q.nodes_per_dim = nodes_per_dim;
  q.box = box;
  q.nodes.resize(total, d);
  q.weights.resize(total);
  std::vector<int> idx(d, 0);
  for (long i = 0; i < total; ++i) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      q.nodes(i, k) = n1[idx[k]];
      w *= w1[idx[k]];
    }
    q.weights[i] = w;
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < nodes_per_dim) break;
      idx[k] = 0;
    }
  }
  return q;
}

QuadratureSpec make_monte_carlo_quadrature(const Matrix& box, long samples, std::uint64_t seed) {
  const int d = static_cast<int>(box.rows());
  require(d >= 1 && samples >= 1, "make_monte_carlo_quadrature: bad arguments");
  QuadratureSpec q;
  q.rule = QuadratureRule::MonteCarlo;
  q.mc_samples = samples;
  q.mc_seed = seed;
  q.box = box;
  q.nodes.resize(samples, d);
  q.weights = Vector::Constant(samples, 1.0 / static_cast<double>(samples));
  Rng rng(seed);
  for (long i = 0; i < samples; ++i)
    for (int k = 0; k < d; ++k) q.nodes(i, k) = rng.uniform();
  return q;
}

QuadratureSpec make_default_quadrature(const Matrix& box, int q, std::uint64_t seed,
                                       int nodes_per_dim) {
  const int d = static_cast<int>(box.rows());
  if (d <= 3) return make_tensor_quadrature(box, nodes_per_dim);
  long samples = 50L * std::max(q, 1) * d;
  return make_monte_carlo_quadrature(box, samples, seed);
}

}  // namespace scg
