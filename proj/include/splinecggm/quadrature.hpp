#pragma once

#include <cstdint>
#include <functional>

#include "splinecggm/types.hpp"

namespace scg {

enum class QuadratureRule { TensorGaussLegendre, MonteCarlo };

// Integration grid over a box, stored in unit-cube coordinates with weights
// summing to one (so sums are integrals against the uniform density rho).
// Original-coordinate integrals carry the box volume factor.
struct QuadratureSpec {
  QuadratureRule rule = QuadratureRule::TensorGaussLegendre;
  int nodes_per_dim = 24;     // tensor rule
  long mc_samples = 0;        // Monte Carlo rule
  std::uint64_t mc_seed = 0;
  Matrix box;                 // d x 2 columns [lo, hi]
  Matrix nodes;               // N x d, unit coordinates
  Vector weights;             // N, positive, sums to 1

  int dim() const { return static_cast<int>(box.rows()); }
  long size() const { return nodes.rows(); }
  double volume() const;

  Vector to_original(const Vector& unit) const;
  Vector to_unit(const Vector& original) const;

  // sum_i w_i f(u_i): the integral of f against rho (uniform on the box),
  // with f taking unit coordinates.
  double integrate_rho(const std::function<double(const Vector&)>& f_unit) const;

  // Integral over the box in original coordinates.
  double integrate(const std::function<double(const Vector&)>& f_original) const;
};

// Nodes and weights of the m-point Gauss-Legendre rule on [0, 1].
void gauss_legendre_unit(int m, Vector& nodes, Vector& weights);

QuadratureSpec make_tensor_quadrature(const Matrix& box, int nodes_per_dim);
QuadratureSpec make_monte_carlo_quadrature(const Matrix& box, long samples, std::uint64_t seed);

// Tensor rule for d <= 3, Monte Carlo otherwise. `q` is the representer count
// feeding the Monte Carlo budget 50*q*d.
QuadratureSpec make_default_quadrature(const Matrix& box, int q, std::uint64_t seed,
                                       int nodes_per_dim = 24);

}  // namespace scg
