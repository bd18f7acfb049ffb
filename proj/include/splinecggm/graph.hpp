#pragma once

#include <functional>
#include <string>
#include <vector>

#include "splinecggm/cggm.hpp"
#include "splinecggm/ssanova.hpp"

namespace scg {

// zeta = eta + Delta with Delta(x) = -(x-center)' M (x-center) / 2, the
// quadratic the conditional model contributes to interactions among X.
// M and center live in original (unstandardized) X coordinates.
struct ZetaModel {
  SsAnovaModel ssanova;
  Matrix m_hat;   // d x d symmetric PSD
  Vector center;  // zero unless the cGGM was fit on standardized X

  int dim() const { return ssanova.config.dim(); }
  double delta_at(const Vector& x_original) const;
  double zeta_at(const Vector& x_original) const;
};

struct ProjectionResult {
  double ratio = 0.0;
  Vector null_coef;  // coefficients on the explicit (phi) block
  Vector rep_coef;   // coefficients on the representer block
  double residual = 0.0;     // tildeV(zeta - proj)
  double denominator = 0.0;  // tildeV(zeta - zeta_u) = tildeV(zeta)
  bool ridged = false;
};

struct GraphEstimate {
  int d = 0;
  int p = 0;
  std::vector<std::string> labels;
  IntMatrix adjacency;  // (d+p) x (d+p), symmetric, zero diagonal
  IntMatrix pi;         // d x d retained X-X interactions
  Matrix weights;       // |Lambda| / |Theta| / r_ij per block

  std::string block_of(int i, int j) const;  // "XX", "XY" or "YY"
};

// tildeV(f, g) = int f g rho - (int f rho)(int g rho); f, g take original
// coordinates, rho is uniform on the quadrature box.
double tilde_v(const std::function<double(const Vector&)>& f,
               const std::function<double(const Vector&)>& g,
               const QuadratureSpec& quad);

ZetaModel build_zeta(const SsAnovaModel& ssanova, const CggmModel& cggm,
                     const StandardizeRecord& record = {});

// Squared-error projection of zeta onto the span of: main-effect null basis,
// pure quadratics, the cross monomials of `included_pairs`, and the model
// representers restricted to mains + included interactions.
ProjectionResult project(const ZetaModel& zeta,
                         const std::vector<std::pair<int, int>>& included_pairs);

// r_ij from dropping only the (i,j) interaction; symmetric, zero diagonal.
Matrix pairwise_ratios(const ZetaModel& zeta);

struct ForwardSelectResult {
  IntMatrix pi;                       // d x d
  std::vector<double> ratio_sequence; // overall ratio after each state
  Matrix pair_ratios;                 // ranking matrix
  std::vector<std::pair<int, int>> included;
};

ForwardSelectResult forward_select(const ZetaModel& zeta, double cutoff = 0.03,
                                   bool recompute_ranks = false);

GraphEstimate assemble_graph(const CggmModel& cggm, const IntMatrix& pi,
                             const std::vector<std::string>& labels,
                             const Matrix& pair_ratios = {});

void write_edge_tsv(const GraphEstimate& graph, const std::string& path);
void write_dot(const GraphEstimate& graph, const std::string& path);

}  // namespace scg
