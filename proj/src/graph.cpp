#include "splinecggm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace scg {

double ZetaModel::delta_at(const Vector& x_original) const {
  if (m_hat.size() == 0) return 0.0;
  Vector v = x_original - center;
  return -0.5 * v.dot(m_hat * v);
}

double ZetaModel::zeta_at(const Vector& x_original) const {
  // eta plus log rho: a non-uniform (additive-in-log) reference density
  // contributes its energy to zeta; under a uniform rho this is exactly eta.
  Vector u = ssanova.quad.to_unit(x_original);
  return eval_eta(ssanova, x_original) + ssanova.log_rho_unit(u) + delta_at(x_original);
}

double tilde_v(const std::function<double(const Vector&)>& f,
               const std::function<double(const Vector&)>& g,
               const QuadratureSpec& quad) {
  double sfg = 0.0, sf = 0.0, sg = 0.0;
  for (long i = 0; i < quad.size(); ++i) {
    Vector x = quad.to_original(quad.nodes.row(i));
    double w = quad.weights[i];
    double fv = f(x), gv = g(x);
    sfg += w * fv * gv;
    sf += w * fv;
    sg += w * gv;
  }
  return sfg - sf * sg;
}

ZetaModel build_zeta(const SsAnovaModel& ssanova, const CggmModel& cggm,
                     const StandardizeRecord& record) {
  const int d = ssanova.config.dim();
  require(cggm.d() == d, "build_zeta: dimension mismatch between eta and cGGM");
  ZetaModel z;
  z.ssanova = ssanova;
  z.center = Vector::Zero(d);
  if (cggm.theta_mat.size() == 0 || cggm.theta_mat.cwiseAbs().maxCoeff() == 0.0) {
    z.m_hat = Matrix::Zero(d, d);
    return z;
  }
  Eigen::LLT<Matrix> llt(cggm.lambda_mat);
  if (llt.info() != Eigen::Success)
    throw DataError("build_zeta: Lambda is not positive definite");
  Matrix m = cggm.theta_mat * llt.solve(cggm.theta_mat.transpose());
  m = ((m + m.transpose()) / 2.0).eval();
  if (record.applied_x) {
    // cGGM saw (x - mean)/scale; fold the transform into M and the center
    Vector inv_scale = record.x_scale.cwiseInverse();
    m = (inv_scale.asDiagonal() * m * inv_scale.asDiagonal()).eval();
    z.center = record.x_mean;
  }
  z.m_hat = m;
  return z;
}

namespace {

// Precomputed node-level values shared by all projections of one model.
struct ProjectionWorkspace {
  const ZetaModel* zeta;
  Vector weights;       // N
  Vector zvals;         // N, zeta at nodes
  Matrix k1cols;        // N x d
  Matrix q2cols;        // N x d, (u-1/2)^2
  std::vector<std::pair<int, int>> all_pairs;
  Matrix crosscols;     // N x n_pairs, k1(u_i) k1(u_j)
  Matrix xi_main;       // N x q, theta-weighted main-effect kernel block
  std::vector<Matrix> xi_int;  // per config interaction, N x q
  double v_zeta = 0.0;  // tildeV(zeta)

  explicit ProjectionWorkspace(const ZetaModel& z);

  int pair_index(int i, int j) const {
    auto key = std::make_pair(std::min(i, j), std::max(i, j));
    auto it = std::find(all_pairs.begin(), all_pairs.end(), key);
    return it == all_pairs.end() ? -1 : static_cast<int>(it - all_pairs.begin());
  }
};

ProjectionWorkspace::ProjectionWorkspace(const ZetaModel& z) : zeta(&z) {
  const QuadratureSpec& quad = z.ssanova.quad;
  const int d = z.dim();
  const long n = quad.size();
  const int q = z.ssanova.q();
  const KernelConfig& config = z.ssanova.config;
  KernelEvaluator kernel(config);

  weights = quad.weights;
  zvals.resize(n);
  k1cols.resize(n, d);
  q2cols.resize(n, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) all_pairs.emplace_back(i, j);
  crosscols.resize(n, all_pairs.size());
  xi_main = Matrix::Zero(n, q);
  xi_int.assign(config.interactions.size(), Matrix::Zero(n, q));

  const int n_main = static_cast<int>(config.main_effects.size());
  for (long t = 0; t < n; ++t) {
    Vector u = quad.nodes.row(t);
    Vector x = quad.to_original(u);
    zvals[t] = z.zeta_at(x);
    for (int k = 0; k < d; ++k) {
      double c = spline_k1(u[k]);
      k1cols(t, k) = c;
      q2cols(t, k) = c * c;
    }
    for (std::size_t pidx = 0; pidx < all_pairs.size(); ++pidx)
      crosscols(t, pidx) = k1cols(t, all_pairs[pidx].first) * k1cols(t, all_pairs[pidx].second);
    for (int j = 0; j < q; ++j) {
      Vector rep = z.ssanova.representers_unit.row(j);
      double main_part = 0.0;
      for (int mt = 0; mt < n_main; ++mt)
        main_part += config.theta_v[mt] * kernel.term(mt, u, rep);
      xi_main(t, j) = main_part;
      for (std::size_t it = 0; it < config.interactions.size(); ++it)
        xi_int[it](t, j) =
            config.theta_v[n_main + it] * kernel.term(n_main + static_cast<int>(it), u, rep);
    }
  }
  double mean_z = weights.dot(zvals);
  v_zeta = (zvals.array().square() * weights.array()).sum() - mean_z * mean_z;
}

ProjectionResult project_in_workspace(const ProjectionWorkspace& ws,
                                      const std::vector<std::pair<int, int>>& included_pairs) {
  const ZetaModel& z = *ws.zeta;
  const KernelConfig& config = z.ssanova.config;
  const int d = z.dim();
  const int q = z.ssanova.q();
  const long n = ws.weights.size();

  std::vector<int> cross_idx;
  for (auto [i, j] : included_pairs) {
    int idx = ws.pair_index(i, j);
    require(idx >= 0, "project: pair out of range");
    cross_idx.push_back(idx);
  }
  std::sort(cross_idx.begin(), cross_idx.end());
  cross_idx.erase(std::unique(cross_idx.begin(), cross_idx.end()), cross_idx.end());

  const int n_phi = 2 * d + static_cast<int>(cross_idx.size());
  Matrix f(n, n_phi + q);
  f.leftCols(d) = ws.k1cols;
  f.middleCols(d, d) = ws.q2cols;
  for (std::size_t c = 0; c < cross_idx.size(); ++c)
    f.col(2 * d + c) = ws.crosscols.col(cross_idx[c]);
  Matrix xi = ws.xi_main;
  for (std::size_t it = 0; it < config.interactions.size(); ++it) {
    auto key = config.interactions[it];
    int pidx = ws.pair_index(key.first, key.second);
    if (std::binary_search(cross_idx.begin(), cross_idx.end(), pidx)) xi += ws.xi_int[it];
  }
  f.rightCols(q) = xi;

  // tildeV Gram and right-hand side
  Vector col_means = f.transpose() * ws.weights;
  Matrix gram = f.transpose() * ws.weights.asDiagonal() * f - col_means * col_means.transpose();
  double mean_z = ws.weights.dot(ws.zvals);
  Vector rhs = f.transpose() * (ws.weights.asDiagonal() * ws.zvals) - col_means * mean_z;

  // normalize to unit tildeV norm for conditioning; zero-norm columns drop out
  const long k = gram.rows();
  Vector scale(k);
  double max_diag = std::max(gram.diagonal().maxCoeff(), 0.0);
  for (long i = 0; i < k; ++i) {
    double g = gram(i, i);
    scale[i] = g > 1e-14 * std::max(max_diag, 1e-300) ? 1.0 / std::sqrt(g) : 0.0;
  }
  Matrix gs = scale.asDiagonal() * gram * scale.asDiagonal();
  Vector bs = scale.asDiagonal() * rhs;
  for (long i = 0; i < k; ++i)
    if (scale[i] == 0.0) gs(i, i) = 1.0;  // decoupled unit row, coefficient 0

  ProjectionResult res;
  Vector y;
  Eigen::LLT<Matrix> llt(gs);
  if (llt.info() == Eigen::Success) {
    y = llt.solve(bs);
    y += llt.solve(bs - gs * y);
    y += llt.solve(bs - gs * y);
  } else {
    Eigen::LDLT<Matrix> ldlt(gs);
    y = ldlt.solve(bs);
    if (ldlt.info() != Eigen::Success || !y.allFinite()) {
      Matrix ridged = gs;
      ridged.diagonal().array() += 1e-10 * gs.trace();
      Eigen::LDLT<Matrix> second(ridged);
      y = second.solve(bs);
      res.ridged = true;
      if (!y.allFinite()) throw DataError("project: singular normal equations");
    } else {
      y += ldlt.solve(bs - gs * y);
    }
  }

  double fit_quad = y.dot(gs * y);
  double fit_cross = y.dot(bs);
  res.denominator = ws.v_zeta;
  res.residual = std::max(ws.v_zeta + fit_quad - 2.0 * fit_cross, 0.0);
  res.ratio = res.denominator > 1e-300 ? res.residual / res.denominator : 0.0;
  Vector coef = scale.asDiagonal() * y;
  res.null_coef = coef.head(n_phi);
  res.rep_coef = coef.tail(q);
  return res;
}

}  // namespace

ProjectionResult project(const ZetaModel& zeta,
                         const std::vector<std::pair<int, int>>& included_pairs) {
  ProjectionWorkspace ws(zeta);
  return project_in_workspace(ws, included_pairs);
}

namespace {

Matrix pairwise_in_workspace(const ProjectionWorkspace& ws,
                             const std::vector<std::pair<int, int>>& base_pairs) {
  const int d = ws.zeta->dim();
  Matrix r = Matrix::Zero(d, d);
  for (auto [i, j] : ws.all_pairs) {
    std::vector<std::pair<int, int>> keep;
    for (auto pr : base_pairs)
      if (!(pr.first == i && pr.second == j)) keep.push_back(pr);
    ProjectionResult res = project_in_workspace(ws, keep);
    r(i, j) = res.ratio;
    r(j, i) = res.ratio;
  }
  return r;
}

}  // namespace

Matrix pairwise_ratios(const ZetaModel& zeta) {
  require(zeta.dim() >= 2, "pairwise_ratios: need d >= 2");
  ProjectionWorkspace ws(zeta);
  return pairwise_in_workspace(ws, ws.all_pairs);
}

ForwardSelectResult forward_select(const ZetaModel& zeta, double cutoff,
                                   bool recompute_ranks) {
  require(cutoff >= 0.0 && cutoff < 1.0, "forward_select: cutoff must be in [0,1)");
  const int d = zeta.dim();
  ForwardSelectResult out;
  out.pi = IntMatrix::Zero(d, d);
  if (d < 2) {
    out.ratio_sequence.push_back(0.0);
    out.pair_ratios = Matrix::Zero(d, d);
    return out;
  }

  ProjectionWorkspace ws(zeta);
  out.pair_ratios = pairwise_in_workspace(ws, ws.all_pairs);

  std::vector<std::pair<int, int>> included;
  std::vector<std::pair<int, int>> remaining = ws.all_pairs;
  double r = project_in_workspace(ws, included).ratio;
  out.ratio_sequence.push_back(r);

  const Matrix& ranks = out.pair_ratios;
  while (r > cutoff && !remaining.empty()) {
    std::size_t best = 0;
    if (recompute_ranks) {
      // greedy: include the pair that lowers the overall ratio the most
      double best_r = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < remaining.size(); ++c) {
        std::vector<std::pair<int, int>> cand = included;
        cand.push_back(remaining[c]);
        double rc = project_in_workspace(ws, cand).ratio;
        if (rc < best_r) {
          best_r = rc;
          best = c;
        }
      }
    } else {
      // upfront ranking: largest r_ij wins, lexicographic order breaks ties
      for (std::size_t c = 1; c < remaining.size(); ++c) {
        if (ranks(remaining[c].first, remaining[c].second) >
            ranks(remaining[best].first, remaining[best].second))
          best = c;
      }
    }
    included.push_back(remaining[best]);
    remaining.erase(remaining.begin() + best);
    r = project_in_workspace(ws, included).ratio;
    out.ratio_sequence.push_back(r);
  }
  for (auto [i, j] : included) {
    out.pi(i, j) = 1;
    out.pi(j, i) = 1;
  }
  out.included = included;
  return out;
}

GraphEstimate assemble_graph(const CggmModel& cggm, const IntMatrix& pi,
                             const std::vector<std::string>& labels,
                             const Matrix& pair_ratios) {
  const int d = cggm.d();
  const int p = cggm.p();
  require(pi.rows() == d && pi.cols() == d, "assemble_graph: Pi must be d x d");
  const int total = d + p;
  GraphEstimate g;
  g.d = d;
  g.p = p;
  if (!labels.empty()) {
    require(static_cast<int>(labels.size()) == total, "assemble_graph: need d+p labels");
    g.labels = labels;
  } else {
    for (int i = 0; i < d; ++i) g.labels.push_back("x" + std::to_string(i + 1));
    for (int j = 0; j < p; ++j) g.labels.push_back("y" + std::to_string(j + 1));
  }
  g.adjacency = IntMatrix::Zero(total, total);
  g.weights = Matrix::Zero(total, total);
  g.pi = pi;
  const double tol = 1e-10;

  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && pi(i, j) != 0) {
        g.adjacency(i, j) = 1;
        if (pair_ratios.size() > 0) g.weights(i, j) = pair_ratios(i, j);
      }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < p; ++j)
      if (std::abs(cggm.theta_mat(i, j)) > tol) {
        g.adjacency(i, d + j) = g.adjacency(d + j, i) = 1;
        g.weights(i, d + j) = g.weights(d + j, i) = std::abs(cggm.theta_mat(i, j));
      }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j && std::abs(cggm.lambda_mat(i, j)) > tol) {
        g.adjacency(d + i, d + j) = 1;
        g.weights(d + i, d + j) = std::abs(cggm.lambda_mat(i, j));
      }
  // symmetry by construction, but make it exact
  for (int i = 0; i < total; ++i)
    for (int j = i + 1; j < total; ++j) {
      int v = std::max(g.adjacency(i, j), g.adjacency(j, i));
      g.adjacency(i, j) = g.adjacency(j, i) = v;
    }
  return g;
}

std::string GraphEstimate::block_of(int i, int j) const {
  bool ix = i < d, jx = j < d;
  if (ix && jx) return "XX";
  if (!ix && !jx) return "YY";
  return "XY";
}

void write_edge_tsv(const GraphEstimate& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("write_edge_tsv: cannot open '" + path + "'");
  out << "node_i\tnode_j\tblock\tweight\n";
  const int total = graph.d + graph.p;
  for (int i = 0; i < total; ++i)
    for (int j = i + 1; j < total; ++j)
      if (graph.adjacency(i, j) != 0) {
        out << graph.labels[i] << '\t' << graph.labels[j] << '\t' << graph.block_of(i, j)
            << '\t' << graph.weights(i, j) << '\n';
      }
}

void write_dot(const GraphEstimate& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("write_dot: cannot open '" + path + "'");
  out << "graph estimate {\n";
  const int total = graph.d + graph.p;
  for (int i = 0; i < total; ++i) {
    out << "  \"" << graph.labels[i] << "\"";
    if (i < graph.d) out << " [shape=box]";
    out << ";\n";
  }
  for (int i = 0; i < total; ++i)
    for (int j = i + 1; j < total; ++j)
      if (graph.adjacency(i, j) != 0) {
        std::string block = graph.block_of(i, j);
        out << "  \"" << graph.labels[i] << "\" -- \"" << graph.labels[j] << "\"";
        if (block == "XX")
          out << " [style=bold]";
        else if (block == "XY")
          out << " [style=dashed]";
        out << ";\n";
      }
  out << "}\n";
}

}  // namespace scg
