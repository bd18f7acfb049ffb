#include "splinecggm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace scg {

void Dataset::validate() const {
  if (y.rows() < 1) throw DataError("Dataset: need at least one observation");
  if (x.cols() > 0 && x.rows() != y.rows())
    throw DataError("Dataset: X and Y row counts differ");
  if (static_cast<int>(column_names.size()) != d() + p())
    throw DataError("Dataset: column_names length must equal d+p");
  if (!x.allFinite() || !y.allFinite())
    throw DataError("Dataset: non-finite entry");
}

Dataset Dataset::without_row(int k) const {
  std::vector<int> rows;
  rows.reserve(n() - 1);
  for (int i = 0; i < n(); ++i)
    if (i != k) rows.push_back(i);
  return subset_rows(rows);
}

Dataset Dataset::subset_rows(const std::vector<int>& rows) const {
  Dataset out;
  out.column_names = column_names;
  out.x.resize(rows.size(), x.cols());
  out.y.resize(rows.size(), y.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (x.cols() > 0) out.x.row(r) = x.row(rows[r]);
    out.y.row(r) = y.row(rows[r]);
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

struct RawTable {
  std::vector<std::string> header;
  Matrix values;  // n x (number of columns)
};

RawTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv: cannot open file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("load_csv: empty file '" + path + "'");
  RawTable t;
  for (auto& h : split_csv_line(line)) t.header.push_back(trim(h));
  const std::size_t ncol = t.header.size();

  std::vector<double> flat;
  long nrow = 0;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != ncol)
      throw DataError("load_csv: row " + std::to_string(lineno) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(ncol));
    for (std::size_t j = 0; j < ncol; ++j) {
      const std::string cell = trim(cells[j]);
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
        throw DataError("load_csv: cannot parse cell at row " + std::to_string(lineno) +
                        ", column '" + t.header[j] + "' (value '" + cell + "')");
      flat.push_back(v);
    }
    ++nrow;
  }
  if (nrow == 0) throw DataError("load_csv: no data rows in '" + path + "'");
  t.values.resize(nrow, ncol);
  for (long i = 0; i < nrow; ++i)
    for (std::size_t j = 0; j < ncol; ++j) t.values(i, j) = flat[i * ncol + j];
  return t;
}

Dataset partition(const RawTable& t, const std::vector<int>& x_idx) {
  const int ncol = static_cast<int>(t.header.size());
  std::vector<bool> is_x(ncol, false);
  for (int j : x_idx) is_x[j] = true;

  Dataset data;
  data.x.resize(t.values.rows(), x_idx.size());
  for (std::size_t k = 0; k < x_idx.size(); ++k) {
    data.x.col(k) = t.values.col(x_idx[k]);
    data.column_names.push_back(t.header[x_idx[k]]);
  }
  std::vector<int> y_idx;
  for (int j = 0; j < ncol; ++j)
    if (!is_x[j]) y_idx.push_back(j);
  if (y_idx.empty()) throw DataError("load_csv: no Y columns left after X selection");
  data.y.resize(t.values.rows(), y_idx.size());
  for (std::size_t k = 0; k < y_idx.size(); ++k) {
    data.y.col(k) = t.values.col(y_idx[k]);
    data.column_names.push_back(t.header[y_idx[k]]);
  }
  data.validate();
  return data;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::vector<std::string>& x_columns) {
  RawTable t = read_table(path);
  std::vector<int> x_idx;
  for (const auto& name : x_columns) {
    auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end())
      throw DataError("load_csv: unknown column '" + name + "'");
    int j = static_cast<int>(it - t.header.begin());
    if (std::find(x_idx.begin(), x_idx.end(), j) != x_idx.end())
      throw DataError("load_csv: column '" + name + "' selected twice");
    x_idx.push_back(j);
  }
  return partition(t, x_idx);
}

Dataset load_csv(const std::string& path, int x_count) {
  RawTable t = read_table(path);
  if (x_count < 0 || x_count >= static_cast<int>(t.header.size()))
    throw DataError("load_csv: x_count out of range");
  std::vector<int> x_idx(x_count);
  for (int j = 0; j < x_count; ++j) x_idx[j] = j;
  return partition(t, x_idx);
}

SufficientStats sufficient_stats(const Dataset& data) {
  data.validate();
  const double n = static_cast<double>(data.n());

  // Accumulate in a canonical row order so the result is exactly invariant
  // to permutations of the observations.
  std::vector<int> order(data.n());
  for (int i = 0; i < data.n(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int j = 0; j < data.d(); ++j)
      if (data.x(a, j) != data.x(b, j)) return data.x(a, j) < data.x(b, j);
    for (int j = 0; j < data.p(); ++j)
      if (data.y(a, j) != data.y(b, j)) return data.y(a, j) < data.y(b, j);
    return false;
  });
  Matrix xs(data.n(), data.d()), ys(data.n(), data.p());
  for (int i = 0; i < data.n(); ++i) {
    if (data.d() > 0) xs.row(i) = data.x.row(order[i]);
    ys.row(i) = data.y.row(order[i]);
  }

  SufficientStats s;
  s.n = data.n();
  s.sxx = xs.transpose() * xs / n;
  s.syy = ys.transpose() * ys / n;
  s.sxy = xs.transpose() * ys / n;
  // exact symmetry
  s.sxx = ((s.sxx + s.sxx.transpose()) / 2.0).eval();
  s.syy = ((s.syy + s.syy.transpose()) / 2.0).eval();
  return s;
}

namespace {

void standardize_block(Matrix& block, const std::vector<std::string>& names,
                       int name_offset, Vector& mean, Vector& scale) {
  const long n = block.rows();
  mean.resize(block.cols());
  scale.resize(block.cols());
  for (long j = 0; j < block.cols(); ++j) {
    mean[j] = block.col(j).mean();
    double ss = (block.col(j).array() - mean[j]).square().sum();
    double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    if (!(sd > 0.0))
      throw DataError("standardize: column '" + names[name_offset + j] +
                      "' has zero variance");
    scale[j] = sd;
    block.col(j) = (block.col(j).array() - mean[j]) / sd;
  }
}

}  // namespace

std::pair<Dataset, StandardizeRecord> standardize(const Dataset& data, StandardizeTarget which) {
  data.validate();
  Dataset out = data;
  StandardizeRecord rec;
  if ((which == StandardizeTarget::X || which == StandardizeTarget::Both) && out.d() > 0) {
    standardize_block(out.x, out.column_names, 0, rec.x_mean, rec.x_scale);
    rec.applied_x = true;
  }
  if (which == StandardizeTarget::Y || which == StandardizeTarget::Both) {
    standardize_block(out.y, out.column_names, out.d(), rec.y_mean, rec.y_scale);
    rec.applied_y = true;
  }
  return {out, rec};
}

std::vector<int> normality_rank(const Dataset& data, int d_select) {
  data.validate();
  const int total = data.d() + data.p();
  require(d_select >= 0 && d_select <= total, "normality_rank: d out of range");
  if (data.n() < 3 || data.n() > 5000)
    throw DataError("normality_rank: Shapiro-Wilk requires 3 <= n <= 5000");

  std::vector<std::pair<double, int>> ranked;
  for (int j = 0; j < total; ++j) {
    Vector col = j < data.d() ? data.x.col(j) : data.y.col(j - data.d());
    ranked.emplace_back(shapiro_wilk(col).p_value, j);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<int> out(d_select);
  for (int k = 0; k < d_select; ++k) out[k] = ranked[k].second;
  return out;
}

}  // namespace scg
