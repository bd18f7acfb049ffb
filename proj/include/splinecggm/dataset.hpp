#pragma once

#include <string>
#include <vector>

#include "splinecggm/types.hpp"

namespace scg {

// Observations split into a nonparametric block X (n x d) and a parametric
// block Y (n x p). Column names keep the X columns first.
struct Dataset {
  Matrix x;
  Matrix y;
  std::vector<std::string> column_names;

  int n() const { return static_cast<int>(y.rows()); }
  int d() const { return static_cast<int>(x.cols()); }
  int p() const { return static_cast<int>(y.cols()); }

  // Throws DataError on non-finite entries or inconsistent shapes.
  void validate() const;

  Dataset without_row(int k) const;
  Dataset subset_rows(const std::vector<int>& rows) const;
};

// Second-moment matrices with the 1/n convention:
//   sxx = X'X/n,  syy = Y'Y/n,  sxy = X'Y/n.
struct SufficientStats {
  Matrix sxx;  // d x d
  Matrix syy;  // p x p
  Matrix sxy;  // d x p
  long n = 0;

  int d() const { return static_cast<int>(sxx.rows()); }
  int p() const { return static_cast<int>(syy.rows()); }
};

enum class StandardizeTarget { X, Y, Both };

// Per-column affine transform applied by standardize(); kept so that fitted
// models can be mapped back to original units.
struct StandardizeRecord {
  Vector x_mean, x_scale;  // empty when X untouched
  Vector y_mean, y_scale;  // empty when Y untouched
  bool applied_x = false;
  bool applied_y = false;
};

// CSV: comma separator, '.' decimal point, mandatory header, UTF-8.
Dataset load_csv(const std::string& path, const std::vector<std::string>& x_columns);
Dataset load_csv(const std::string& path, int x_count);

SufficientStats sufficient_stats(const Dataset& data);

// Centers to mean zero and scales to unit sample (n-1) standard deviation.
std::pair<Dataset, StandardizeRecord> standardize(const Dataset& data, StandardizeTarget which);

// Indices of the d_select columns (over all d+p marginals) with the smallest
// Shapiro-Wilk p-values, ascending by p-value, ties broken by column index.
std::vector<int> normality_rank(const Dataset& data, int d_select);

struct ShapiroWilkResult {
  double w;
  double p_value;
};

// Royston's AS R94 approximation, valid for 3 <= n <= 5000.
ShapiroWilkResult shapiro_wilk(const Vector& sample);

// Standard normal quantile (Wichura's AS 241 PPND16) and CDF.
double normal_quantile(double prob);
double normal_cdf(double z);

}  // namespace scg
