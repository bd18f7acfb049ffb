#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace scg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;

// Data or numerical problem discovered at runtime (bad file, singular
// matrix, non-finite value). CLI maps these to exit code 1.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated call contract (bad dimension, invalid option value).
struct InvalidArgument : std::invalid_argument {
  explicit InvalidArgument(const std::string& msg) : std::invalid_argument(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace scg
