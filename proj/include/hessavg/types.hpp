#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace hessavg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Design matrices are stored row-major so each data point a_i is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Caller broke a documented precondition (dimension mismatch, s > n, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An oracle needs structure the objective does not expose.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace hessavg
