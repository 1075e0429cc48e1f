#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace lensopt {

using Scalar = double;

/// One value per grid node.
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Nodal time series: one column per time level (nodes x levels).
using History = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Symmetric nodal operator in compressed row storage.
using SparseOperator = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

/// A linear solve did not reach its residual target.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Picard iteration for the semilinear state stopped contracting.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A phase field left the admissible box [0, 1].
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lensopt
