#pragma once

#include "lensopt/types.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <optional>
#include <variant>

namespace lensopt {

struct SpdSolveOptions {
  Scalar tolerance = 1e-12;  // relative residual
  bool jacobi = false;       // diagonal preconditioning
  int max_iterations = 0;    // 0: 10 * rows
};

/// Conjugate gradients on a symmetric positive definite operator. The operator
/// is captured once, so one instance serves many right-hand sides.
class SpdSolver {
 public:
  /// `op` must outlive the solver.
  explicit SpdSolver(const SparseOperator& op, SpdSolveOptions opts = {});
  SpdSolver(const SpdSolver&) = delete;
  SpdSolver& operator=(const SpdSolver&) = delete;

  /// Throws SolverError if the relative residual stays above the tolerance.
  Vector solve(const Vector& rhs) const;
  Vector solve(const Vector& rhs, const Vector& guess) const;

  int last_iterations() const { return iterations_; }

 private:
  using Plain = Eigen::ConjugateGradient<SparseOperator, Eigen::Lower | Eigen::Upper,
                                         Eigen::IdentityPreconditioner>;
  using Jacobi = Eigen::ConjugateGradient<SparseOperator, Eigen::Lower | Eigen::Upper,
                                          Eigen::DiagonalPreconditioner<Scalar>>;

  const SparseOperator* op_;
  SpdSolveOptions opts_;
  mutable std::variant<Plain, Jacobi> cg_;
  mutable int iterations_ = 0;
};

/// One-shot conjugate-gradient solve, see SpdSolver.
Vector solve_spd(const SparseOperator& op, const Vector& rhs, Scalar tol = 1e-12,
                 bool jacobi = false);

}  // namespace lensopt
