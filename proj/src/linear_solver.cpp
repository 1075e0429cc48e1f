#include "lensopt/linear_solver.hpp"

#include <string>

namespace lensopt {

SpdSolver::SpdSolver(const SparseOperator& op, SpdSolveOptions opts)
    : op_(&op), opts_(opts) {
  if (op.rows() != op.cols()) throw std::invalid_argument("operator is not square");
  if (opts_.jacobi) cg_.emplace<Jacobi>();
  const int cap = opts_.max_iterations > 0 ? opts_.max_iterations : 10 * static_cast<int>(op.rows());
  std::visit(
      [&](auto& cg) {
        cg.setTolerance(opts_.tolerance);
        cg.setMaxIterations(cap);
        cg.compute(op);
      },
      cg_);
}

Vector SpdSolver::solve(const Vector& rhs) const {
  return solve(rhs, Vector::Zero(rhs.size()));
}

Vector SpdSolver::solve(const Vector& rhs, const Vector& guess) const {
  if (rhs.size() != op_->rows()) throw std::invalid_argument("rhs does not match operator");
  const Scalar rhs_norm = rhs.norm();
  if (rhs_norm == 0) {
    iterations_ = 0;
    return Vector::Zero(rhs.size());
  }
  Vector x = guess;
  Scalar residual = 0;
  iterations_ = 0;
  // The recursive CG residual drifts from the true one; restart from the
  // current iterate a couple of times before giving up.
  for (int attempt = 0; attempt < 3; ++attempt) {
    bool converged = false;
    std::visit(
        [&](auto& cg) {
          x = cg.solveWithGuess(rhs, x);
          iterations_ += static_cast<int>(cg.iterations());
          converged = cg.info() == Eigen::Success;
        },
        cg_);
    residual = (rhs - *op_ * x).norm() / rhs_norm;
    if (!converged || !x.allFinite() || residual <= opts_.tolerance) break;
  }
  if (!x.allFinite() || !(residual <= opts_.tolerance)) {
    throw SolverError("conjugate gradients did not converge after " +
                      std::to_string(iterations_) + " iterations (relative residual " +
                      std::to_string(residual) + ")");
  }
  return x;
}

Vector solve_spd(const SparseOperator& op, const Vector& rhs, Scalar tol, bool jacobi) {
  if (!(tol > 0) || tol > 1e-4) throw std::invalid_argument("solve tolerance must lie in (0, 1e-4]");
  return SpdSolver(op, {tol, jacobi, 0}).solve(rhs);
}

}  // namespace lensopt
