#pragma once

// Globalized Newton iteration with a sparse direct solver.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>
#include <string>
#include <vector>

namespace fbrsim {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Factorizes D_r A D_x with diagonal row and column scalings. The symbolic
// analysis is kept while the sparsity pattern stays the same.
class ScaledSparseSolver {
 public:
  // Returns false if the matrix is numerically singular.
  bool factorize(const SparseMatrix& A, const Vector& row_scale, const Vector& col_scale);
  // Solves A x = b using the last factorization.
  Vector solve(const Vector& b) const;

 private:
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  SparseMatrix scaled_;
  Vector row_;
  Vector col_;
  Eigen::Index rows_ = -1;
  Eigen::Index nnz_ = -1;
};

struct NonlinearProblem {
  // Both callbacks may throw; a throwing trial point counts as a failed step.
  std::function<void(const Vector& w, Vector& F)> residual;
  std::function<void(const Vector& w, SparseMatrix& J)> jacobian;
  Vector x_scale;  // variable scales; empty means 1
  Vector f_scale;  // residual scales; empty means derived from the first Jacobian
};

// Residual scales max_j |J_ij| x_scale_j, so a scaled residual reads as a
// change of the scaled variables.
Vector residual_scales(const SparseMatrix& J, const Vector& x_scale);

struct NewtonOptions {
  double tol = 1e-4;       // on max |F_i| / f_scale_i
  int max_iter = 50;
  double armijo = 1e-4;    // sufficient decrease of 0.5 ||F||^2
  double step_min = 1e-8;  // smallest line-search fraction
  // After reaching tol, take one more full step when the residual is not yet
  // far below tol.
  bool polish = true;
};

enum class NewtonStatus {
  Converged,
  MaxIterations,
  LineSearchFailed,
  SingularJacobian,
  EvaluationFailed,
};

std::string to_string(NewtonStatus status);

struct NewtonIteration {
  int iter = 0;
  double residual_norm = 0.0;  // before the step
  double step_norm = 0.0;      // scaled max norm of the full Newton step
  double alpha = 0.0;          // accepted fraction
};

struct NewtonResult {
  Vector w;
  NewtonStatus status = NewtonStatus::MaxIterations;
  int iterations = 0;
  double residual_norm = 0.0;
  Vector f_scale;
  std::vector<NewtonIteration> log;
  std::string message;

  bool converged() const { return status == NewtonStatus::Converged; }
};

NewtonResult newton_solve(const NonlinearProblem& problem, Vector w0, const NewtonOptions& opts = {});

}  // namespace fbrsim
