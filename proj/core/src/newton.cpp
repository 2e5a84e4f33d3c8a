#include "fbrsim/newton.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "fbrsim/errors.hpp"

namespace fbrsim {

bool ScaledSparseSolver::factorize(const SparseMatrix& A, const Vector& row_scale,
                                   const Vector& col_scale) {
  row_ = row_scale;
  col_ = col_scale;
  scaled_ = A;
  for (Eigen::Index j = 0; j < scaled_.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(scaled_, j); it; ++it) {
      it.valueRef() *= col_[j] / row_[it.row()];
    }
  }
  scaled_.makeCompressed();
  if (rows_ != scaled_.rows() || nnz_ != scaled_.nonZeros()) {
    lu_.analyzePattern(scaled_);
    rows_ = scaled_.rows();
    nnz_ = scaled_.nonZeros();
  }
  lu_.factorize(scaled_);
  return lu_.info() == Eigen::Success;
}

Vector ScaledSparseSolver::solve(const Vector& b) const {
  const Vector bs = b.cwiseQuotient(row_);
  const Vector y = lu_.solve(bs);
  return y.cwiseProduct(col_);
}

Vector residual_scales(const SparseMatrix& J, const Vector& x_scale) {
  Vector r = Vector::Zero(J.rows());
  for (Eigen::Index j = 0; j < J.outerSize(); ++j) {
    const double s = x_scale.size() ? x_scale[j] : 1.0;
    for (SparseMatrix::InnerIterator it(J, j); it; ++it) {
      r[it.row()] = std::max(r[it.row()], std::abs(it.value()) * s);
    }
  }
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0)) r[i] = 1.0;
  }
  return r;
}

std::string to_string(NewtonStatus s) {
  switch (s) {
    case NewtonStatus::Converged: return "converged";
    case NewtonStatus::MaxIterations: return "max_iterations";
    case NewtonStatus::LineSearchFailed: return "line_search_failed";
    case NewtonStatus::SingularJacobian: return "singular_jacobian";
    case NewtonStatus::EvaluationFailed: return "evaluation_failed";
  }
  return "?";
}

namespace {

bool try_residual(const NonlinearProblem& p, const Vector& w, Vector& F, std::string* why) {
  try {
    p.residual(w, F);
  } catch (const EvaluationError& e) {
    if (why) *why = e.what();
    return false;
  } catch (const ThermoError& e) {
    if (why) *why = e.what();
    return false;
  }
  return F.allFinite();
}

}  // namespace

NewtonResult newton_solve(const NonlinearProblem& problem, Vector w0, const NewtonOptions& opts) {
  NewtonResult res;
  const Eigen::Index n = w0.size();
  const Vector xs = problem.x_scale.size() ? problem.x_scale : Vector::Ones(n);
  res.w = std::move(w0);

  Vector F(n);
  std::string why;
  if (!try_residual(problem, res.w, F, &why)) {
    res.status = NewtonStatus::EvaluationFailed;
    res.message = "residual evaluation failed at the initial point: " + why;
    return res;
  }
  SparseMatrix J;
  ScaledSparseSolver solver;
  Vector fs = problem.f_scale;
  auto norm = [&](const Vector& f) { return f.cwiseQuotient(fs).lpNorm<Eigen::Infinity>(); };
  auto merit = [&](const Vector& f) { return 0.5 * f.cwiseQuotient(fs).squaredNorm(); };

  bool converged_once = false;
  for (int it = 0;; ++it) {
    try {
      if (fs.size() == 0) {
        problem.jacobian(res.w, J);
        fs = residual_scales(J, xs);
      } else if (it > 0 || J.size() == 0) {
        problem.jacobian(res.w, J);
      }
    } catch (const EvaluationError& e) {
      res.status = NewtonStatus::EvaluationFailed;
      res.message = std::string("Jacobian evaluation failed: ") + e.what();
      break;
    } catch (const ThermoError& e) {
      res.status = NewtonStatus::EvaluationFailed;
      res.message = std::string("Jacobian evaluation failed: ") + e.what();
      break;
    }
    const double rnorm = norm(F);
    res.residual_norm = rnorm;
    res.iterations = it;
    if (rnorm <= opts.tol) {
      if (!opts.polish || converged_once || rnorm <= 1e-3 * opts.tol) {
        res.status = NewtonStatus::Converged;
        break;
      }
      converged_once = true;
    }
    if (it >= opts.max_iter) {
      res.status = NewtonStatus::MaxIterations;
      break;
    }
    if (!solver.factorize(J, fs, xs)) {
      res.status = NewtonStatus::SingularJacobian;
      break;
    }
    const Vector dw = solver.solve(-F);
    if (!dw.allFinite()) {
      res.status = NewtonStatus::SingularJacobian;
      break;
    }
    NewtonIteration log{it, rnorm, dw.cwiseQuotient(xs).lpNorm<Eigen::Infinity>(), 0.0};

    const double phi0 = merit(F);
    double alpha = 1.0;
    Vector w_trial(n);
    Vector F_trial(n);
    bool accepted = false;
    while (alpha >= opts.step_min) {
      w_trial = res.w + alpha * dw;
      if (try_residual(problem, w_trial, F_trial, nullptr) &&
          (converged_once || merit(F_trial) <= (1.0 - 2.0 * opts.armijo * alpha) * phi0)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (converged_once) {
        res.status = NewtonStatus::Converged;
        break;
      }
      res.status = NewtonStatus::LineSearchFailed;
      res.log.push_back(log);
      break;
    }
    log.alpha = alpha;
    res.log.push_back(log);
    if (converged_once && norm(F_trial) > rnorm) {
      // The polishing step made things worse; keep the converged iterate.
      res.status = NewtonStatus::Converged;
      break;
    }
    res.w = w_trial;
    F = F_trial;
    if (converged_once) {
      res.residual_norm = norm(F);
      res.iterations = it + 1;
      res.status = NewtonStatus::Converged;
      break;
    }
  }
  res.f_scale = fs;
  if (res.status != NewtonStatus::Converged && res.message.empty()) {
    std::ostringstream os;
    os << "Newton " << to_string(res.status) << " after " << res.iterations
       << " iterations, residual " << res.residual_norm;
    res.message = os.str();
  }
  return res;
}

}  // namespace fbrsim
