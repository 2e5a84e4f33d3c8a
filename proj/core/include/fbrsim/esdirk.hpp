#pragma once

// Adaptive ESDIRK integration of the semi-explicit DAE  M w' = F(t, w)  with a
// diagonal 0/1 mass matrix. Stiff accuracy makes the last stage the step
// solution, so the algebraic rows hold at every accepted step.

#include <functional>
#include <string>

#include "fbrsim/newton.hpp"

namespace fbrsim {

struct Tableau {
  int stages = 0;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd b_hat;
  Eigen::VectorXd c;
  int order = 0;
  int embedded_order = 0;

  double gamma() const { return a(stages - 1, stages - 1); }
  // Explicit first stage, constant diagonal, b = last row of a, c = row sums.
  void validate() const;

  // Kennedy & Carpenter ESDIRK3(2)4L[2]SA.
  static Tableau esdirk32();
};

struct DaeSystem {
  std::function<void(double t, const Vector& w, Vector& F)> residual;
  std::function<void(double t, const Vector& w, SparseMatrix& J)> jacobian;
  Vector mass;     // diagonal, 1 on differential rows, 0 on algebraic rows
  Vector x_scale;  // absolute tolerance is atol * x_scale
  Vector f_scale;  // used for the algebraic-row residual check
};

struct IntegratorOptions {
  double rtol = 1e-5;
  double atol = 1e-5;
  double h0 = 0.0;  // 0 picks a step from the initial derivative
  double h_min = 1e-10;
  double h_max = 1e300;
  int max_steps = 1000000;
  bool fixed_step = false;      // take h0 throughout, no error control
  int newton_max_iter = 8;
  double newton_tol = 1e-2;     // weighted RMS of the stage update
  double algebraic_tol = 1e-6;  // max |F_i| / f_scale_i on algebraic rows
  double consistency_tol = 1e-6;

  void validate() const;
};

struct IntegratorStats {
  int steps = 0;
  int rejected = 0;
  int newton_failures = 0;
  int newton_iterations = 0;
  int jacobians = 0;
  int factorizations = 0;
  int residuals = 0;
};

struct IntegrationResult {
  Vector w;  // state at the final time
  double t = 0.0;
  bool success = false;
  std::string message;
  IntegratorStats stats;
};

// Called at t0 and after every accepted step.
using StepObserver = std::function<void(double t, const Vector& w)>;

// Throws SolverError when w0 violates the algebraic rows; integration
// failures (step underflow, stage Newton failure at h_min) are reported in
// the result.
IntegrationResult esdirk_integrate(const DaeSystem& sys, const Vector& w0, double t0, double t1,
                                   const IntegratorOptions& opts = {},
                                   const StepObserver& observer = {},
                                   const Tableau& tableau = Tableau::esdirk32());

// Solves the algebraic rows of F(t, w) = 0 for the algebraic variables with
// the differential ones held fixed.
NewtonResult make_consistent(const DaeSystem& sys, const Vector& w, double t,
                             const NewtonOptions& opts = {});

// Integrates from a steady state with fixed inputs and returns the largest
// max_i |w_i(t) - w*_i| / x_scale_i seen over the horizon.
double steady_vs_dynamic_check(const DaeSystem& sys, const Vector& w_star, double horizon,
                               const IntegratorOptions& opts = {});

}  // namespace fbrsim
