#pragma once

// Pseudo-arclength continuation of F(w, p) = 0 in a scalar parameter p.
//
// Distances are measured in the scaled metric
//   |dy|^2 = (1/n) sum_i (dw_i / x_scale_i)^2 + (dp / p_scale)^2,
// so ds is roughly "fraction of a typical variable change".

#include <functional>
#include <string>
#include <vector>

#include "fbrsim/newton.hpp"

namespace fbrsim {

struct ParametricProblem {
  std::function<void(const Vector& w, double p, Vector& F)> residual;
  std::function<void(const Vector& w, double p, SparseMatrix& J)> jacobian;
  // dF/dp; central differences when empty.
  std::function<void(const Vector& w, double p, Vector& Fp)> dF_dp;
  Vector x_scale;  // empty means 1
  Vector f_scale;  // empty means derived from the Jacobian at the seed
  double p_scale = 1.0;
};

struct ContinuationOptions {
  double ds0 = 0.01;   // sign picks the initial direction of p
  double ds_min = 1e-5;
  double ds_max = 0.05;
  double p_min = -1e300;
  double p_max = 1e300;
  int max_points = 2000;
  double grow = 1.3;
  int fast_iterations = 3;   // grow ds after at most this many Newton steps
  double min_cosine = 0.8;   // between consecutive secants, else the step is retried
  NewtonOptions newton{};

  void validate() const;
};

struct BranchPoint {
  Vector w;
  double p = 0.0;
  double s = 0.0;      // accumulated arclength
  int segment = 0;     // number of turning points passed before this point
  int iterations = 0;  // Newton iterations of the corrector
};

struct TurningPoint {
  double p = 0.0;  // refined by a quadratic fit p(s) through three points
  double s = 0.0;
  int index = 0;   // branch point at which p reverses direction
};

enum class ContinuationStatus { LeftRange, MaxPoints, StepTooSmall };

std::string to_string(ContinuationStatus status);

struct Branch {
  std::vector<BranchPoint> points;
  std::vector<TurningPoint> turning_points;
  ContinuationStatus status = ContinuationStatus::MaxPoints;
  std::string message;
  int newton_failures = 0;
};

// Natural-continuation bootstrap from (w0, p0), then secant predictor and
// arclength-constrained Newton corrector. Throws SolverError if the seed
// does not converge.
Branch plac_trace(const ParametricProblem& problem, const Vector& w0, double p0,
                  const ContinuationOptions& opts);

// Extremum of the parabola through (s_i, p_i), i = 0..2. Returns false if the
// points are collinear.
bool parabola_extremum(const double s[3], const double p[3], double& s_ext, double& p_ext);

}  // namespace fbrsim
