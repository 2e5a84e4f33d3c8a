#include "fbrsim/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fbrsim/errors.hpp"

namespace fbrsim {

void ContinuationOptions::validate() const {
  const double a = std::abs(ds0);
  if (!(ds_min > 0.0 && ds_min <= a && a <= ds_max)) {
    throw ConfigError("continuation needs 0 < ds_min <= |ds0| <= ds_max");
  }
  if (!(p_min < p_max)) throw ConfigError("continuation parameter range is empty");
  if (max_points < 2) throw ConfigError("continuation needs max_points >= 2");
  if (!(grow >= 1.0) || !(min_cosine > 0.0 && min_cosine < 1.0)) {
    throw ConfigError("continuation step policy out of range");
  }
}

std::string to_string(ContinuationStatus s) {
  switch (s) {
    case ContinuationStatus::LeftRange: return "left_range";
    case ContinuationStatus::MaxPoints: return "max_points";
    case ContinuationStatus::StepTooSmall: return "step_too_small";
  }
  return "?";
}

bool parabola_extremum(const double s[3], const double p[3], double& s_ext, double& p_ext) {
  // Newton divided differences.
  const double d01 = (p[1] - p[0]) / (s[1] - s[0]);
  const double d12 = (p[2] - p[1]) / (s[2] - s[1]);
  const double a = (d12 - d01) / (s[2] - s[0]);
  if (!(std::abs(a) > 1e-300) || !std::isfinite(a)) return false;
  // p(s) = p0 + d01 (s - s0) + a (s - s0)(s - s1)
  s_ext = 0.5 * (s[0] + s[1]) - d01 / (2.0 * a);
  p_ext = p[0] + d01 * (s_ext - s[0]) + a * (s_ext - s[0]) * (s_ext - s[1]);
  return std::isfinite(s_ext) && std::isfinite(p_ext);
}

namespace {

struct Tracer {
  const ParametricProblem& prob;
  const ContinuationOptions& opts;
  Vector xs;
  Vector fs;
  Eigen::Index n = 0;

  // Scaled difference of two points.
  Vector scaled_delta(const Vector& w1, double p1, const Vector& w0, double p0) const {
    Vector d(n + 1);
    d.head(n) = (w1 - w0).cwiseQuotient(xs) / std::sqrt(static_cast<double>(n));
    d[n] = (p1 - p0) / prob.p_scale;
    return d;
  }

  void dF_dp(const Vector& w, double p, Vector& Fp) const {
    if (prob.dF_dp) {
      prob.dF_dp(w, p, Fp);
      return;
    }
    const double dp = 1e-6 * std::max(std::abs(p), prob.p_scale);
    Vector Fm(n);
    prob.residual(w, p + dp, Fp);
    prob.residual(w, p - dp, Fm);
    Fp = (Fp - Fm) / (2.0 * dp);
  }

  NewtonResult natural(const Vector& guess, double p) const {
    NonlinearProblem np;
    np.residual = [&](const Vector& w, Vector& F) { prob.residual(w, p, F); };
    np.jacobian = [&](const Vector& w, SparseMatrix& J) { prob.jacobian(w, p, J); };
    np.x_scale = xs;
    np.f_scale = fs;
    return newton_solve(np, guess, opts.newton);
  }

  // Corrector on [F(w,p); t . (y - y_m) - ds] with t the unit secant in the
  // scaled metric.
  NewtonResult arclength(const Vector& wm, double pm, const Vector& t, double ds) const {
    const double rn = 1.0 / std::sqrt(static_cast<double>(n));
    NonlinearProblem np;
    np.residual = [&](const Vector& z, Vector& G) {
      G.resize(n + 1);
      Vector F(n);
      prob.residual(z.head(n), z[n], F);
      G.head(n) = F;
      G[n] = scaled_delta(z.head(n), z[n], wm, pm).dot(t) - ds;
    };
    np.jacobian = [&](const Vector& z, SparseMatrix& A) {
      SparseMatrix J;
      prob.jacobian(z.head(n), z[n], J);
      Vector Fp(n);
      dF_dp(z.head(n), z[n], Fp);
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(J.nonZeros() + 2 * n + 1);
      for (Eigen::Index j = 0; j < J.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(J, j); it; ++it) {
          trip.emplace_back(it.row(), it.col(), it.value());
        }
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        trip.emplace_back(i, n, Fp[i]);
        trip.emplace_back(n, i, t[i] * rn / xs[i]);
      }
      trip.emplace_back(n, n, t[n] / prob.p_scale);
      A.resize(n + 1, n + 1);
      A.setFromTriplets(trip.begin(), trip.end());
    };
    np.x_scale.resize(n + 1);
    np.x_scale.head(n) = xs;
    np.x_scale[n] = prob.p_scale;
    np.f_scale.resize(n + 1);
    np.f_scale.head(n) = fs;
    np.f_scale[n] = 1.0;

    Vector z(n + 1);
    z.head(n) = wm + ds * t.head(n).cwiseProduct(xs) * std::sqrt(static_cast<double>(n));
    z[n] = pm + ds * t[n] * prob.p_scale;
    try {
      return newton_solve(np, z, opts.newton);
    } catch (const EvaluationError& e) {
      NewtonResult r;
      r.status = NewtonStatus::EvaluationFailed;
      r.message = e.what();
      return r;
    } catch (const ThermoError& e) {
      NewtonResult r;
      r.status = NewtonStatus::EvaluationFailed;
      r.message = e.what();
      return r;
    }
  }
};

bool in_range(double p, const ContinuationOptions& o) { return p >= o.p_min && p <= o.p_max; }

}  // namespace

Branch plac_trace(const ParametricProblem& problem, const Vector& w0, double p0,
                  const ContinuationOptions& opts) {
  opts.validate();
  if (!(problem.p_scale > 0.0)) throw ConfigError("continuation needs p_scale > 0");
  Tracer tr{problem, opts, {}, {}, w0.size()};
  tr.xs = problem.x_scale.size() ? problem.x_scale : Vector::Ones(tr.n);
  tr.fs = problem.f_scale;
  if (tr.fs.size() == 0) {
    SparseMatrix J;
    problem.jacobian(w0, p0, J);
    tr.fs = residual_scales(J, tr.xs);
  }

  Branch br;
  const NewtonResult seed = tr.natural(w0, p0);
  if (!seed.converged()) throw SolverError("continuation seed did not converge: " + seed.message);
  br.points.push_back({seed.w, p0, 0.0, 0, seed.iterations});

  // Natural-continuation bootstrap for the first secant.
  double ds = std::abs(opts.ds0);
  const double dir = opts.ds0 < 0.0 ? -1.0 : 1.0;
  for (;;) {
    const double p1 = p0 + dir * ds * problem.p_scale;
    const NewtonResult r = tr.natural(seed.w, p1);
    if (r.converged()) {
      const double dist = tr.scaled_delta(r.w, p1, seed.w, p0).norm();
      br.points.push_back({r.w, p1, dist, 0, r.iterations});
      break;
    }
    ++br.newton_failures;
    ds *= 0.5;
    if (ds < opts.ds_min) {
      br.status = ContinuationStatus::StepTooSmall;
      br.message = "bootstrap step failed down to ds_min: " + r.message;
      return br;
    }
  }

  while (static_cast<int>(br.points.size()) < opts.max_points) {
    const auto& a = br.points[br.points.size() - 2];
    const auto& b = br.points.back();
    Vector t = tr.scaled_delta(b.w, b.p, a.w, a.p);
    t.normalize();

    NewtonResult r;
    bool ok = false;
    double dist = 0.0;
    while (!ok) {
      r = tr.arclength(b.w, b.p, t, ds);
      double shrink = 0.5;
      if (r.converged()) {
        const Vector d = tr.scaled_delta(r.w.head(tr.n), r.w[tr.n], b.w, b.p);
        dist = d.norm();
        const double cosine = d.dot(t) / dist;
        if (cosine < opts.min_cosine) {
          r.message = "secant turned too sharply";
        } else if (dist > opts.ds_max * (1.0 + 1e-9)) {
          // Curvature made the chord longer than allowed; shorten just enough.
          r.message = "chord longer than ds_max";
          shrink = 0.95 * opts.ds_max / dist;
        } else {
          ok = true;
        }
      }
      if (!ok) {
        if (shrink == 0.5) ++br.newton_failures;
        ds *= shrink;
        if (ds < opts.ds_min) {
          br.status = ContinuationStatus::StepTooSmall;
          std::ostringstream os;
          os << "arclength step below ds_min at p = " << b.p << ": " << r.message;
          br.message = os.str();
          return br;
        }
      }
    }

    const double p_new = r.w[tr.n];
    if (!in_range(p_new, opts)) {
      // Close the branch on the range boundary.
      const double p_end = p_new > opts.p_max ? opts.p_max : opts.p_min;
      const double f = (p_end - b.p) / (p_new - b.p);
      const Vector guess = b.w + f * (r.w.head(tr.n) - b.w);
      const NewtonResult e = tr.natural(guess, p_end);
      if (e.converged()) {
        br.points.push_back({e.w, p_end, b.s + tr.scaled_delta(e.w, p_end, b.w, b.p).norm(),
                             b.segment, e.iterations});
      }
      br.status = ContinuationStatus::LeftRange;
      return br;
    }

    const double dp_old = b.p - a.p;
    const double dp_new = p_new - b.p;
    int segment = b.segment;
    if (dp_old * dp_new < 0.0) {
      // p reversed direction around point b.
      const std::size_t m = br.points.size() - 1;
      const double s3[3] = {a.s, b.s, b.s + dist};
      const double p3[3] = {a.p, b.p, p_new};
      TurningPoint tp{b.p, b.s, static_cast<int>(m)};
      double se = 0.0, pe = 0.0;
      if (parabola_extremum(s3, p3, se, pe) && se >= s3[0] && se <= s3[2]) {
        tp.p = pe;
        tp.s = se;
      }
      br.turning_points.push_back(tp);
      ++segment;
    }
    br.points.push_back({r.w.head(tr.n), p_new, b.s + dist, segment, r.iterations});
    if (r.iterations <= opts.fast_iterations) ds = std::min(ds * opts.grow, opts.ds_max);
  }
  br.status = ContinuationStatus::MaxPoints;
  return br;
}

}  // namespace fbrsim
