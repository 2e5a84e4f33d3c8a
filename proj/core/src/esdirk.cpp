#include "fbrsim/esdirk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "fbrsim/errors.hpp"

namespace fbrsim {

void Tableau::validate() const {
  const int s = stages;
  if (s < 2 || a.rows() != s || a.cols() != s || b.size() != s || b_hat.size() != s ||
      c.size() != s) {
    throw ConfigError("tableau dimensions are inconsistent");
  }
  const double g = gamma();
  for (int i = 0; i < s; ++i) {
    for (int j = i + 1; j < s; ++j) {
      if (a(i, j) != 0.0) throw ConfigError("tableau is not lower triangular");
    }
    if (i == 0 && a(0, 0) != 0.0) throw ConfigError("tableau first stage is not explicit");
    if (i > 0 && std::abs(a(i, i) - g) > 1e-15) throw ConfigError("tableau diagonal is not constant");
    if (std::abs(a.row(i).sum() - c[i]) > 1e-12) throw ConfigError("tableau rows do not sum to c");
    if (std::abs(b[i] - a(s - 1, i)) > 1e-15) throw ConfigError("tableau is not stiffly accurate");
  }
}

Tableau Tableau::esdirk32() {
  Tableau t;
  t.stages = 4;
  t.order = 3;
  t.embedded_order = 2;
  const double g = 0.4358665215084590;
  t.a = Eigen::MatrixXd::Zero(4, 4);
  t.a(1, 0) = g;
  t.a(1, 1) = g;
  t.a(2, 0) = 2746238789719.0 / 10658868560708.0;
  t.a(2, 1) = -640167445237.0 / 6845629431997.0;
  t.a(2, 2) = g;
  t.a(3, 0) = 1471266399579.0 / 7840856788654.0;
  t.a(3, 1) = -4482444167858.0 / 7529755066697.0;
  t.a(3, 2) = 11266239266428.0 / 11593286722821.0;
  t.a(3, 3) = g;
  t.b = t.a.row(3).transpose();
  t.b_hat.resize(4);
  t.b_hat << 2756255671327.0 / 12835298489170.0, -10771552573575.0 / 22201958757719.0,
      9247589265047.0 / 10645013368117.0, 2193209047091.0 / 5459859503100.0;
  t.c = t.a.rowwise().sum();
  return t;
}

void IntegratorOptions::validate() const {
  if (!(rtol >= 0.0 && atol > 0.0)) throw ConfigError("integrator tolerances must be positive");
  if (!(h_min > 0.0 && h_min <= h_max)) throw ConfigError("integrator step bounds are invalid");
  if (fixed_step && !(h0 > 0.0)) throw ConfigError("fixed-step integration needs h0 > 0");
  if (newton_max_iter < 1 || !(newton_tol > 0.0) || !(algebraic_tol > 0.0)) {
    throw ConfigError("integrator Newton options are invalid");
  }
}

namespace {

bool try_eval(const DaeSystem& sys, double t, const Vector& w, Vector& F) {
  try {
    sys.residual(t, w, F);
  } catch (const EvaluationError&) {
    return false;
  } catch (const ThermoError&) {
    return false;
  }
  return F.allFinite();
}

}  // namespace

IntegrationResult esdirk_integrate(const DaeSystem& sys, const Vector& w0, double t0, double t1,
                                   const IntegratorOptions& opts, const StepObserver& observer,
                                   const Tableau& tab) {
  opts.validate();
  tab.validate();
  const Eigen::Index n = w0.size();
  if (sys.mass.size() != n) throw ConfigError("mass matrix size does not match the state");
  const Vector xs = sys.x_scale.size() ? sys.x_scale : Vector::Ones(n);
  const Vector fs = sys.f_scale.size() ? sys.f_scale : Vector::Ones(n);
  const Vector& M = sys.mass;
  const int s = tab.stages;
  const double g = tab.gamma();
  const Vector d = tab.b - tab.b_hat;
  const double k_exp = 1.0 / (tab.embedded_order + 1);

  std::vector<Eigen::Index> diff_rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (M[i] != 0.0) diff_rows.push_back(i);
  }
  auto algebraic_norm = [&](const Vector& F) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (M[i] == 0.0) m = std::max(m, std::abs(F[i]) / fs[i]);
    }
    return m;
  };
  auto weights = [&](const Vector& a, const Vector& b) {
    return (opts.atol * xs + opts.rtol * a.cwiseAbs().cwiseMax(b.cwiseAbs())).cwiseInverse();
  };
  auto wrms = [&](const Vector& v, const Vector& wt) {
    if (diff_rows.empty()) return 0.0;
    double sum = 0.0;
    for (Eigen::Index i : diff_rows) sum += v[i] * wt[i] * v[i] * wt[i];
    return std::sqrt(sum / diff_rows.size());
  };

  IntegrationResult res;
  res.w = w0;
  res.t = t0;
  IntegratorStats& st = res.stats;

  Vector Fn(n);
  if (!try_eval(sys, t0, w0, Fn)) throw SolverError("residual evaluation failed at the initial state");
  ++st.residuals;
  const double inconsistency = algebraic_norm(Fn);
  if (inconsistency > opts.consistency_tol) {
    std::ostringstream os;
    os << "inconsistent initial condition: algebraic residual " << inconsistency;
    throw SolverError(os.str());
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (M[i] == 0.0) Fn[i] = 0.0;
  }
  if (observer) observer(t0, res.w);

  double h = opts.h0;
  if (!(h > 0.0)) {
    const double dn = wrms(Fn, weights(w0, w0));
    h = dn > 0.0 ? 0.01 / dn : 1e-3 * (t1 - t0);
  }
  h = std::clamp(h, opts.h_min, std::max(opts.h_min, opts.h_max));

  SparseMatrix J;
  SparseMatrix A;
  ScaledSparseSolver solver;
  bool jac_fresh = false;
  double factored_hg = -1.0;
  auto refresh_jacobian = [&](double t, const Vector& w) {
    try {
      sys.jacobian(t, w, J);
    } catch (const EvaluationError&) {
      return false;
    } catch (const ThermoError&) {
      return false;
    }
    ++st.jacobians;
    jac_fresh = true;
    factored_hg = -1.0;
    return true;
  };
  auto factor = [&](double hg) {
    A = -J;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (M[i] != 0.0) A.coeffRef(i, i) += M[i] / hg;
    }
    ++st.factorizations;
    factored_hg = hg;
    return solver.factorize(A, fs, xs);
  };
  if (!refresh_jacobian(t0, w0)) throw SolverError("Jacobian evaluation failed at the initial state");

  std::vector<Vector> Fs(s, Vector(n));
  Vector W(n), G(n), F(n), rhs(n);
  double err_prev = 1.0;
  const double t_eps = 1e-12 * std::max(1.0, std::abs(t1));

  while (t1 - res.t > t_eps) {
    if (st.steps + st.rejected >= opts.max_steps) {
      res.message = "maximum number of steps reached";
      return res;
    }
    bool last = false;
    if (!opts.fixed_step || res.t + h > t1) {
      if (res.t + h >= t1 - t_eps) {
        h = t1 - res.t;
        last = true;
      }
    }
    const double hg = h * g;
    if (factored_hg != hg && !factor(hg)) {
      if (!jac_fresh && refresh_jacobian(res.t, res.w)) continue;
      h *= 0.25;
      ++st.newton_failures;
      if (h < opts.h_min) {
        res.message = "singular iteration matrix at the minimum step";
        return res;
      }
      continue;
    }

    // Stages.
    Fs[0] = Fn;
    W = res.w;
    bool stage_ok = true;
    int max_iters = 0;
    for (int i = 1; i < s && stage_ok; ++i) {
      rhs.setZero();
      for (int j = 0; j < i; ++j) rhs += (tab.a(i, j) / g) * Fs[j];
      const double ti = res.t + tab.c[i] * h;
      double dnorm = 0.0;
      double dprev = 0.0;
      bool conv = false;
      for (int k = 0; k <= opts.newton_max_iter; ++k) {
        if (!try_eval(sys, ti, W, F)) break;
        ++st.residuals;
        if (k > 0 && dnorm <= opts.newton_tol && algebraic_norm(F) <= opts.algebraic_tol) {
          conv = true;
          max_iters = std::max(max_iters, k);
          break;
        }
        if (k == opts.newton_max_iter) break;
        G = M.cwiseProduct(W - res.w) / hg - rhs - F;
        const Vector dW = solver.solve(-G);
        if (!dW.allFinite()) break;
        ++st.newton_iterations;
        dprev = dnorm;
        dnorm = wrms(dW, weights(res.w, W));
        if (!diff_rows.size()) dnorm = (dW.cwiseQuotient(xs)).lpNorm<Eigen::Infinity>();
        if (k > 1 && dnorm > 0.9 * dprev && dnorm > opts.newton_tol) break;
        W += dW;
      }
      if (!conv) {
        stage_ok = false;
        break;
      }
      Fs[i] = M.cwiseProduct(W - res.w) / hg - rhs;
    }

    if (!stage_ok) {
      ++st.newton_failures;
      if (!jac_fresh && refresh_jacobian(res.t, res.w)) continue;
      h *= 0.25;
      if (h < opts.h_min) {
        std::ostringstream os;
        os << "stage Newton failed at the minimum step, t = " << res.t;
        res.message = os.str();
        return res;
      }
      continue;
    }

    double err = 0.0;
    if (!opts.fixed_step) {
      Vector e = Vector::Zero(n);
      for (int j = 0; j < s; ++j) e += (h * d[j]) * Fs[j];
      err = wrms(e, weights(res.w, W));
    }
    if (err <= 1.0) {
      res.t = last ? t1 : res.t + h;
      res.w = W;
      Fn = Fs[s - 1];
      ++st.steps;
      if (observer) observer(res.t, res.w);
      // Modified Newton: keep J while the stages converge quickly.
      jac_fresh = false;
      if (max_iters > 4) refresh_jacobian(res.t, res.w);
      if (!opts.fixed_step) {
        const double e_now = std::max(err, 1e-4);
        double fac = 0.9 * std::pow(e_now, -0.7 * k_exp) * std::pow(err_prev, 0.4 * k_exp);
        fac = std::clamp(fac, 0.2, 5.0);
        err_prev = e_now;
        h = std::min(h * fac, opts.h_max);
      }
    } else {
      ++st.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -k_exp));
      if (h < opts.h_min) {
        std::ostringstream os;
        os << "step size underflow at t = " << res.t;
        res.message = os.str();
        return res;
      }
    }
  }
  res.success = true;
  return res;
}

NewtonResult make_consistent(const DaeSystem& sys, const Vector& w, double t,
                             const NewtonOptions& opts) {
  const Eigen::Index n = w.size();
  std::vector<Eigen::Index> alg;
  std::vector<Eigen::Index> pos(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sys.mass[i] == 0.0) {
      pos[i] = static_cast<Eigen::Index>(alg.size());
      alg.push_back(i);
    }
  }
  const Eigen::Index m = static_cast<Eigen::Index>(alg.size());
  auto expand = [&](const Vector& y) {
    Vector full = w;
    for (Eigen::Index k = 0; k < m; ++k) full[alg[k]] = y[k];
    return full;
  };
  NonlinearProblem np;
  np.residual = [&](const Vector& y, Vector& G) {
    Vector F(n);
    sys.residual(t, expand(y), F);
    G.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) G[k] = F[alg[k]];
  };
  np.jacobian = [&](const Vector& y, SparseMatrix& A) {
    SparseMatrix J;
    sys.jacobian(t, expand(y), J);
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index j = 0; j < J.outerSize(); ++j) {
      if (pos[j] < 0) continue;
      for (SparseMatrix::InnerIterator it(J, j); it; ++it) {
        if (pos[it.row()] >= 0) trip.emplace_back(pos[it.row()], pos[j], it.value());
      }
    }
    A.resize(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
  };
  Vector y(m);
  np.x_scale.resize(m);
  np.f_scale.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    y[k] = w[alg[k]];
    np.x_scale[k] = sys.x_scale.size() ? sys.x_scale[alg[k]] : 1.0;
    np.f_scale[k] = sys.f_scale.size() ? sys.f_scale[alg[k]] : 1.0;
  }
  NewtonResult r = newton_solve(np, y, opts);
  r.w = expand(r.w);
  return r;
}

double steady_vs_dynamic_check(const DaeSystem& sys, const Vector& w_star, double horizon,
                               const IntegratorOptions& opts) {
  const Vector xs = sys.x_scale.size() ? sys.x_scale : Vector::Ones(w_star.size());
  double drift = 0.0;
  auto obs = [&](double, const Vector& w) {
    drift = std::max(drift, (w - w_star).cwiseQuotient(xs).lpNorm<Eigen::Infinity>());
  };
  const IntegrationResult r = esdirk_integrate(sys, w_star, 0.0, horizon, opts, obs);
  if (!r.success) throw SolverError("steady-state check integration failed: " + r.message);
  return drift;
}

}  // namespace fbrsim
