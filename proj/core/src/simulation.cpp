#include "fbrsim/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "fbrsim/errors.hpp"

namespace fbrsim {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(UnitType unit) { return unit == UnitType::AFBR ? "AFBR" : "IDCR"; }

UnitType parse_unit_type(std::string_view name) {
  const std::string s = lower(name);
  if (s == "afbr") return UnitType::AFBR;
  if (s == "idcr") return UnitType::IDCR;
  throw ConfigError("unknown unit '" + std::string(name) + "' (AFBR|IDCR)");
}

std::string_view to_string(MassMatrixMode mode) {
  return mode == MassMatrixMode::FullDynamic ? "full" : "pseudo-steady";
}

MassMatrixMode parse_mass_matrix_mode(std::string_view name) {
  const std::string s = lower(name);
  if (s == "full") return MassMatrixMode::FullDynamic;
  if (s == "pseudo-steady" || s == "pseudo_steady") return MassMatrixMode::PseudoSteadyMass;
  throw ConfigError("unknown mass matrix mode '" + std::string(name) + "' (full|pseudo-steady)");
}

std::string_view to_string(SweepParameter p) { return p == SweepParameter::T_in ? "T_in" : "P_in"; }

SweepParameter parse_sweep_parameter(std::string_view name) {
  const std::string s = lower(name);
  if (s == "t_in") return SweepParameter::T_in;
  if (s == "p_in") return SweepParameter::P_in;
  throw ConfigError("unknown sweep parameter '" + std::string(name) + "' (T_in|P_in)");
}

UnitSpec build_unit(const ModelConfig& config) {
  if (config.n_cells < 2) throw ConfigError("n_cells must be at least 2");
  UnitSpec u = config.unit == UnitType::AFBR ? build_afbr(config.dims, config.params, config.eos)
                                             : build_idcr(config.dims, config.params, config.eos);
  if (!config.dispersion) u = without_dispersion(std::move(u));
  return u;
}

NonlinearProblem steady_problem(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                                const Vector& w_ref) {
  NonlinearProblem p;
  p.residual = [&sys, cond](const Vector& w, Vector& F) { F = sys.residual(w, cond); };
  p.jacobian = [&sys, cond](const Vector& w, SparseMatrix& J) { sys.jacobian(w, cond, J); };
  p.x_scale = sys.variable_scales(w_ref, cond);
  p.f_scale = sys.residual_scales(w_ref, cond);
  return p;
}

DaeSystem dae_system(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                     MassMatrixMode mode, const Vector& w_ref) {
  DaeSystem d;
  d.residual = [&sys, cond](double, const Vector& w, Vector& F) { F = sys.residual(w, cond); };
  d.jacobian = [&sys, cond](double, const Vector& w, SparseMatrix& J) { sys.jacobian(w, cond, J); };
  d.mass = sys.mass_matrix(mode);
  d.x_scale = sys.variable_scales(w_ref, cond);
  d.f_scale = sys.residual_scales(w_ref, cond);
  return d;
}

SteadyResult solve_steady(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                          const SteadyOptions& opts) {
  OperatingConditions guess_cond = cond;
  if (opts.T_guess > 0.0) guess_cond.T_in = opts.T_guess;
  const Vector w0 = sys.initial_guess(guess_cond, opts.split);

  SteadyResult res;
  const NonlinearProblem prob = steady_problem(sys, cond, w0);
  res.newton = newton_solve(prob, w0, opts.newton);
  res.method = "newton";
  res.w = res.newton.w;
  if (!res.newton.converged() && opts.relax_horizon > 0.0) {
    // Pseudo-transient fallback: march the dynamics towards the attracting
    // steady state, then let Newton finish.
    const DaeSystem dae = dae_system(sys, cond, MassMatrixMode::FullDynamic, w0);
    IntegratorOptions io;
    io.rtol = 1e-4;
    io.atol = 1e-4;
    Vector w = w0;
    double t = 0.0;
    for (double chunk = 10.0; t < opts.relax_horizon; chunk *= 10.0) {
      const double t_end = std::min(opts.relax_horizon, t + chunk);
      const IntegrationResult ir = esdirk_integrate(dae, w, t, t_end, io);
      w = ir.w;
      t = ir.t;
      res.relax_time = t;
      if (!ir.success) break;
      NewtonResult nr = newton_solve(prob, w, opts.newton);
      if (nr.converged()) {
        res.newton = std::move(nr);
        res.method = "relaxation";
        res.w = res.newton.w;
        break;
      }
    }
  }
  if (res.converged()) res.outputs = sys.outputs(res.w, cond);
  return res;
}

OperatingConditions with_parameter(const OperatingConditions& cond, SweepParameter which, double p) {
  OperatingConditions c = cond;
  if (which == SweepParameter::T_in) {
    c.T_in = p;
  } else {
    const double dP = cond.P_in - cond.P_out;
    c.P_in = p;
    c.P_out = p - dP;
  }
  return c;
}

double parameter_of(const OperatingConditions& cond, SweepParameter which) {
  return which == SweepParameter::T_in ? cond.T_in : cond.P_in;
}

ParametricProblem parametric_problem(const SemiDiscreteSystem& sys,
                                     const OperatingConditions& cond, SweepParameter which,
                                     const Vector& w_ref) {
  ParametricProblem p;
  p.residual = [&sys, cond, which](const Vector& w, double v, Vector& F) {
    F = sys.residual(w, with_parameter(cond, which, v));
  };
  p.jacobian = [&sys, cond, which](const Vector& w, double v, SparseMatrix& J) {
    sys.jacobian(w, with_parameter(cond, which, v), J);
  };
  p.x_scale = sys.variable_scales(w_ref, cond);
  p.f_scale = sys.residual_scales(w_ref, cond);
  p.p_scale = which == SweepParameter::T_in ? 100.0 : 10e5;
  return p;
}

SweepResult sweep(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                  SweepParameter which, double p_start, double p_end, ContinuationOptions opts,
                  const SteadyOptions& steady) {
  if (p_start == p_end) throw ConfigError("sweep range is empty");
  const OperatingConditions c0 = with_parameter(cond, which, p_start);
  const SteadyResult seed = solve_steady(sys, c0, steady);
  if (!seed.converged()) throw SolverError("sweep seed did not converge: " + seed.newton.message);

  opts.ds0 = std::abs(opts.ds0) * (p_end > p_start ? 1.0 : -1.0);
  opts.p_min = std::min(p_start, p_end);
  opts.p_max = std::max(p_start, p_end);
  opts.newton = steady.newton;
  const ParametricProblem prob = parametric_problem(sys, c0, which, seed.w);

  SweepResult res;
  res.parameter = which;
  res.branch = plac_trace(prob, seed.w, p_start, opts);
  res.outputs.reserve(res.branch.points.size());
  for (const auto& pt : res.branch.points) {
    res.outputs.push_back(sys.outputs(pt.w, with_parameter(cond, which, pt.p)));
  }
  return res;
}

Optimum conversion_optimum(const SweepResult& sw) {
  Optimum best;
  const auto& pts = sw.branch.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (best.index < 0 || sw.outputs[i].X_out > best.X) {
      best.index = static_cast<int>(i);
      best.X = sw.outputs[i].X_out;
      best.p = pts[i].p;
    }
  }
  const int i = best.index;
  if (i > 0 && i + 1 < static_cast<int>(pts.size()) && pts[i - 1].segment == pts[i].segment &&
      pts[i + 1].segment == pts[i].segment) {
    const double p3[3] = {pts[i - 1].p, pts[i].p, pts[i + 1].p};
    const double x3[3] = {sw.outputs[i - 1].X_out, sw.outputs[i].X_out, sw.outputs[i + 1].X_out};
    double pe = 0.0, xe = 0.0;
    const bool monotone = (p3[1] - p3[0]) * (p3[2] - p3[1]) > 0.0;
    if (monotone && parabola_extremum(p3, x3, pe, xe) && pe >= std::min(p3[0], p3[2]) &&
        pe <= std::max(p3[0], p3[2]) && xe >= best.X) {
      best.p = pe;
      best.X = xe;
    }
  }
  return best;
}

std::vector<GridPoint> grid_sweep(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                                  SweepParameter which, const std::vector<double>& values,
                                  const SteadyOptions& steady) {
  std::vector<GridPoint> out;
  out.reserve(values.size());
  Vector warm;
  for (double v : values) {
    const OperatingConditions c = with_parameter(cond, which, v);
    GridPoint gp;
    gp.p = v;
    NewtonResult nr;
    if (warm.size()) nr = newton_solve(steady_problem(sys, c, warm), warm, steady.newton);
    if (!nr.converged()) {
      const SteadyResult sr = solve_steady(sys, c, steady);
      nr = sr.newton;
    }
    gp.converged = nr.converged();
    gp.iterations = nr.iterations;
    if (gp.converged) {
      warm = nr.w;
      gp.outputs = sys.outputs(nr.w, c);
    }
    out.push_back(gp);
  }
  return out;
}

StepResponse step_response(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                           const Vector& w_steady, double step, double horizon,
                           const StepOptions& opts) {
  if (!(horizon > 0.0)) throw ConfigError("step horizon must be positive");
  StepResponse res;
  res.step = step;
  const UnitOutputs o0 = sys.outputs(w_steady, cond);
  res.series.t.push_back(0.0);
  res.series.X.push_back(o0.X_out);
  res.series.T_out.push_back(o0.T_out);
  res.series.T_top.push_back(o0.T_top);

  OperatingConditions after = cond;
  after.T_in += step;
  const DaeSystem dae = dae_system(sys, after, opts.mass_mode, w_steady);
  Vector w0 = w_steady;
  if (opts.mass_mode == MassMatrixMode::PseudoSteadyMass) {
    NewtonOptions no;
    no.tol = 1e-10;
    const NewtonResult nr = make_consistent(dae, w0, 0.0, no);
    if (!nr.converged()) {
      res.message = "consistent initialization failed: " + nr.message;
      return res;
    }
    w0 = nr.w;
  }
  IntegratorOptions io = opts.integrator;
  io.h_max = std::min(io.h_max, horizon / 200.0);
  auto observer = [&](double t, const Vector& w) {
    if (t == 0.0) return;
    const UnitOutputs o = sys.outputs(w, after);
    res.series.t.push_back(t);
    res.series.X.push_back(o.X_out);
    res.series.T_out.push_back(o.T_out);
    res.series.T_top.push_back(o.T_top);
  };
  res.integration = esdirk_integrate(dae, w0, 0.0, horizon, io, observer);
  res.success = res.integration.success;
  res.message = res.integration.message;
  return res;
}

double half_response_time(const std::vector<double>& t, const std::vector<double>& y, double y0) {
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v - y0));
  if (!(peak > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double target = 0.5 * peak;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = std::abs(y[i] - y0);
    if (d >= target) {
      if (i == 0) return t[0];
      const double dp = std::abs(y[i - 1] - y0);
      const double f = (target - dp) / (d - dp);
      return t[i - 1] + f * (t[i] - t[i - 1]);
    }
  }
  return t.back();
}

double settling_time(const std::vector<double>& t, const std::vector<double>& y, double y0,
                     double band) {
  if (y.empty()) return 0.0;
  const double y_end = y.back();
  const double tol = band * std::abs(y_end - y0);
  for (std::size_t k = y.size(); k-- > 0;) {
    const double d = std::abs(y[k] - y_end);
    if (d > tol) {
      if (k + 1 >= y.size()) return t[k];
      const double dn = std::abs(y[k + 1] - y_end);
      const double f = (d - tol) / (d - dn);
      return t[k] + f * (t[k + 1] - t[k]);
    }
  }
  return 0.0;
}

double response_lag(const TimeSeries& s) {
  const double tx = half_response_time(s.t, s.X, s.X.front());
  const double tt = half_response_time(s.t, s.T_out, s.T_out.front());
  return tt - tx;
}

}  // namespace fbrsim
