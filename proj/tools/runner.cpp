#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "fbrsim/errors.hpp"
#include "table.hpp"

#ifndef FBRSIM_VERSION
#define FBRSIM_VERSION "unknown"
#endif

namespace fbrsim::app {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json config_echo(const RunConfig& c) {
  json out = json::object();
  for (const auto& [section, body] : to_ptree(c)) {
    json s = json::object();
    for (const auto& [key, value] : body) s[key] = value.data();
    out[section] = s;
  }
  return out;
}

json newton_json(const NewtonResult& r) {
  json log = json::array();
  for (const auto& it : r.log) {
    log.push_back({{"iter", it.iter}, {"residual", it.residual_norm}, {"step", it.step_norm},
                   {"alpha", it.alpha}});
  }
  return {{"status", std::string(to_string(r.status))},
          {"iterations", r.iterations},
          {"residual_norm", r.residual_norm},
          {"message", r.message},
          {"log", log}};
}

json outputs_json(const UnitOutputs& o) {
  return {{"X_out", o.X_out}, {"T_out", o.T_out}, {"T_top", o.T_top}, {"F_in_H2", o.F_in_H2},
          {"F_out_H2", o.F_out_H2}};
}

json integrator_json(const IntegrationResult& r) {
  return {{"success", r.success},       {"message", r.message},
          {"t_end", r.t},               {"steps", r.stats.steps},
          {"rejected", r.stats.rejected}, {"newton_failures", r.stats.newton_failures},
          {"newton_iterations", r.stats.newton_iterations}, {"jacobians", r.stats.jacobians},
          {"factorizations", r.stats.factorizations}};
}

// JSON has no NaN; undefined metrics become null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

OperatingConditions normalized(OperatingConditions c) {
  double sum = 0.0;
  for (double x : c.x_in) sum += x;
  for (double& x : c.x_in) x /= sum;
  return c;
}

SteadyOptions steady_options(const RunConfig& c) {
  SteadyOptions o;
  o.newton.tol = c.tol;
  o.newton.max_iter = c.max_iter;
  o.split = c.split;
  o.T_guess = c.T_guess;
  return o;
}

// Swept values in model units (Pa for pressures).
double to_model(const RunConfig& c, double v) {
  return c.sweep_parameter == SweepParameter::P_in ? v * 1e5 : v;
}
double from_model(const RunConfig& c, double v) {
  return c.sweep_parameter == SweepParameter::P_in ? v / 1e5 : v;
}
std::string parameter_column(const RunConfig& c) {
  return c.sweep_parameter == SweepParameter::P_in ? "p [bar]" : "p [K]";
}

Table profile_table(const SemiDiscreteSystem& sys, const Vector& w, const OperatingConditions& cond) {
  const auto& unit = sys.unit();
  const auto& layout = sys.layout();
  const int nc = layout.n_components;
  Table t;
  t.columns = {"volume [-]", "z [m]"};
  for (int i = 0; i < nc; ++i) t.columns.push_back("c_" + unit.fluid.components()[i].name + " [mol/m3]");
  for (const char* c : {"u [J/m3]", "T [K]", "P [bar]", "v [m/s]"}) t.columns.push_back(c);
  const FluxRecord rec = sys.fluxes(w, cond);
  for (int v = 0; v < layout.n_volumes; ++v) {
    for (int k = 0; k < layout.n_cells; ++k) {
      std::vector<double> row{static_cast<double>(v), sys.grid(v).midpoint(k)};
      for (int i = 0; i < nc; ++i) row.push_back(w[layout.c(v, k, i)]);
      row.push_back(w[layout.u(v, k)]);
      row.push_back(w[layout.T(v, k)]);
      row.push_back(w[layout.P(v, k)] / 1e5);
      row.push_back(0.5 * (rec.v[v][k] + rec.v[v][k + 1]));
      t.add_row(std::move(row));
    }
  }
  return t;
}

struct Context {
  const RunConfig& config;
  const fs::path& out;
  std::ostream& log;
  json& meta;
};

bool run_steady(Context& ctx, const SemiDiscreteSystem& sys, const OperatingConditions& cond) {
  const SteadyResult r = solve_steady(sys, cond, steady_options(ctx.config));
  ctx.meta["solver"] = {{"method", r.method}, {"relax_time", r.relax_time},
                        {"newton", newton_json(r.newton)}};
  if (!r.converged()) {
    ctx.meta["failure"] = {{"stage", "steady"}, {"message", r.newton.message}};
    return false;
  }
  write_table(profile_table(sys, r.w, cond), ctx.out / "profiles.csv");
  json res = outputs_json(r.outputs);
  res["constraint_residual"] = sys.constraint_residual(r.w);
  ctx.meta["results"] = res;
  ctx.log << "steady: X_out = " << r.outputs.X_out << ", T_out = " << r.outputs.T_out << " K\n";
  return true;
}

struct SweepOutcome {
  SweepResult result;
  bool complete = false;
};

SweepOutcome run_sweep_branch(Context& ctx, const SemiDiscreteSystem& sys,
                              const OperatingConditions& cond, bool write) {
  const RunConfig& c = ctx.config;
  SweepOutcome out;
  out.result = sweep(sys, cond, c.sweep_parameter, to_model(c, c.sweep_start), to_model(c, c.sweep_end),
                     c.continuation, steady_options(c));
  const auto& br = out.result.branch;
  out.complete = br.status != ContinuationStatus::StepTooSmall;

  json tps = json::array();
  for (const auto& tp : br.turning_points) tps.push_back(from_model(c, tp.p));
  json sw = {{"status", std::string(to_string(br.status))},
             {"message", br.message},
             {"points", br.points.size()},
             {"newton_failures", br.newton_failures},
             {"turning_points", tps}};
  if (br.turning_points.size() >= 2) {
    double lo = 1e300, hi = -1e300;
    for (const auto& tp : br.turning_points) {
      lo = std::min(lo, tp.p);
      hi = std::max(hi, tp.p);
    }
    sw["multiplicity_window"] = from_model(c, hi) - from_model(c, lo);
  }
  if (!br.points.empty()) {
    const Optimum opt = conversion_optimum(out.result);
    sw["optimum"] = {{"p", from_model(c, opt.p)}, {"X_out", opt.X}};
  }
  ctx.meta["sweep"] = sw;

  if (write) {
    Table t;
    t.columns = {"point [-]", parameter_column(c), "X_out [-]", "T_out [K]", "T_top [K]",
                 "segment [-]", "turning [-]"};
    for (std::size_t i = 0; i < br.points.size(); ++i) {
      double turning = 0.0;
      for (const auto& tp : br.turning_points) {
        if (tp.index == static_cast<int>(i)) turning = 1.0;
      }
      const auto& o = out.result.outputs[i];
      t.add_row({static_cast<double>(i), from_model(c, br.points[i].p), o.X_out, o.T_out, o.T_top,
                 static_cast<double>(br.points[i].segment), turning});
    }
    write_table(t, ctx.out / "branch.csv");
    Table tp;
    tp.columns = {parameter_column(c), "s [-]", "point [-]"};
    for (const auto& p : br.turning_points) {
      tp.add_row({from_model(c, p.p), p.s, static_cast<double>(p.index)});
    }
    write_table(tp, ctx.out / "turning_points.csv");
  }
  if (!out.complete) ctx.meta["failure"] = {{"stage", "sweep"}, {"message", br.message}};
  return out;
}

bool run_grid(Context& ctx, const SemiDiscreteSystem& sys, const OperatingConditions& cond) {
  const RunConfig& c = ctx.config;
  std::vector<double> values;
  const double dir = c.sweep_end > c.sweep_start ? 1.0 : -1.0;
  const double span = std::abs(c.sweep_end - c.sweep_start);
  const int n = static_cast<int>(std::floor(span / c.grid_step + 1e-9));
  for (int i = 0; i <= n; ++i) values.push_back(to_model(c, c.sweep_start + dir * i * c.grid_step));
  const auto grid = grid_sweep(sys, cond, c.sweep_parameter, values, steady_options(c));
  Table t;
  t.columns = {parameter_column(c), "converged [-]", "X_out [-]", "T_out [K]", "T_top [K]"};
  bool all = true;
  for (const auto& g : grid) {
    const double nan = std::nan("");
    t.add_row({from_model(c, g.p), g.converged ? 1.0 : 0.0, g.converged ? g.outputs.X_out : nan,
               g.converged ? g.outputs.T_out : nan, g.converged ? g.outputs.T_top : nan});
    all = all && g.converged;
  }
  write_table(t, ctx.out / "sweep_grid.csv");
  ctx.meta["grid"] = {{"points", grid.size()}, {"all_converged", all}};
  if (!all) ctx.meta["failure"] = {{"stage", "grid"}, {"message", "some grid points did not converge"}};
  return all;
}

bool run_steps(Context& ctx, const SemiDiscreteSystem& sys, const OperatingConditions& cond) {
  const RunConfig& c = ctx.config;
  OperatingConditions base = cond;
  Vector w_base;
  if (c.step_base == StepBase::Value) {
    const SteadyResult r = solve_steady(sys, cond, steady_options(c));
    ctx.meta["base"] = {{"kind", "value"}, {"newton", newton_json(r.newton)}};
    if (!r.converged()) {
      ctx.meta["failure"] = {{"stage", "base steady state"}, {"message", r.newton.message}};
      return false;
    }
    w_base = r.w;
  } else {
    if (c.sweep_parameter != SweepParameter::T_in) {
      throw ConfigError("sweep.parameter: step bases from a sweep need T_in");
    }
    const SweepOutcome sw = run_sweep_branch(ctx, sys, cond, false);
    const auto& br = sw.result.branch;
    if (br.points.empty()) return false;
    if (c.step_base == StepBase::Optimum) {
      const Optimum opt = conversion_optimum(sw.result);
      base = with_parameter(cond, SweepParameter::T_in, opt.p);
      const NewtonResult nr =
          newton_solve(steady_problem(sys, base, br.points[opt.index].w), br.points[opt.index].w,
                       steady_options(c).newton);
      if (!nr.converged()) {
        ctx.meta["failure"] = {{"stage", "optimum steady state"}, {"message", nr.message}};
        return false;
      }
      w_base = nr.w;
    } else {
      if (br.turning_points.empty()) {
        ctx.meta["failure"] = {{"stage", "extinction point"}, {"message", "branch has no turning point"}};
        return false;
      }
      auto lowest = br.turning_points.front();
      for (const auto& tp : br.turning_points) {
        if (tp.p < lowest.p) lowest = tp;
      }
      // First point past the turn lies on the ignited side.
      const std::size_t j = std::min<std::size_t>(lowest.index + 1, br.points.size() - 1);
      base = with_parameter(cond, SweepParameter::T_in, br.points[j].p);
      w_base = br.points[j].w;
    }
    ctx.meta["base"] = {{"kind", std::string(to_string(c.step_base))}, {"T_in", base.T_in},
                        {"outputs", outputs_json(sys.outputs(w_base, base))}};
  }

  StepOptions so;
  so.mass_mode = c.mass_mode;
  so.integrator.rtol = c.rtol;
  so.integrator.atol = c.atol;
  Table t;
  t.columns = {"step [K]", "t [s]", "X_out [-]", "T_out [K]", "T_top [K]"};
  json steps = json::array();
  bool ok = true;
  for (double dT : c.steps) {
    const StepResponse r = step_response(sys, base, w_base, dT, c.horizon, so);
    const auto& s = r.series;
    for (std::size_t i = 0; i < s.t.size(); ++i) t.add_row({dT, s.t[i], s.X[i], s.T_out[i], s.T_top[i]});
    json sj = {{"step", dT},
               {"success", r.success},
               {"message", r.message},
               {"samples", s.t.size()},
               {"lag", number_or_null(response_lag(s))},
               {"settling_X", number_or_null(settling_time(s.t, s.X, s.X.front()))},
               {"settling_T_top", number_or_null(settling_time(s.t, s.T_top, s.T_top.front()))},
               {"X_final", s.X.back()},
               {"T_out_final", s.T_out.back()},
               {"integrator", integrator_json(r.integration)}};
    steps.push_back(sj);
    ctx.log << "step " << dT << " K: " << (r.success ? "ok" : r.message) << "\n";
    ok = ok && r.success;
  }
  write_table(t, ctx.out / "timeseries.csv");
  ctx.meta["steps"] = steps;
  if (!ok) ctx.meta["failure"] = {{"stage", "integration"}, {"message", "at least one step failed"}};
  return ok;
}

bool run_heat_of_reaction(Context& ctx) {
  const RunConfig& c = ctx.config;
  const UnitSpec unit = build_unit(c.model);
  const auto& nu = unit.volumes.back().kinetics->nu;
  const FluidModel ideal(unit.fluid.components(), EosKind::IdealGas,
                         c.model.params.enthalpy_reference);
  const OperatingConditions cond = normalized(c.cond);
  Table t;
  t.columns = {"T [K]", "P [bar]", "dH [J/mol]", "dH_ideal [J/mol]", "ratio [-]"};
  const int nT = static_cast<int>(std::floor((c.hr_T_max - c.hr_T_min) / c.hr_T_step + 1e-9));
  const int nP = static_cast<int>(std::floor((c.hr_P_max - c.hr_P_min) / c.hr_P_step + 1e-9));
  for (int i = 0; i <= nT; ++i) {
    const double T = c.hr_T_min + i * c.hr_T_step;
    for (int j = 0; j <= nP; ++j) {
      const double P = c.hr_P_min + j * c.hr_P_step;
      const double dH = heat_of_reaction(unit.fluid, T, P * 1e5, cond.x_in, nu);
      const double dH0 = heat_of_reaction(ideal, T, P * 1e5, cond.x_in, nu);
      t.add_row({T, P, dH, dH0, dH / dH0});
    }
  }
  write_table(t, ctx.out / "heat_of_reaction.csv");
  ctx.meta["results"] = {{"rows", t.rows.size()}};
  return true;
}

}  // namespace

int run_simulation(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir.string());

  json meta;
  meta["version"] = FBRSIM_VERSION;
  meta["status"] = "running";
  meta["config"] = config_echo(config);
  Context ctx{config, out_dir, log, meta};

  bool ok = false;
  int code = kExitOk;
  try {
    if (config.experiment == Experiment::HeatOfReaction) {
      ok = run_heat_of_reaction(ctx);
    } else {
      const UnitSpec unit = build_unit(config.model);
      const SemiDiscreteSystem sys(unit, config.model.n_cells);
      const OperatingConditions cond = normalized(config.cond);
      cond.validate(unit.fluid.size());
      meta["unknowns"] = sys.size();
      switch (config.experiment) {
        case Experiment::Steady:
          ok = run_steady(ctx, sys, cond);
          break;
        case Experiment::Sweep:
          ok = run_sweep_branch(ctx, sys, cond, true).complete;
          if (ok && config.grid_step > 0.0) ok = run_grid(ctx, sys, cond);
          break;
        case Experiment::Step:
          ok = run_steps(ctx, sys, cond);
          break;
        case Experiment::HeatOfReaction:
          break;
      }
    }
    if (!ok) code = kExitSolver;
  } catch (const ConfigError& e) {
    meta["failure"] = {{"stage", "config"}, {"message", e.what()}};
    code = kExitConfig;
  } catch (const std::exception& e) {
    // SolverError, EvaluationError, ThermoError: the numerics gave up.
    meta["failure"] = {{"stage", "solver"}, {"message", e.what()}};
    code = kExitSolver;
  }
  meta["status"] = code == kExitOk ? "ok" : "failed";
  meta["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream(out_dir / "metadata.json") << meta.dump(2) << '\n';
  if (code != kExitOk) log << "failed: " << meta["failure"].value("message", "") << "\n";
  return code;
}

namespace {

void print_table(const Table& t, std::ostream& out) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

// Adaptive time grids differ between runs: b is interpolated linearly onto
// a's sample times, step by step.
bool compare_timeseries(const fs::path& a, const fs::path& b, const std::string& quantity,
                        std::ostream& out) {
  const Table ta = read_table(a / "timeseries.csv");
  const int qa = ta.column(quantity);
  if (qa < 0) return false;
  const Table tb = read_table(b / "timeseries.csv");
  const int qb = tb.column(quantity);
  if (qb < 0) throw ConfigError(b.string() + "/timeseries.csv has no column " + quantity);
  const int sa = ta.column("step"), ka = ta.column("t");
  const int sb = tb.column("step"), kb = tb.column("t");
  if (sa < 0 || ka < 0 || sb < 0 || kb < 0) throw ConfigError("timeseries.csv needs step and t columns");

  Table t;
  const std::string unit = ta.columns[qa].substr(quantity.size());
  t.columns = {ta.columns[sa], ta.columns[ka], quantity + "_a" + unit, quantity + "_b" + unit,
               "diff" + unit, "ratio [-]"};
  for (const auto& row : ta.rows) {
    std::vector<double> bt, bv;
    for (const auto& rb : tb.rows) {
      if (rb[sb] == row[sa]) {
        bt.push_back(rb[kb]);
        bv.push_back(rb[qb]);
      }
    }
    if (bt.empty()) throw ConfigError("run b has no step " + format_number(row[sa]));
    const double time = row[ka];
    if (time < bt.front() - 1e-9 || time > bt.back() + 1e-9) {
      throw ConfigError("run b does not cover t = " + format_number(time));
    }
    const auto it = std::lower_bound(bt.begin(), bt.end(), time);
    std::size_t j = static_cast<std::size_t>(it - bt.begin());
    double vb;
    if (j == 0) {
      vb = bv.front();
    } else if (j >= bt.size()) {
      vb = bv.back();
    } else {
      const double f = (time - bt[j - 1]) / (bt[j] - bt[j - 1]);
      vb = bv[j - 1] + f * (bv[j] - bv[j - 1]);
    }
    const double va = row[qa];
    t.add_row({row[sa], time, va, vb, va - vb, vb != 0.0 ? va / vb : std::nan("")});
  }
  print_table(t, out);
  return true;
}

}  // namespace

void compare_runs(const fs::path& a, const fs::path& b, const std::string& quantity,
                  std::ostream& out) {
  struct Source {
    const char* file;
    std::vector<std::string> keys;
  };
  const Source sources[] = {{"sweep_grid.csv", {"p"}},
                            {"heat_of_reaction.csv", {"T", "P"}},
                            {"branch.csv", {"p"}},
                            {"profiles.csv", {"volume", "z"}}};
  for (const auto& src : sources) {
    if (!fs::exists(a / src.file)) continue;
    const Table ta = read_table(a / src.file);
    const int qa = ta.column(quantity);
    if (qa < 0) continue;
    const Table tb = read_table(b / src.file);
    const int qb = tb.column(quantity);
    if (qb < 0) throw ConfigError(b.string() + "/" + src.file + " has no column " + quantity);
    if (ta.rows.size() != tb.rows.size()) {
      throw ConfigError("runs do not share the grid: " + std::to_string(ta.rows.size()) + " vs " +
                        std::to_string(tb.rows.size()) + " rows");
    }
    std::vector<int> ka, kb;
    for (const auto& k : src.keys) {
      ka.push_back(ta.column(k));
      kb.push_back(tb.column(k));
      if (ka.back() < 0 || kb.back() < 0) throw ConfigError(std::string(src.file) + " has no key column " + k);
    }
    Table t;
    for (std::size_t i = 0; i < ka.size(); ++i) t.columns.push_back(ta.columns[ka[i]]);
    const std::string unit = ta.columns[qa].substr(quantity.size());
    t.columns.push_back(quantity + "_a" + unit);
    t.columns.push_back(quantity + "_b" + unit);
    t.columns.push_back("diff" + unit);
    t.columns.push_back("ratio [-]");
    for (std::size_t r = 0; r < ta.rows.size(); ++r) {
      std::vector<double> row;
      for (std::size_t i = 0; i < ka.size(); ++i) {
        const double va = ta.rows[r][ka[i]];
        const double vb = tb.rows[r][kb[i]];
        if (std::abs(va - vb) > 1e-9 * std::max(1.0, std::abs(va))) {
          throw ConfigError("runs do not share the grid at row " + std::to_string(r + 1));
        }
        row.push_back(va);
      }
      const double va = ta.rows[r][qa];
      const double vb = tb.rows[r][qb];
      row.push_back(va);
      row.push_back(vb);
      row.push_back(va - vb);
      row.push_back(vb != 0.0 ? va / vb : std::nan(""));
      t.add_row(std::move(row));
    }
    print_table(t, out);
    return;
  }
  if (fs::exists(a / "timeseries.csv") && compare_timeseries(a, b, quantity, out)) return;
  throw ConfigError("no result table in " + a.string() + " has a column '" + quantity + "'");
}

}  // namespace fbrsim::app
