#pragma once

// Experiments on a discretized reactor unit: steady states, parameter sweeps,
// inlet-temperature step responses and the response metrics used to compare
// them.

#include <string>
#include <vector>

#include "fbrsim/continuation.hpp"
#include "fbrsim/esdirk.hpp"
#include "fbrsim/fvm.hpp"
#include "fbrsim/newton.hpp"
#include "fbrsim/reactor.hpp"

namespace fbrsim {

enum class UnitType { AFBR, IDCR };

std::string_view to_string(UnitType unit);
UnitType parse_unit_type(std::string_view name);

std::string_view to_string(MassMatrixMode mode);
// "full" or "pseudo-steady".
MassMatrixMode parse_mass_matrix_mode(std::string_view name);

struct ModelConfig {
  UnitType unit = UnitType::AFBR;
  EosKind eos = EosKind::SRK;
  int n_cells = 100;
  bool dispersion = true;  // false zeroes D and kappa
  ReactorDimensions dims{};
  ReactorParameters params{};
};

UnitSpec build_unit(const ModelConfig& config);

// Steady-state and sweep problems share these scalings.
NonlinearProblem steady_problem(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                                const Vector& w_ref);

struct SteadyOptions {
  NewtonOptions newton{};
  PressureSplit split = PressureSplit::Coupling;
  double T_guess = 0.0;  // temperature of the initial guess, 0 means T_in
  // When Newton fails from the guess, integrate the dynamics in growing
  // chunks up to this horizon and retry Newton after each chunk.
  double relax_horizon = 1e6;
};

struct SteadyResult {
  Vector w;
  NewtonResult newton;
  std::string method;  // "newton" or "relaxation"
  double relax_time = 0.0;
  UnitOutputs outputs;

  bool converged() const { return newton.converged(); }
};

SteadyResult solve_steady(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                          const SteadyOptions& opts = {});

enum class SweepParameter { T_in, P_in };

std::string_view to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view name);

// Sets the swept input. P_in keeps the unit's pressure drop.
OperatingConditions with_parameter(const OperatingConditions& cond, SweepParameter which, double p);
double parameter_of(const OperatingConditions& cond, SweepParameter which);

ParametricProblem parametric_problem(const SemiDiscreteSystem& sys,
                                     const OperatingConditions& cond, SweepParameter which,
                                     const Vector& w_ref);

struct SweepResult {
  SweepParameter parameter = SweepParameter::T_in;
  Branch branch;
  std::vector<UnitOutputs> outputs;  // one per branch point
};

// Continuation in `which` from p_start towards p_end. The seed is solved
// with solve_steady at p_start.
SweepResult sweep(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                  SweepParameter which, double p_start, double p_end,
                  ContinuationOptions opts = {}, const SteadyOptions& steady = {});

struct Optimum {
  double p = 0.0;
  double X = 0.0;
  int index = -1;  // nearest branch point
};

// Maximum outlet conversion along the branch, refined by a parabola through
// the best point and its neighbours on the same segment.
Optimum conversion_optimum(const SweepResult& sweep);

struct GridPoint {
  double p = 0.0;
  bool converged = false;
  UnitOutputs outputs;
  int iterations = 0;
};

// Natural continuation over the given values, each solve warm-started from
// the previous converged one.
std::vector<GridPoint> grid_sweep(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                                  SweepParameter which, const std::vector<double>& values,
                                  const SteadyOptions& steady = {});

DaeSystem dae_system(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                     MassMatrixMode mode, const Vector& w_ref);

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> X;
  std::vector<double> T_out;
  std::vector<double> T_top;
};

struct StepResponse {
  double step = 0.0;  // inlet temperature change [K]
  TimeSeries series;  // first sample is the pre-step steady state at t = 0
  IntegrationResult integration;
  bool success = false;
  std::string message;
};

struct StepOptions {
  IntegratorOptions integrator{};
  MassMatrixMode mass_mode = MassMatrixMode::FullDynamic;
};

// Starts from the steady state w_steady of `cond` and applies T_in += step at
// t = 0. In pseudo-steady mode the concentrations are first made consistent
// with the new inlet.
StepResponse step_response(const SemiDiscreteSystem& sys, const OperatingConditions& cond,
                           const Vector& w_steady, double step, double horizon,
                           const StepOptions& opts = {});

// First time |y - y0| reaches half of its largest excursion, linearly
// interpolated. NaN if y never leaves y0.
double half_response_time(const std::vector<double>& t, const std::vector<double>& y, double y0);

// Last time y lies outside the band |y - y_end| <= band * |y_end - y0|,
// interpolated to the band crossing. 0 if it never leaves the band.
double settling_time(const std::vector<double>& t, const std::vector<double>& y, double y0,
                     double band = 0.05);

// Outlet temperature half-response time minus the conversion half-response
// time.
double response_lag(const TimeSeries& s);

}  // namespace fbrsim
