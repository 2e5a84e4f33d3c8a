#pragma once

// Run configuration: a flat INI file with one section per concern. See
// configs/afbr_steady.ini for an annotated example.

#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fbrsim/simulation.hpp"

namespace fbrsim::app {

enum class Experiment { Steady, Sweep, Step, HeatOfReaction };

std::string_view to_string(Experiment e);

// Where a step experiment starts from.
enum class StepBase {
  Value,       // the configured T_in
  Optimum,     // conversion optimum of a sweep over [sweep] start..end
  Extinction,  // ignited state at the lowest turning point of that sweep
};

std::string_view to_string(StepBase b);

struct RunConfig {
  ModelConfig model{};
  MassMatrixMode mass_mode = MassMatrixMode::FullDynamic;
  PressureSplit split = PressureSplit::Coupling;
  OperatingConditions cond{};  // pressures in Pa
  double T_guess = 0.0;

  Experiment experiment = Experiment::Steady;

  SweepParameter sweep_parameter = SweepParameter::T_in;
  double sweep_start = 500.0;
  double sweep_end = 700.0;
  double grid_step = 0.0;  // > 0 also writes a fixed-grid sweep
  ContinuationOptions continuation{};

  StepBase step_base = StepBase::Value;
  std::vector<double> steps{5.0, -5.0};
  double horizon = 600.0;

  // Heat-of-reaction grid; P in bar.
  double hr_T_min = 600.0, hr_T_max = 800.0, hr_T_step = 20.0;
  double hr_P_min = 150.0, hr_P_max = 300.0, hr_P_step = 50.0;

  double tol = 1e-4;
  int max_iter = 50;
  double rtol = 1e-5;
  double atol = 1e-5;

  // Cross-field checks. Throws ConfigError naming the offending key.
  void validate() const;
};

// Defaults from the case-study tables with the nominal feed at T_in = 760 K.
RunConfig default_run_config();

// Unknown sections or keys and malformed values throw ConfigError with the
// section.key name.
RunConfig parse_run_config(const boost::property_tree::ptree& tree);
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config_string(const std::string& ini);

// Every key with its effective value; parse_run_config(to_ptree(c)) == c.
boost::property_tree::ptree to_ptree(const RunConfig& config);

}  // namespace fbrsim::app
