// fbrsim command line: run configured reactor experiments and compare runs.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "fbrsim/errors.hpp"
#include "runner.hpp"

using namespace fbrsim;

int main(int argc, char** argv) {
  CLI::App app{"Fixed-bed reactor simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, eos;
  int cells = 0;
  double tol = 0.0;
  bool heat_of_reaction = false;
  auto* sim = app.add_subcommand("simulate", "Run the experiment described by a config file");
  sim->add_option("--config", config_path, "INI run configuration");
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--eos", eos, "Override model.eos (ideal|srk|pr)");
  sim->add_option("--cells", cells, "Override model.n_cells");
  sim->add_option("--tol", tol, "Override solver.tol");
  sim->add_flag("--heat-of-reaction", heat_of_reaction,
                "Tabulate the heat of reaction over the [heat_of_reaction] grid");

  std::string dir_a, dir_b, quantity, compare_out;
  auto* cmp = app.add_subcommand("compare", "Difference of one quantity between two runs");
  cmp->add_option("--a", dir_a, "First result directory")->required();
  cmp->add_option("--b", dir_b, "Second result directory")->required();
  cmp->add_option("--quantity", quantity, "Column name, e.g. X_out, T_out, dH")->required();
  cmp->add_option("--out", compare_out, "Write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return app::kExitConfig;
  }

  if (*cmp) {
    try {
      if (compare_out.empty()) {
        app::compare_runs(dir_a, dir_b, quantity, std::cout);
      } else {
        std::ofstream f(compare_out);
        if (!f) throw ConfigError("cannot write " + compare_out);
        app::compare_runs(dir_a, dir_b, quantity, f);
      }
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return app::kExitConfig;
    }
    return app::kExitOk;
  }

  app::RunConfig config;
  try {
    if (config_path.empty() && !heat_of_reaction) {
      throw ConfigError("--config is required unless --heat-of-reaction is given");
    }
    config = config_path.empty() ? app::default_run_config() : app::load_run_config(config_path);
    if (!eos.empty()) config.model.eos = parse_eos(eos);
    if (cells) config.model.n_cells = cells;
    if (tol > 0.0) config.tol = tol;
    if (heat_of_reaction) config.experiment = app::Experiment::HeatOfReaction;
    config.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return app::kExitConfig;
  }
  return app::run_simulation(config, out_dir, std::cout);
}
