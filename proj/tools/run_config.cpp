#include "run_config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "fbrsim/errors.hpp"

namespace fbrsim::app {

namespace pt = boost::property_tree;

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::Steady: return "steady";
    case Experiment::Sweep: return "sweep";
    case Experiment::Step: return "step";
    case Experiment::HeatOfReaction: return "heat-of-reaction";
  }
  return "?";
}

std::string_view to_string(StepBase b) {
  switch (b) {
    case StepBase::Value: return "value";
    case StepBase::Optimum: return "optimum";
    case StepBase::Extinction: return "extinction";
  }
  return "?";
}

namespace {

const char* const kSpecies[] = {"N2", "H2", "NH3", "Ar"};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError("'" + s + "' is not a number");
  }
  return v;
}

int to_int(const std::string& s) {
  const std::string t = trim(s);
  int v = 0;
  auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    throw ConfigError("'" + s + "' is not an integer");
  }
  return v;
}

bool to_bool(const std::string& s) {
  const std::string t = lower(trim(s));
  if (t == "on" || t == "true" || t == "yes" || t == "1") return true;
  if (t == "off" || t == "false" || t == "no" || t == "0") return false;
  throw ConfigError("'" + s + "' is not on/off");
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(to_double(item));
  }
  return out;
}

std::string from_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class Member>
Field number(std::string sec, std::string key, Member m, double unit = 1.0) {
  return {std::move(sec), std::move(key),
          [m, unit](const RunConfig& c) { return fmt(c.*m / unit); },
          [m, unit](RunConfig& c, const std::string& v) { c.*m = to_double(v) * unit; }};
}

#define FBRSIM_NESTED(sec, key, path)                                               \
  Field {                                                                           \
    sec, key, [](const RunConfig& c) { return fmt(c.path); },                       \
        [](RunConfig& c, const std::string& v) { c.path = to_double(v); }           \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    v.push_back({"model", "unit", [](const RunConfig& c) { return std::string(to_string(c.model.unit)); },
                 [](RunConfig& c, const std::string& s) { c.model.unit = parse_unit_type(trim(s)); }});
    v.push_back({"model", "eos", [](const RunConfig& c) { return std::string(to_string(c.model.eos)); },
                 [](RunConfig& c, const std::string& s) { c.model.eos = parse_eos(trim(s)); }});
    v.push_back({"model", "n_cells", [](const RunConfig& c) { return std::to_string(c.model.n_cells); },
                 [](RunConfig& c, const std::string& s) { c.model.n_cells = to_int(s); }});
    v.push_back({"model", "dispersion",
                 [](const RunConfig& c) { return std::string(c.model.dispersion ? "on" : "off"); },
                 [](RunConfig& c, const std::string& s) { c.model.dispersion = to_bool(s); }});
    v.push_back({"model", "mass_matrix",
                 [](const RunConfig& c) { return std::string(to_string(c.mass_mode)); },
                 [](RunConfig& c, const std::string& s) { c.mass_mode = parse_mass_matrix_mode(trim(s)); }});
    v.push_back({"model", "enthalpy_reference",
                 [](const RunConfig& c) { return std::string(to_string(c.model.params.enthalpy_reference)); },
                 [](RunConfig& c, const std::string& s) {
                   c.model.params.enthalpy_reference = parse_enthalpy_reference(trim(s));
                 }});
    v.push_back({"model", "pressure_split",
                 [](const RunConfig& c) {
                   return std::string(c.split == PressureSplit::Coupling ? "coupling" : "length");
                 },
                 [](RunConfig& c, const std::string& s) {
                   const std::string t = lower(trim(s));
                   if (t == "coupling") c.split = PressureSplit::Coupling;
                   else if (t == "length") c.split = PressureSplit::Length;
                   else throw ConfigError("'" + s + "' is not coupling/length");
                 }});
    v.push_back(number("model", "T_guess", &RunConfig::T_guess));

    v.push_back(FBRSIM_NESTED("conditions", "T_in", cond.T_in));
    v.push_back({"conditions", "P_in", [](const RunConfig& c) { return fmt(c.cond.P_in / 1e5); },
                 [](RunConfig& c, const std::string& s) { c.cond.P_in = to_double(s) * 1e5; }});
    v.push_back({"conditions", "P_out", [](const RunConfig& c) { return fmt(c.cond.P_out / 1e5); },
                 [](RunConfig& c, const std::string& s) { c.cond.P_out = to_double(s) * 1e5; }});
    for (int i = 0; i < 4; ++i) {
      v.push_back({"conditions", std::string("x_") + kSpecies[i],
                   [i](const RunConfig& c) { return fmt(c.cond.x_in[i]); },
                   [i](RunConfig& c, const std::string& s) { c.cond.x_in[i] = to_double(s); }});
    }

    v.push_back({"experiment", "type", [](const RunConfig& c) { return std::string(to_string(c.experiment)); },
                 [](RunConfig& c, const std::string& s) {
                   const std::string t = lower(trim(s));
                   if (t == "steady") c.experiment = Experiment::Steady;
                   else if (t == "sweep") c.experiment = Experiment::Sweep;
                   else if (t == "step") c.experiment = Experiment::Step;
                   else if (t == "heat-of-reaction") c.experiment = Experiment::HeatOfReaction;
                   else throw ConfigError("'" + s + "' is not steady/sweep/step/heat-of-reaction");
                 }});

    v.push_back({"sweep", "parameter", [](const RunConfig& c) { return std::string(to_string(c.sweep_parameter)); },
                 [](RunConfig& c, const std::string& s) { c.sweep_parameter = parse_sweep_parameter(trim(s)); }});
    v.push_back(number("sweep", "start", &RunConfig::sweep_start));
    v.push_back(number("sweep", "end", &RunConfig::sweep_end));
    v.push_back(number("sweep", "grid_step", &RunConfig::grid_step));
    v.push_back(FBRSIM_NESTED("sweep", "ds0", continuation.ds0));
    v.push_back(FBRSIM_NESTED("sweep", "ds_min", continuation.ds_min));
    v.push_back(FBRSIM_NESTED("sweep", "ds_max", continuation.ds_max));
    v.push_back({"sweep", "max_points", [](const RunConfig& c) { return std::to_string(c.continuation.max_points); },
                 [](RunConfig& c, const std::string& s) { c.continuation.max_points = to_int(s); }});

    v.push_back({"step", "base", [](const RunConfig& c) { return std::string(to_string(c.step_base)); },
                 [](RunConfig& c, const std::string& s) {
                   const std::string t = lower(trim(s));
                   if (t == "value") c.step_base = StepBase::Value;
                   else if (t == "optimum") c.step_base = StepBase::Optimum;
                   else if (t == "extinction") c.step_base = StepBase::Extinction;
                   else throw ConfigError("'" + s + "' is not value/optimum/extinction");
                 }});
    v.push_back({"step", "steps", [](const RunConfig& c) { return from_list(c.steps); },
                 [](RunConfig& c, const std::string& s) { c.steps = to_list(s); }});
    v.push_back(number("step", "horizon", &RunConfig::horizon));

    v.push_back(number("heat_of_reaction", "T_min", &RunConfig::hr_T_min));
    v.push_back(number("heat_of_reaction", "T_max", &RunConfig::hr_T_max));
    v.push_back(number("heat_of_reaction", "T_step", &RunConfig::hr_T_step));
    v.push_back(number("heat_of_reaction", "P_min", &RunConfig::hr_P_min));
    v.push_back(number("heat_of_reaction", "P_max", &RunConfig::hr_P_max));
    v.push_back(number("heat_of_reaction", "P_step", &RunConfig::hr_P_step));

    v.push_back(number("solver", "tol", &RunConfig::tol));
    v.push_back({"solver", "max_iter", [](const RunConfig& c) { return std::to_string(c.max_iter); },
                 [](RunConfig& c, const std::string& s) { c.max_iter = to_int(s); }});
    v.push_back(number("solver", "rtol", &RunConfig::rtol));
    v.push_back(number("solver", "atol", &RunConfig::atol));

    v.push_back(FBRSIM_NESTED("dimensions", "afbr_L", model.dims.afbr_L));
    v.push_back(FBRSIM_NESTED("dimensions", "afbr_V", model.dims.afbr_V));
    v.push_back(FBRSIM_NESTED("dimensions", "afbr_epsilon", model.dims.afbr_epsilon));
    v.push_back(FBRSIM_NESTED("dimensions", "idcr_fbr_L", model.dims.idcr_fbr_L));
    v.push_back(FBRSIM_NESTED("dimensions", "idcr_fbr_V", model.dims.idcr_fbr_V));
    v.push_back(FBRSIM_NESTED("dimensions", "idcr_fbr_epsilon", model.dims.idcr_fbr_epsilon));
    v.push_back(FBRSIM_NESTED("dimensions", "idcr_lct_L", model.dims.idcr_lct_L));
    v.push_back(FBRSIM_NESTED("dimensions", "idcr_lct_V", model.dims.idcr_lct_V));

    v.push_back(FBRSIM_NESTED("parameters", "rho_solid", model.params.rho_solid));
    v.push_back(FBRSIM_NESTED("parameters", "cp_solid", model.params.cp_solid));
    v.push_back(FBRSIM_NESTED("parameters", "eta", model.params.eta));
    v.push_back(FBRSIM_NESTED("parameters", "beta", model.params.beta));
    v.push_back(FBRSIM_NESTED("parameters", "A_fwd", model.params.A_fwd));
    v.push_back(FBRSIM_NESTED("parameters", "A_bwd", model.params.A_bwd));
    v.push_back(FBRSIM_NESTED("parameters", "E_fwd", model.params.E_fwd));
    v.push_back(FBRSIM_NESTED("parameters", "E_bwd", model.params.E_bwd));
    v.push_back(FBRSIM_NESTED("parameters", "mu", model.params.mu));
    v.push_back(FBRSIM_NESTED("parameters", "d_p", model.params.d_p));
    v.push_back(FBRSIM_NESTED("parameters", "d_t", model.params.d_t));
    v.push_back(FBRSIM_NESTED("parameters", "f_DW", model.params.f_DW));
    v.push_back(FBRSIM_NESTED("parameters", "D", model.params.D));
    v.push_back(FBRSIM_NESTED("parameters", "kappa", model.params.kappa));
    v.push_back(FBRSIM_NESTED("parameters", "U_overall", model.params.U_overall));
    v.push_back(FBRSIM_NESTED("parameters", "A_interface", model.params.A_interface));
    return v;
  }();
  return f;
}

#undef FBRSIM_NESTED

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields()) {
    if (f.section == section && f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.cond = nominal_conditions(ammonia_components(), 760.0);
  return c;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError(key + ": " + why);
  };
  if (model.n_cells < 2) fail("model.n_cells", "must be at least 2");
  if (!(cond.T_in > 0.0)) fail("conditions.T_in", "must be positive");
  if (!(cond.P_in > 0.0)) fail("conditions.P_in", "must be positive");
  if (!(cond.P_out > 0.0)) fail("conditions.P_out", "must be positive");
  if (!(cond.P_out < cond.P_in)) fail("conditions.P_out", "must be below P_in");
  double sum = 0.0;
  for (std::size_t i = 0; i < cond.x_in.size(); ++i) {
    if (cond.x_in[i] < 0.0) fail(std::string("conditions.x_") + kSpecies[i], "must be non-negative");
    sum += cond.x_in[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) fail("conditions.x_*", "mole fractions must sum to 1");
  if (!(tol > 0.0)) fail("solver.tol", "must be positive");
  if (max_iter < 1) fail("solver.max_iter", "must be at least 1");
  if (!(rtol >= 0.0)) fail("solver.rtol", "must be non-negative");
  if (!(atol > 0.0)) fail("solver.atol", "must be positive");
  if (experiment == Experiment::Sweep || step_base != StepBase::Value) {
    if (sweep_start == sweep_end) fail("sweep.end", "sweep range is empty");
    if (grid_step < 0.0) fail("sweep.grid_step", "must be non-negative");
    try {
      ContinuationOptions o = continuation;
      o.p_min = std::min(sweep_start, sweep_end);
      o.p_max = std::max(sweep_start, sweep_end);
      o.validate();
    } catch (const ConfigError& e) {
      fail("sweep", e.what());
    }
  }
  if (experiment == Experiment::Step) {
    if (steps.empty()) fail("step.steps", "needs at least one step");
    if (!(horizon > 0.0)) fail("step.horizon", "must be positive");
  }
  if (experiment == Experiment::HeatOfReaction) {
    if (!(hr_T_step > 0.0) || !(hr_T_min <= hr_T_max) || !(hr_T_min > 0.0)) {
      fail("heat_of_reaction.T_*", "needs 0 < T_min <= T_max and T_step > 0");
    }
    if (!(hr_P_step > 0.0) || !(hr_P_min <= hr_P_max) || !(hr_P_min > 0.0)) {
      fail("heat_of_reaction.P_*", "needs 0 < P_min <= P_max and P_step > 0");
    }
  }
}

RunConfig parse_run_config(const pt::ptree& tree) {
  RunConfig c = default_run_config();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section + ": key outside of a section");
    }
    for (const auto& [key, value] : body) {
      const Field* f = find_field(section, key);
      if (!f) throw ConfigError(section + "." + key + ": unknown key");
      try {
        f->set(c, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
      }
    }
  }
  c.validate();
  return c;
}

namespace {

// The boost reader only knows whole-line comments; drop "; ..." and "# ..."
// tails as well.
std::string strip_inline_comments(std::istream& in) {
  std::string out, line;
  while (std::getline(in, line)) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == ';' || line[i] == '#') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.erase(i);
        break;
      }
    }
    out += trim(line) + "\n";
  }
  return out;
}

}  // namespace

RunConfig parse_run_config_string(const std::string& ini) {
  std::istringstream raw(ini);
  std::istringstream in(strip_inline_comments(raw));
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(tree);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config_string(ss.str());
}

pt::ptree to_ptree(const RunConfig& config) {
  pt::ptree tree;
  for (const auto& f : fields()) {
    tree.put(pt::ptree::path_type(f.section + "." + f.key, '.'), f.get(config));
  }
  return tree;
}

}  // namespace fbrsim::app
