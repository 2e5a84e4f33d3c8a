#include "fbrsim/components.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fbrsim/errors.hpp"

namespace fbrsim {

namespace {

constexpr const char* kBuiltinDatabase =
#include "component_db.inc"
    ;

void validate(const ComponentData& c, const std::string& where) {
  if (!(c.M > 0.0) || !(c.Tc > 0.0) || !(c.Pc > 0.0)) {
    throw ConfigError(where + ": component '" + c.name + "' needs M, Tc, Pc > 0");
  }
  for (double T = 200.0; T <= 1200.0; T += 10.0) {
    if (!(c.cp(T) > 0.0)) {
      throw ConfigError(where + ": component '" + c.name + "' has non-positive cp at T=" +
                        std::to_string(T));
    }
  }
}

}  // namespace

double ComponentData::cp(double T) const {
  double s = 0.0;
  for (int k = 4; k >= 0; --k) s = s * T + cp_poly[k];
  return kGasConstant * s;
}

double ComponentData::sensible_enthalpy(double T) const {
  const double T0 = kReferenceTemperature;
  double s = 0.0;
  for (int k = 0; k < 5; ++k) {
    s += cp_poly[k] / (k + 1) * (std::pow(T, k + 1) - std::pow(T0, k + 1));
  }
  return kGasConstant * s;
}

ComponentSet::ComponentSet(std::vector<ComponentData> components)
    : components_(std::move(components)) {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (components_[i].name == components_[j].name) {
        throw ConfigError("duplicate component '" + components_[i].name + "'");
      }
    }
  }
}

std::size_t ComponentSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].name == name) return i;
  }
  throw ConfigError("unknown component '" + std::string(name) + "'");
}

bool ComponentSet::contains(std::string_view name) const {
  for (const auto& c : components_) {
    if (c.name == name) return true;
  }
  return false;
}

ComponentSet ComponentSet::select(const std::vector<std::string>& names) const {
  std::vector<ComponentData> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(components_[index_of(n)]);
  return ComponentSet(std::move(out));
}

std::vector<double> ComponentSet::molecular_weights() const {
  std::vector<double> M;
  M.reserve(components_.size());
  for (const auto& c : components_) M.push_back(c.M);
  return M;
}

ComponentSet parse_component_database(std::istream& in) {
  std::vector<ComponentData> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    ComponentData c;
    if (!(ss >> c.name)) continue;
    const std::string where = "component database line " + std::to_string(lineno);
    if (!(ss >> c.M >> c.Tc >> c.Pc >> c.omega)) {
      throw ConfigError(where + ": expected M Tc Pc omega after the name");
    }
    for (auto& a : c.cp_poly) {
      if (!(ss >> a)) throw ConfigError(where + ": expected five cp coefficients");
    }
    if (!(ss >> c.dHf298)) throw ConfigError(where + ": missing dHf298");
    std::string extra;
    if (ss >> extra) throw ConfigError(where + ": trailing field '" + extra + "'");
    validate(c, where);
    out.push_back(std::move(c));
  }
  if (out.empty()) throw ConfigError("component database is empty");
  return ComponentSet(std::move(out));
}

ComponentSet load_component_database(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open component database " + path.string());
  return parse_component_database(in);
}

const ComponentSet& builtin_components() {
  static const ComponentSet db = [] {
    std::istringstream in(kBuiltinDatabase);
    return parse_component_database(in);
  }();
  return db;
}

}  // namespace fbrsim
