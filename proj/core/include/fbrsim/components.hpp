#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fbrsim {

// Gas constant [J/(mol K)].
inline constexpr double kGasConstant = 8.314;
// Reference temperature of the formation enthalpies [K].
inline constexpr double kReferenceTemperature = 298.15;

struct ComponentData {
  std::string name;
  double M = 0.0;      // molecular weight [kg/mol]
  double Tc = 0.0;     // critical temperature [K]
  double Pc = 0.0;     // critical pressure [Pa]
  double omega = 0.0;  // acentric factor [-]
  // Ideal-gas heat capacity polynomial, cp/R = sum_k cp_poly[k] T^k.
  std::array<double, 5> cp_poly{};
  double dHf298 = 0.0;  // formation enthalpy at 298.15 K [J/mol]

  // Ideal-gas molar heat capacity [J/(mol K)].
  double cp(double T) const;
  // Integral of cp from the reference temperature to T [J/mol].
  double sensible_enthalpy(double T) const;
};

// Ordered set of species; the order defines the concentration vector layout.
class ComponentSet {
 public:
  ComponentSet() = default;
  explicit ComponentSet(std::vector<ComponentData> components);

  std::size_t size() const { return components_.size(); }
  const ComponentData& operator[](std::size_t i) const { return components_[i]; }
  const std::vector<ComponentData>& data() const { return components_; }

  // Throws ConfigError if the species is absent.
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;

  // Subset in the given order.
  ComponentSet select(const std::vector<std::string>& names) const;

  std::vector<double> molecular_weights() const;

 private:
  std::vector<ComponentData> components_;
};

// Parses the plain-text component database (format documented in
// core/data/components.dat). Throws ConfigError with the line number on
// malformed records or invariant violations.
ComponentSet parse_component_database(std::istream& in);
ComponentSet load_component_database(const std::filesystem::path& path);

// Database compiled into the library (N2, H2, NH3, Ar).
const ComponentSet& builtin_components();

}  // namespace fbrsim
