#include "fbrsim/thermo.hpp"

#include <algorithm>
#include <cctype>
#include <numbers>

namespace fbrsim {

std::string_view to_string(EosKind kind) {
  switch (kind) {
    case EosKind::IdealGas: return "ideal";
    case EosKind::SRK: return "srk";
    case EosKind::PengRobinson: return "pr";
  }
  return "?";
}

EosKind parse_eos(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "ideal" || s == "idealgas" || s == "ideal_gas") return EosKind::IdealGas;
  if (s == "srk") return EosKind::SRK;
  if (s == "pr" || s == "peng-robinson" || s == "pengrobinson") return EosKind::PengRobinson;
  throw ConfigError("unknown equation of state '" + std::string(name) + "' (ideal|srk|pr)");
}

std::string_view to_string(EnthalpyReference ref) {
  return ref == EnthalpyReference::Formation ? "formation" : "sensible";
}

EnthalpyReference parse_enthalpy_reference(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "sensible") return EnthalpyReference::Sensible;
  if (s == "formation") return EnthalpyReference::Formation;
  throw ConfigError("unknown enthalpy reference '" + std::string(name) + "' (sensible|formation)");
}

namespace detail {

double largest_real_root(double c2, double c1, double c0) {
  const double shift = c2 / 3.0;
  const double p = c1 - c2 * c2 / 3.0;
  const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  double t;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    t = std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq);
  } else if (p == 0.0) {
    t = 0.0;
  } else {
    const double r = std::sqrt(-p / 3.0);
    const double arg = std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0);
    t = 2.0 * r * std::cos(std::acos(arg) / 3.0);
  }
  double z = t - shift;
  // Closed forms lose digits when roots nearly coincide; polish.
  for (int it = 0; it < 4; ++it) {
    const double f = ((z + c2) * z + c1) * z + c0;
    const double df = (3.0 * z + 2.0 * c2) * z + c1;
    if (df == 0.0) break;
    const double step = f / df;
    z -= step;
    if (std::abs(step) <= 1e-16 * std::abs(z)) break;
  }
  return z;
}

}  // namespace detail

FluidModel::FluidModel(ComponentSet components, EosKind kind, EnthalpyReference reference)
    : components_(std::move(components)), kind_(kind), reference_(reference) {
  if (components_.size() == 0 || components_.size() > kMaxComponents) {
    throw ConfigError("fluid model supports 1.." + std::to_string(kMaxComponents) + " components");
  }
  const double R = kGasConstant;
  double omega_a = 0.0;
  double omega_b = 0.0;
  switch (kind_) {
    case EosKind::IdealGas:
      break;
    case EosKind::SRK:
      omega_a = 0.42748;
      omega_b = 0.08664;
      delta1_ = 1.0;
      delta2_ = 0.0;
      break;
    case EosKind::PengRobinson:
      omega_a = 0.45724;
      omega_b = 0.07780;
      delta1_ = 1.0 + std::numbers::sqrt2;
      delta2_ = 1.0 - std::numbers::sqrt2;
      break;
  }
  for (const auto& c : components_.data()) {
    M_.push_back(c.M);
    Tc_.push_back(c.Tc);
    sqrt_a_.push_back(std::sqrt(omega_a * R * R * c.Tc * c.Tc / c.Pc));
    b_.push_back(omega_b * R * c.Tc / c.Pc);
    const double w = c.omega;
    m_.push_back(kind_ == EosKind::PengRobinson ? 0.37464 + 1.54226 * w - 0.26992 * w * w
                                                : 0.480 + 1.574 * w - 0.176 * w * w);
  }
}

double fluid_internal_energy_density(const FluidModel& fluid, const ThermoState& s) {
  return fluid.internal_energy_density<double>(s.T, s.P, s.c);
}

double volume_internal_energy_density(const FluidModel& fluid, const ThermoState& s,
                                      double epsilon, const SolidProperties& solid) {
  return volume_internal_energy_density<double>(fluid, s.T, s.P, s.c, epsilon, solid);
}

std::vector<double> partial_molar_enthalpy(const FluidModel& fluid, const ThermoState& s) {
  std::vector<double> out(s.c.size());
  fluid.partial_molar_enthalpy<double>(s.T, s.P, s.c, out);
  return out;
}

double molar_volume(const FluidModel& fluid, double T, double P, std::span<const double> n) {
  return fluid.volume(T, P, n);
}

double enthalpy(const FluidModel& fluid, double T, double P, std::span<const double> n) {
  return fluid.enthalpy(T, P, n);
}

ThermoDerivatives thermo_derivatives(const FluidModel& fluid, const ThermoState& s, double epsilon,
                                     const SolidProperties& solid) {
  using D = Dual<double, 1>;
  const std::size_t nc = s.c.size();
  ThermoDerivatives out;
  out.dV_dc.resize(nc);
  out.du_dc.resize(nc);

  // direction 0: T, 1: P, 2..: c_i
  for (std::size_t dir = 0; dir < nc + 2; ++dir) {
    D T(s.T);
    D P(s.P);
    std::array<D, kMaxComponents> c;
    for (std::size_t i = 0; i < nc; ++i) c[i] = D(s.c[i]);
    if (dir == 0) T.d[0] = 1.0;
    else if (dir == 1) P.d[0] = 1.0;
    else c[dir - 2].d[0] = 1.0;
    const std::span<const D> cs(c.data(), nc);
    const D V = fluid.volume(T, P, cs);
    const D u = volume_internal_energy_density(fluid, T, P, cs, epsilon, solid);
    out.V = V.v;
    out.u = u.v;
    if (dir == 0) {
      out.dV_dT = V.d[0];
      out.du_dT = u.d[0];
    } else if (dir == 1) {
      out.dV_dP = V.d[0];
      out.du_dP = u.d[0];
    } else {
      out.dV_dc[dir - 2] = V.d[0];
      out.du_dc[dir - 2] = u.d[0];
    }
  }
  out.determinant = out.dV_dT * out.du_dP - out.dV_dP * out.du_dT;
  const double scale = std::abs(out.dV_dT * out.du_dP) + std::abs(out.dV_dP * out.du_dT);
  if (!(std::abs(out.determinant) > 1e-12 * scale)) {
    throw ThermoError("singular (T, P) block of the thermodynamic constraints");
  }
  return out;
}

double heat_of_reaction(const FluidModel& fluid, double T, double P, std::span<const double> x,
                        std::span<const double> nu) {
  if (x.size() != fluid.size() || nu.size() != fluid.size()) {
    throw ConfigError("heat_of_reaction: vector sizes must match the component count");
  }
  std::vector<double> Hbar(x.size());
  fluid.partial_molar_enthalpy<double>(T, P, x, Hbar);
  double dH = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dH += nu[i] * Hbar[i];
  return dH;
}

}  // namespace fbrsim
