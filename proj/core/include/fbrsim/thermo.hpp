#pragma once

// Fluid and solid thermodynamic property functions.
//
// Fluid properties are evaluated as extensive functions V(T, P, n) and
// H(T, P, n). Both are degree-one homogeneous in n, so passing a concentration
// vector returns volume and enthalpy per unit fluid volume, and passing a molar
// flux returns the corresponding enthalpy flux. Every function is templated on
// the scalar type so the same code yields values and exact derivatives through
// Dual numbers.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbrsim/components.hpp"
#include "fbrsim/dual.hpp"
#include "fbrsim/errors.hpp"

namespace fbrsim {

enum class EosKind { IdealGas, SRK, PengRobinson };

std::string_view to_string(EosKind kind);
// Accepts "ideal", "srk", "pr" (case-insensitive). Throws ConfigError.
EosKind parse_eos(std::string_view name);

// Zero point of the ideal-gas enthalpy. Sensible: every species has H = 0 at
// 298.15 K, so nu . Hbar carries only the sensible and residual parts of the
// reaction heat. Formation: anchored at the formation enthalpies.
enum class EnthalpyReference { Sensible, Formation };

std::string_view to_string(EnthalpyReference ref);
// Accepts "sensible", "formation". Throws ConfigError.
EnthalpyReference parse_enthalpy_reference(std::string_view name);

inline constexpr std::size_t kMaxComponents = 8;

struct ThermoState {
  double T = 0.0;          // [K]
  double P = 0.0;          // [Pa]
  std::vector<double> c;   // [mol/m3-fluid]
};

struct SolidProperties {
  double rho = 0.0;  // [kg/m3]
  double cp = 0.0;   // [J/(kg K)]

  // u_solid(T) = rho cp T, reference u_solid(0) = 0.
  template <class S>
  S internal_energy_density(const S& T) const {
    return rho * cp * T;
  }
};

namespace detail {

// Largest real root of z^3 + c2 z^2 + c1 z + c0.
double largest_real_root(double c2, double c1, double c0);

}  // namespace detail

class FluidModel {
 public:
  FluidModel() = default;
  FluidModel(ComponentSet components, EosKind kind,
             EnthalpyReference reference = EnthalpyReference::Sensible);

  EosKind kind() const { return kind_; }
  EnthalpyReference enthalpy_reference() const { return reference_; }
  std::size_t size() const { return components_.size(); }
  const ComponentSet& components() const { return components_; }
  const std::vector<double>& molecular_weights() const { return M_; }

  template <class S>
  struct Props {
    S V;  // volume [m3]
    S H;  // enthalpy [J]
    S Z;  // compressibility [-]
  };

  // Volume and enthalpy of the mole vector n at (T, P). For cubic models the
  // gas (largest) compressibility root is used.
  template <class S>
  Props<S> properties(const S& T, const S& P, std::span<const S> n) const;

  template <class S>
  S volume(const S& T, const S& P, std::span<const S> n) const {
    return properties(T, P, n).V;
  }
  template <class S>
  S enthalpy(const S& T, const S& P, std::span<const S> n) const {
    return properties(T, P, n).H;
  }

  // Ideal-gas molar enthalpy of species i, zero point per enthalpy_reference().
  template <class S>
  S ideal_molar_enthalpy(std::size_t i, const S& T) const;

  // u_fluid = H(T,P,c) - P V(T,P,c) [J/m3-fluid].
  template <class S>
  S internal_energy_density(const S& T, const S& P, std::span<const S> c) const {
    const auto p = properties(T, P, c);
    return p.H - P * p.V;
  }

  // Partial molar enthalpies dH/dc_i at fixed (T, P) [J/mol].
  template <class S>
  void partial_molar_enthalpy(const S& T, const S& P, std::span<const S> c, std::span<S> out) const;

  double compressibility(double T, double P, std::span<const double> n) const {
    return properties(T, P, n).Z;
  }

 private:
  template <class S>
  Props<S> positive_properties(const S& T, const S& P, std::span<const S> n, const S& N) const;

  ComponentSet components_;
  EosKind kind_ = EosKind::IdealGas;
  EnthalpyReference reference_ = EnthalpyReference::Sensible;
  std::vector<double> M_;
  // Cubic parameters: a_i alpha_i(T) = (sqrt_a_i (1 + m_i (1 - sqrt(T/Tc_i))))^2.
  std::vector<double> sqrt_a_;
  std::vector<double> b_;
  std::vector<double> m_;
  std::vector<double> Tc_;
  double delta1_ = 0.0;
  double delta2_ = 0.0;
};

// Volume-averaged internal energy density u = eps u_fluid + (1 - eps) u_solid.
// eps = 1 denotes a homogeneous fluid volume.
template <class S>
S volume_internal_energy_density(const FluidModel& fluid, const S& T, const S& P,
                                 std::span<const S> c, double epsilon,
                                 const SolidProperties& solid) {
  S u = epsilon * fluid.internal_energy_density(T, P, c);
  if (epsilon < 1.0) u += (1.0 - epsilon) * solid.internal_energy_density(T);
  return u;
}

double fluid_internal_energy_density(const FluidModel& fluid, const ThermoState& state);
double volume_internal_energy_density(const FluidModel& fluid, const ThermoState& state,
                                      double epsilon, const SolidProperties& solid);
std::vector<double> partial_molar_enthalpy(const FluidModel& fluid, const ThermoState& state);
double molar_volume(const FluidModel& fluid, double T, double P, std::span<const double> n);
double enthalpy(const FluidModel& fluid, double T, double P, std::span<const double> n);

// Partials of the constraint functions V(T,P,c) and u(T,P,c).
struct ThermoDerivatives {
  double V = 0.0;
  double u = 0.0;
  double dV_dT = 0.0;
  double dV_dP = 0.0;
  std::vector<double> dV_dc;
  double du_dT = 0.0;
  double du_dP = 0.0;
  std::vector<double> du_dc;
  // det [dV/dT dV/dP; du/dT du/dP]; zero signals an index failure.
  double determinant = 0.0;
};

// Throws ThermoError when the (T, P) block is singular.
ThermoDerivatives thermo_derivatives(const FluidModel& fluid, const ThermoState& state,
                                     double epsilon = 1.0, const SolidProperties& solid = {});

// Heat of reaction nu . Hbar at (T, P) and mole fractions x [J/mol].
double heat_of_reaction(const FluidModel& fluid, double T, double P, std::span<const double> x,
                        std::span<const double> nu);

// ---------------------------------------------------------------------------

template <class S>
S FluidModel::ideal_molar_enthalpy(std::size_t i, const S& T) const {
  const auto& cd = components_[i];
  // R * sum_k a_k/(k+1) (T^{k+1} - T0^{k+1}), Horner in T.
  S poly = S(cd.cp_poly[4] / 5.0);
  for (int k = 3; k >= 0; --k) poly = poly * T + cd.cp_poly[k] / (k + 1);
  poly = poly * T;
  const double T0 = kReferenceTemperature;
  double ref = cd.cp_poly[4] / 5.0;
  for (int k = 3; k >= 0; --k) ref = ref * T0 + cd.cp_poly[k] / (k + 1);
  ref *= T0;
  const double h0 = reference_ == EnthalpyReference::Formation ? cd.dHf298 : 0.0;
  return h0 + kGasConstant * (poly - ref);
}

template <class S>
FluidModel::Props<S> FluidModel::properties(const S& T, const S& P, std::span<const S> n) const {
  if (!(value_of(T) > 0.0) || !(value_of(P) > 0.0)) {
    throw ThermoError("fluid properties need T > 0 and P > 0 (T=" +
                      std::to_string(value_of(T)) + ", P=" + std::to_string(value_of(P)) + ")");
  }
  S N = S(0.0);
  for (const auto& x : n) N += x;
  if (value_of(N) == 0.0) {
    // Degree-one homogeneity: everything vanishes with the amount. The
    // compressibility is reported for the ideal limit.
    return {S(0.0), S(0.0), S(1.0)};
  }
  if (value_of(N) > 0.0) return positive_properties(T, P, n, N);
  // V and H are odd in n, so negative fluxes map onto positive amounts.
  std::array<S, kMaxComponents> neg;
  for (std::size_t i = 0; i < n.size(); ++i) neg[i] = -n[i];
  auto p = positive_properties(T, P, std::span<const S>(neg.data(), n.size()), S(-N));
  return {-p.V, -p.H, p.Z};
}

template <class S>
FluidModel::Props<S> FluidModel::positive_properties(const S& T, const S& P,
                                                     std::span<const S> n, const S& N) const {
  using std::log;
  using std::sqrt;
  const double R = kGasConstant;
  S H_ideal = S(0.0);
  for (std::size_t i = 0; i < n.size(); ++i) H_ideal += n[i] * ideal_molar_enthalpy(i, T);
  const S NRT = N * R * T;
  if (kind_ == EosKind::IdealGas) return {NRT / P, H_ideal, S(1.0)};

  // One-fluid mixing with zero binary interaction: A = (sum n_i s_i)^2.
  const S sqrtT = sqrt(T);
  S sum_s = S(0.0);
  S sum_ds = S(0.0);
  S B = S(0.0);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double sqrtTc = std::sqrt(Tc_[i]);
    const S s = sqrt_a_[i] * (1.0 + m_[i] * (1.0 - sqrtT / sqrtTc));
    const S ds = (-0.5 * sqrt_a_[i] * m_[i] / sqrtTc) / sqrtT;
    sum_s += n[i] * s;
    sum_ds += n[i] * ds;
    B += n[i] * b_[i];
  }
  const S A = sum_s * sum_s;
  const S A_T = 2.0 * sum_s * sum_ds;

  const S As = A * P / (NRT * NRT);
  const S Bs = B * P / NRT;
  const double u = delta1_ + delta2_;
  const double w = delta1_ * delta2_;
  const S c2 = -(1.0 + Bs - u * Bs);
  const S c1 = As + w * Bs * Bs - u * Bs - u * Bs * Bs;
  const S c0 = -(As * Bs + w * Bs * Bs + w * Bs * Bs * Bs);

  const double z0 = detail::largest_real_root(value_of(c2), value_of(c1), value_of(c0));
  if (!(z0 > value_of(Bs))) {
    throw ThermoError("no gas root with Z > B (T=" + std::to_string(value_of(T)) +
                      ", P=" + std::to_string(value_of(P)) + ")");
  }
  // Two Newton steps in the scalar type propagate exact first and second
  // derivatives of the root through the implicit function theorem.
  S Z = S(z0);
  for (int it = 0; it < 2; ++it) {
    const S f = ((Z + c2) * Z + c1) * Z + c0;
    const S df = (3.0 * Z + 2.0 * c2) * Z + c1;
    Z = Z - f / df;
  }

  const S V = Z * NRT / P;
  const S H_res = NRT * (Z - 1.0) + (A - T * A_T) / ((delta1_ - delta2_) * B) *
                                        log((Z + delta2_ * Bs) / (Z + delta1_ * Bs));
  return {V, H_ideal + H_res, Z};
}

template <class S>
void FluidModel::partial_molar_enthalpy(const S& T, const S& P, std::span<const S> c,
                                        std::span<S> out) const {
  const std::size_t nc = c.size();
  if (kind_ == EosKind::IdealGas) {
    for (std::size_t i = 0; i < nc; ++i) out[i] = ideal_molar_enthalpy(i, T);
    return;
  }
  using G = Dual<S, 1>;
  const G TG(T);
  const G PG(P);
  std::array<G, kMaxComponents> cg;
  for (std::size_t j = 0; j < nc; ++j) cg[j] = G(c[j]);
  for (std::size_t i = 0; i < nc; ++i) {
    cg[i].d[0] = S(1.0);
    const G H = enthalpy<G>(TG, PG, std::span<const G>(cg.data(), nc));
    out[i] = H.d[0];
    cg[i].d[0] = S(0.0);
  }
}

}  // namespace fbrsim
