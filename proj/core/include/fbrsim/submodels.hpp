#pragma once

// Constitutive closures: reaction kinetics, advection velocity, dispersive
// fluxes and interfacial heat transfer.

#include <cmath>
#include <span>
#include <vector>

#include "fbrsim/dual.hpp"
#include "fbrsim/errors.hpp"
#include "fbrsim/thermo.hpp"

namespace fbrsim {

// Single Temkin-Pyzhev reaction N2 + 3 H2 <-> 2 NH3.
struct KineticParams {
  std::vector<double> nu;  // stoichiometric row over the component set
  double A_fwd = 0.0;      // [mol/(s m3-solid)]
  double A_bwd = 0.0;
  double E_fwd = 0.0;      // [J/mol]
  double E_bwd = 0.0;
  double beta = 0.5;
  double eta = 1.0;
  double epsilon = 1.0;    // bed porosity; rates are scaled by (1-eps)/eps
  std::size_t i_N2 = 0;
  std::size_t i_H2 = 1;
  std::size_t i_NH3 = 2;

  void validate() const;
};

// Ammonia kinetics bound to the species order of `components`.
KineticParams ammonia_kinetics(const ComponentSet& components, double A_fwd, double A_bwd,
                               double E_fwd, double E_bwd, double beta, double eta,
                               double epsilon);

enum class AdvectionLaw { Ergun, DarcyWeisbach };

struct AdvectionParams {
  AdvectionLaw law = AdvectionLaw::Ergun;
  double mu = 0.0;       // [Pa s]
  double d_p = 0.0;      // particle diameter [m]
  double d_t = 0.0;      // tube diameter [m]
  double f_DW = 0.0;     // Darcy friction factor [-]
  double epsilon = 1.0;  // porosity (Ergun)

  void validate() const;
};

struct TransportParams {
  double D = 0.0;      // [m2/s]
  double kappa = 0.0;  // [W/(m K)]
};

struct HeatTransferParams {
  double U_overall = 0.0;    // [W/(m2 K)]
  double A_interface = 0.0;  // [m2]
  double a_self = 0.0;       // A / V [1/m]
  double a_other = 0.0;      // A / V' [1/m]
};

// Throws ConfigError unless both volumes are positive.
HeatTransferParams make_heat_transfer(double U_overall, double A_interface, double V_self,
                                      double V_other);

// Partial pressure floor inside the rate law [bar].
inline constexpr double kPartialPressureFloor = 1e-10;

// Rate [mol/(s m3-fluid)].
template <class S>
S temkin_rate(const KineticParams& k, const S& T, const S& P, std::span<const S> c) {
  using std::exp;
  using std::pow;
  S total = S(0.0);
  for (const auto& ci : c) total += ci;
  if (!(value_of(total) > 0.0)) throw ThermoError("rate law needs a positive total concentration");
  const S P_bar = P / (1e5 * total);
  const S pN2 = max_value(S(c[k.i_N2] * P_bar), kPartialPressureFloor);
  const S pH2 = max_value(S(c[k.i_H2] * P_bar), kPartialPressureFloor);
  const S pNH3 = max_value(S(c[k.i_NH3] * P_bar), kPartialPressureFloor);
  const S kf = k.A_fwd * exp(-k.E_fwd / (kGasConstant * T));
  const S kb = k.A_bwd * exp(-k.E_bwd / (kGasConstant * T));
  const S ratio = pH2 * pH2 * pH2 / (pNH3 * pNH3);
  const double phi = (1.0 - k.epsilon) / k.epsilon;
  const S r = phi * k.eta * (kf * pN2 * pow(ratio, k.beta) - kb * pow(1.0 / ratio, k.beta));
  if (!std::isfinite(value_of(r))) throw ThermoError("non-finite reaction rate");
  return r;
}

// R = nu^T r.
template <class S>
void production_rates(const KineticParams& k, const S& T, const S& P, std::span<const S> c,
                      std::span<S> R) {
  const S r = temkin_rate(k, T, P, c);
  for (std::size_t i = 0; i < R.size(); ++i) R[i] = k.nu[i] * r;
}

std::vector<double> production_rates(const KineticParams& k, const ThermoState& state);
double temkin_rate(const KineticParams& k, const ThermoState& state);

template <class S>
S fluid_density(std::span<const S> c, std::span<const double> M) {
  S rho = S(0.0);
  for (std::size_t i = 0; i < c.size(); ++i) rho += M[i] * c[i];
  return rho;
}

// Molar-average velocity from the pressure gradient [m/s].
template <class S>
S velocity_from_pressure_gradient(const AdvectionParams& p, const S& dPdz, const S& rho) {
  using std::abs;
  using std::sqrt;
  const S g = -dPdz;
  if (p.law == AdvectionLaw::Ergun) {
    const double e = p.epsilon;
    const double a = 150.0 * p.mu * (1.0 - e) * (1.0 - e) / (p.d_p * p.d_p * e * e);
    const S b = 1.75 * rho * (1.0 - e) / (p.d_p * e);
    // Rationalized root of a v + b v|v| = g, free of cancellation for small b|g|.
    return 2.0 * g / (a + sqrt(a * a + 4.0 * b * abs(g)));
  }
  if (!(value_of(rho) > 0.0)) throw ThermoError("Darcy-Weisbach velocity needs rho > 0");
  const S v = sqrt(2.0 * p.d_t * abs(g) / (p.f_DW * rho));
  return value_of(g) < 0.0 ? S(-v) : v;
}

// N_diff = -D dc/dz.
template <class S>
void diffusive_flux(double D, std::span<const S> dc_dz, std::span<S> out) {
  for (std::size_t i = 0; i < dc_dz.size(); ++i) out[i] = -D * dc_dz[i];
}
std::vector<double> diffusive_flux(std::span<const double> D, std::span<const double> dc_dz);

// E = eps (H(T,P,N_adv) - Hbar(T,P,c) . N_diff) - kappa dT/dz [W/m2].
template <class S>
S energy_flux_parts(const FluidModel& fluid, const S& T, const S& P, std::span<const S> c,
                    std::span<const S> N_adv, std::span<const S> N_diff, const S& dT_dz,
                    double kappa, double epsilon) {
  S E = fluid.enthalpy(T, P, N_adv);
  bool dispersive = false;
  for (const auto& n : N_diff) dispersive = dispersive || !is_zero(n);
  if (dispersive) {
    std::array<S, kMaxComponents> Hbar;
    fluid.partial_molar_enthalpy(T, P, c, std::span<S>(Hbar.data(), c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) E -= Hbar[i] * N_diff[i];
  }
  E *= epsilon;
  if (kappa != 0.0) E -= kappa * dT_dz;
  return E;
}

double energy_flux_parts(const FluidModel& fluid, const ThermoState& state,
                         std::span<const double> N_adv, std::span<const double> N_diff,
                         double dT_dz, double kappa, double epsilon);

// Q = a_self U (T_other - T_self) [W/m3].
template <class S>
S interfacial_heat(const HeatTransferParams& p, const S& T_other, const S& T_self) {
  return p.a_self * p.U_overall * (T_other - T_self);
}

}  // namespace fbrsim
