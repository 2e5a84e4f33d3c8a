#include "fbrsim/submodels.hpp"

namespace fbrsim {

void KineticParams::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("kinetics: beta must lie in (0, 1)");
  if (!(eta > 0.0)) throw ConfigError("kinetics: eta must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("kinetics: porosity must lie in (0, 1]");
  if (!(A_fwd >= 0.0 && A_bwd >= 0.0)) throw ConfigError("kinetics: negative prefactor");
  const std::size_t n = nu.size();
  if (i_N2 >= n || i_H2 >= n || i_NH3 >= n) throw ConfigError("kinetics: species index out of range");
}

KineticParams ammonia_kinetics(const ComponentSet& components, double A_fwd, double A_bwd,
                               double E_fwd, double E_bwd, double beta, double eta,
                               double epsilon) {
  KineticParams k;
  k.i_N2 = components.index_of("N2");
  k.i_H2 = components.index_of("H2");
  k.i_NH3 = components.index_of("NH3");
  k.nu.assign(components.size(), 0.0);
  k.nu[k.i_N2] = -1.0;
  k.nu[k.i_H2] = -3.0;
  k.nu[k.i_NH3] = 2.0;
  k.A_fwd = A_fwd;
  k.A_bwd = A_bwd;
  k.E_fwd = E_fwd;
  k.E_bwd = E_bwd;
  k.beta = beta;
  k.eta = eta;
  k.epsilon = epsilon;
  k.validate();
  return k;
}

void AdvectionParams::validate() const {
  if (law == AdvectionLaw::Ergun) {
    if (!(mu > 0.0 && d_p > 0.0)) throw ConfigError("Ergun: mu and d_p must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("Ergun: porosity must lie in (0, 1)");
  } else {
    if (!(d_t > 0.0 && f_DW > 0.0)) throw ConfigError("Darcy-Weisbach: d_t and f_DW must be positive");
  }
}

HeatTransferParams make_heat_transfer(double U_overall, double A_interface, double V_self,
                                      double V_other) {
  if (!(V_self > 0.0 && V_other > 0.0)) throw ConfigError("heat transfer: volumes must be positive");
  if (!(U_overall >= 0.0 && A_interface >= 0.0)) throw ConfigError("heat transfer: negative U or A");
  return {U_overall, A_interface, A_interface / V_self, A_interface / V_other};
}

double temkin_rate(const KineticParams& k, const ThermoState& s) {
  return temkin_rate<double>(k, s.T, s.P, s.c);
}

std::vector<double> production_rates(const KineticParams& k, const ThermoState& s) {
  std::vector<double> R(s.c.size());
  production_rates<double>(k, s.T, s.P, s.c, R);
  return R;
}

std::vector<double> diffusive_flux(std::span<const double> D, std::span<const double> dc_dz) {
  std::vector<double> out(dc_dz.size());
  for (std::size_t i = 0; i < dc_dz.size(); ++i) out[i] = -D[i] * dc_dz[i];
  return out;
}

double energy_flux_parts(const FluidModel& fluid, const ThermoState& s,
                         std::span<const double> N_adv, std::span<const double> N_diff,
                         double dT_dz, double kappa, double epsilon) {
  return energy_flux_parts<double>(fluid, s.T, s.P, s.c, N_adv, N_diff, dT_dz, kappa, epsilon);
}

}  // namespace fbrsim
