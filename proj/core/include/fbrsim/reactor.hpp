#pragma once

// Reactor units assembled from volumes, plus the ammonia case-study
// configurations (adiabatic fixed bed and counter-current direct-cooled
// reactor).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbrsim/submodels.hpp"
#include "fbrsim/thermo.hpp"

namespace fbrsim {

struct VolumeGeometry {
  double L = 0.0;        // [m]
  double V = 0.0;        // [m3]
  double epsilon = 1.0;  // fluid fraction, 1 for homogeneous volumes
  double S = 0.0;        // V / L [m2]
  double S_fluid = 0.0;  // eps S
  double phi = 0.0;      // (1 - eps) / eps
  double a = 0.0;        // A / V [1/m], 0 if uncoupled

  static VolumeGeometry make(double L, double V, double epsilon, double A_interface = 0.0);
  // Throws ConfigError when the derived fields are inconsistent.
  void validate() const;
};

enum class BoundaryKind { FlowDriven, PressureDriven, Coupled };

struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::PressureDriven;
  int upstream = -1;  // Coupled: index of the upstream volume
  double psi = 1.0;   // Coupled: S'_fluid / S_fluid
};

// Time-varying boundary inputs, sampled by the caller.
struct OperatingConditions {
  std::vector<double> x_in;  // feed mole fractions
  double T_in = 0.0;         // [K]
  double P_in = 0.0;         // [Pa]
  double P_out = 0.0;        // [Pa]
  // Flow-driven inlets only.
  std::vector<double> f_in;  // [mol/s]
  double h_in = 0.0;         // [W]

  void validate(std::size_t n_components) const;
};

struct VolumeSpec {
  std::string name;
  VolumeGeometry geometry;
  AdvectionParams advection;
  TransportParams transport;
  std::optional<KineticParams> kinetics;
  SolidProperties solid;
  BoundarySpec inlet;
  int heat_partner = -1;  // volume exchanging heat with this one
  HeatTransferParams heat;
};

enum class UnitKind { FBR, DCR };

struct UnitSpec {
  UnitKind kind = UnitKind::FBR;
  FluidModel fluid;
  std::vector<VolumeSpec> volumes;
  int feed_volume = 0;    // receives the fresh feed
  int outlet_volume = 0;  // discharges the product
  int top_volume = 0;     // reports the "top" temperature at its outlet cell

  void validate() const;
};

// Zeroes D and kappa in every volume.
UnitSpec without_dispersion(UnitSpec unit);

// Heat-transfer pairing between cell k of a volume and its counter-current
// partner. Applying it twice returns k.
inline int counter_current_index(int k, int n_cells) { return n_cells - 1 - k; }

// Case-study tables.
struct ReactorDimensions {
  double afbr_L = 2.0, afbr_V = 2.0, afbr_epsilon = 0.33;
  double idcr_fbr_L = 6.0, idcr_fbr_V = 3.0, idcr_fbr_epsilon = 0.18;
  double idcr_lct_L = 6.0, idcr_lct_V = 0.5;
};

struct ReactorParameters {
  double rho_solid = 3284.0;
  double cp_solid = 1100.0;
  double eta = 4.75;
  double beta = 0.5;
  double A_fwd = 4972.0;
  double A_bwd = 7.14e15;
  double E_fwd = 87090.0;
  double E_bwd = 198464.0;
  double mu = 3.08e-5;
  double d_p = 8e-3;
  double d_t = 13.3e-3;
  double f_DW = 2e-2;
  double D = 1e-5;
  double kappa = 50.0;  // solid conductivity; beds use (1 - eps) kappa
  double U_overall = 300.0;
  double A_interface = 150.0;
  EnthalpyReference enthalpy_reference = EnthalpyReference::Sensible;
};

// Feed 21.5/64.5/10/4 % N2/H2/NH3/Ar, 200 -> 199 bar.
OperatingConditions nominal_conditions(const ComponentSet& components, double T_in);

// Species of the case study in database order: N2, H2, NH3, Ar.
ComponentSet ammonia_components();

UnitSpec build_afbr(const ReactorDimensions& dims, const ReactorParameters& params, EosKind eos,
                    const ComponentSet& components = ammonia_components());
// Volumes are ordered [LCT, FBR]; the fresh feed enters the LCT.
UnitSpec build_idcr(const ReactorDimensions& dims, const ReactorParameters& params, EosKind eos,
                    const ComponentSet& components = ammonia_components());

// Pressure-driven or flow-driven inlet fluxes of volume `vol` given the state
// of its first cell. N_in per fluid area, E_in per total area.
template <class S>
void inlet_fluxes(const UnitSpec& unit, int vol, const OperatingConditions& cond,
                  const S& P_first, double h, std::span<S> N_in, S& E_in) {
  const auto& vs = unit.volumes[vol];
  const std::size_t nc = unit.fluid.size();
  if (vs.inlet.kind == BoundaryKind::FlowDriven) {
    for (std::size_t i = 0; i < nc; ++i) N_in[i] = S(cond.f_in[i] / vs.geometry.S_fluid);
    E_in = S(cond.h_in / vs.geometry.S);
    return;
  }
  if (vs.inlet.kind != BoundaryKind::PressureDriven) {
    throw ConfigError("inlet_fluxes: coupled inlets are resolved by the discretization");
  }
  const std::span<const double> x(cond.x_in);
  const double Vx = unit.fluid.volume(cond.T_in, cond.P_in, x);
  std::array<double, kMaxComponents> c_in{};
  for (std::size_t i = 0; i < nc; ++i) c_in[i] = x[i] / Vx;
  const double rho = fluid_density<double>(std::span<const double>(c_in.data(), nc),
                                           unit.fluid.molecular_weights());
  const S dPdz = (P_first - cond.P_in) / (0.5 * h);
  const S v = velocity_from_pressure_gradient(vs.advection, dPdz, S(rho));
  for (std::size_t i = 0; i < nc; ++i) N_in[i] = v * c_in[i];
  E_in = vs.geometry.epsilon *
         unit.fluid.enthalpy(S(cond.T_in), S(cond.P_in), std::span<const S>(N_in.data(), nc));
}

// Free outflow from the last cell: advection only, velocity from the half-cell
// gradient towards P_out.
template <class S>
void outlet_fluxes(const FluidModel& fluid, const AdvectionParams& adv, double epsilon,
                   const S& T, const S& P, std::span<const S> c, const S& P_out, double h,
                   std::span<S> N_out, S& E_out) {
  const S rho = fluid_density(c, fluid.molecular_weights());
  const S dPdz = (P_out - P) / (0.5 * h);
  const S v = velocity_from_pressure_gradient(adv, dPdz, rho);
  for (std::size_t i = 0; i < c.size(); ++i) N_out[i] = v * c[i];
  E_out = epsilon * fluid.enthalpy(T, P, std::span<const S>(N_out.data(), c.size()));
}

// X = 1 - (outlet H2 molar flow) / (inlet H2 molar flow).
double h2_conversion(double N_in_H2, double S_fluid_in, double N_out_H2, double S_fluid_out);

// Flow-driven conditions that reproduce the given inlet fluxes of `vol`.
OperatingConditions to_flow_driven(const UnitSpec& unit, int vol, const OperatingConditions& cond,
                                   std::span<const double> N_in, double E_in);

}  // namespace fbrsim
