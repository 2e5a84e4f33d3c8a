#include "fbrsim/reactor.hpp"

#include <cmath>
#include <algorithm>

namespace fbrsim {

namespace {

bool close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

VolumeGeometry VolumeGeometry::make(double L, double V, double epsilon, double A_interface) {
  if (!(L > 0.0 && V > 0.0)) throw ConfigError("volume length and size must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("fluid fraction must lie in (0, 1]");
  if (!(A_interface >= 0.0)) throw ConfigError("interface area must be non-negative");
  VolumeGeometry g;
  g.L = L;
  g.V = V;
  g.epsilon = epsilon;
  g.S = V / L;
  g.S_fluid = epsilon * g.S;
  g.phi = (1.0 - epsilon) / epsilon;
  g.a = A_interface / V;
  return g;
}

void VolumeGeometry::validate() const {
  if (!(L > 0.0 && V > 0.0 && epsilon > 0.0 && epsilon <= 1.0)) {
    throw ConfigError("volume geometry out of range");
  }
  if (!close(S, V / L) || !close(S_fluid, epsilon * S) || !close(phi, (1.0 - epsilon) / epsilon)) {
    throw ConfigError("volume geometry identities violated");
  }
}

void OperatingConditions::validate(std::size_t n_components) const {
  if (!x_in.empty()) {
    if (x_in.size() != n_components) throw ConfigError("x_in has the wrong number of entries");
    double sum = 0.0;
    for (double x : x_in) {
      if (x < 0.0) throw ConfigError("x_in entries must be non-negative");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("x_in must sum to 1");
  }
  if (!(T_in > 0.0)) throw ConfigError("T_in must be positive");
  if (!(P_in > 0.0 && P_out > 0.0)) throw ConfigError("P_in and P_out must be positive");
  if (!f_in.empty() && f_in.size() != n_components) {
    throw ConfigError("f_in has the wrong number of entries");
  }
}

void UnitSpec::validate() const {
  const int nv = static_cast<int>(volumes.size());
  if (nv == 0) throw ConfigError("unit has no volumes");
  if (kind == UnitKind::FBR && nv != 1) throw ConfigError("FBR units have exactly one volume");
  if (kind == UnitKind::DCR && nv != 2) throw ConfigError("DCR units have exactly two volumes");
  for (int idx : {feed_volume, outlet_volume, top_volume}) {
    if (idx < 0 || idx >= nv) throw ConfigError("unit volume index out of range");
  }
  for (int v = 0; v < nv; ++v) {
    const auto& vs = volumes[v];
    vs.geometry.validate();
    vs.advection.validate();
    if (vs.kinetics) vs.kinetics->validate();
    if (vs.transport.D < 0.0 || vs.transport.kappa < 0.0) {
      throw ConfigError("volume '" + vs.name + "': negative D or kappa");
    }
    if (vs.geometry.epsilon < 1.0 && !(vs.solid.rho > 0.0 && vs.solid.cp > 0.0)) {
      throw ConfigError("volume '" + vs.name + "': solid properties must be positive");
    }
    if (vs.inlet.kind == BoundaryKind::Coupled) {
      const int up = vs.inlet.upstream;
      if (up < 0 || up >= nv || up == v) throw ConfigError("coupled inlet references an invalid volume");
      const double psi = volumes[up].geometry.S_fluid / vs.geometry.S_fluid;
      if (!close(vs.inlet.psi, psi)) throw ConfigError("coupled inlet psi does not match the geometry");
    }
    if (vs.heat_partner >= 0) {
      const int o = vs.heat_partner;
      if (o >= nv || o == v || volumes[o].heat_partner != v) {
        throw ConfigError("heat-transfer partners must reference each other");
      }
      if (!close(vs.geometry.L, volumes[o].geometry.L)) {
        throw ConfigError("heat-exchanging volumes must share their length");
      }
      if (!close(vs.heat.a_self, vs.geometry.a) || !close(vs.heat.a_other, volumes[o].geometry.a)) {
        throw ConfigError("heat-transfer area ratios do not match the geometry");
      }
    }
  }
  if (kind == UnitKind::DCR && (volumes[0].heat_partner != 1)) {
    throw ConfigError("DCR units need a heat-transfer pair");
  }
}

UnitSpec without_dispersion(UnitSpec unit) {
  for (auto& v : unit.volumes) {
    v.transport.D = 0.0;
    v.transport.kappa = 0.0;
  }
  return unit;
}

ComponentSet ammonia_components() {
  return builtin_components().select({"N2", "H2", "NH3", "Ar"});
}

OperatingConditions nominal_conditions(const ComponentSet& components, double T_in) {
  OperatingConditions c;
  c.x_in.assign(components.size(), 0.0);
  c.x_in[components.index_of("N2")] = 0.215;
  c.x_in[components.index_of("H2")] = 0.645;
  c.x_in[components.index_of("NH3")] = 0.10;
  c.x_in[components.index_of("Ar")] = 0.04;
  c.T_in = T_in;
  c.P_in = 200e5;
  c.P_out = 199e5;
  return c;
}

namespace {

VolumeSpec bed_volume(const std::string& name, double L, double V, double eps, double A,
                      const ReactorParameters& p, const ComponentSet& components) {
  VolumeSpec vs;
  vs.name = name;
  vs.geometry = VolumeGeometry::make(L, V, eps, A);
  vs.advection.law = AdvectionLaw::Ergun;
  vs.advection.mu = p.mu;
  vs.advection.d_p = p.d_p;
  vs.advection.epsilon = eps;
  vs.transport.D = p.D;
  vs.transport.kappa = (1.0 - eps) * p.kappa;
  vs.kinetics = ammonia_kinetics(components, p.A_fwd, p.A_bwd, p.E_fwd, p.E_bwd, p.beta, p.eta, eps);
  vs.solid = {p.rho_solid, p.cp_solid};
  return vs;
}

}  // namespace

UnitSpec build_afbr(const ReactorDimensions& dims, const ReactorParameters& params, EosKind eos,
                    const ComponentSet& components) {
  UnitSpec u;
  u.kind = UnitKind::FBR;
  u.fluid = FluidModel(components, eos, params.enthalpy_reference);
  u.volumes.push_back(
      bed_volume("FBR", dims.afbr_L, dims.afbr_V, dims.afbr_epsilon, 0.0, params, components));
  u.volumes[0].inlet.kind = BoundaryKind::PressureDriven;
  u.validate();
  return u;
}

UnitSpec build_idcr(const ReactorDimensions& dims, const ReactorParameters& params, EosKind eos,
                    const ComponentSet& components) {
  UnitSpec u;
  u.kind = UnitKind::DCR;
  u.fluid = FluidModel(components, eos, params.enthalpy_reference);

  VolumeSpec lct;
  lct.name = "LCT";
  lct.geometry = VolumeGeometry::make(dims.idcr_lct_L, dims.idcr_lct_V, 1.0, params.A_interface);
  lct.advection.law = AdvectionLaw::DarcyWeisbach;
  lct.advection.mu = params.mu;
  lct.advection.d_t = params.d_t;
  lct.advection.f_DW = params.f_DW;
  lct.transport.D = params.D;
  lct.transport.kappa = 0.0;
  lct.inlet.kind = BoundaryKind::PressureDriven;
  lct.heat_partner = 1;
  lct.heat = make_heat_transfer(params.U_overall, params.A_interface, dims.idcr_lct_V,
                                dims.idcr_fbr_V);

  VolumeSpec fbr = bed_volume("FBR", dims.idcr_fbr_L, dims.idcr_fbr_V, dims.idcr_fbr_epsilon,
                              params.A_interface, params, components);
  fbr.inlet.kind = BoundaryKind::Coupled;
  fbr.inlet.upstream = 0;
  fbr.inlet.psi = lct.geometry.S_fluid / fbr.geometry.S_fluid;
  fbr.heat_partner = 0;
  fbr.heat = make_heat_transfer(params.U_overall, params.A_interface, dims.idcr_fbr_V,
                                dims.idcr_lct_V);

  u.volumes = {lct, fbr};
  u.feed_volume = 0;
  u.outlet_volume = 1;
  u.top_volume = 0;
  u.validate();
  return u;
}

double h2_conversion(double N_in_H2, double S_fluid_in, double N_out_H2, double S_fluid_out) {
  const double in = N_in_H2 * S_fluid_in;
  if (!(in > 0.0)) throw ConfigError("conversion needs a positive inlet H2 flow");
  return 1.0 - N_out_H2 * S_fluid_out / in;
}

OperatingConditions to_flow_driven(const UnitSpec& unit, int vol, const OperatingConditions& cond,
                                   std::span<const double> N_in, double E_in) {
  const auto& g = unit.volumes[vol].geometry;
  OperatingConditions out = cond;
  out.f_in.resize(N_in.size());
  for (std::size_t i = 0; i < N_in.size(); ++i) out.f_in[i] = N_in[i] * g.S_fluid;
  out.h_in = E_in * g.S;
  return out;
}

}  // namespace fbrsim
