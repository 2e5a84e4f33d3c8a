#include <gtest/gtest.h>

#include "fbrsim/reactor.hpp"
#include "support.hpp"

using namespace fbrsim;
using fbrsim::test::rel_err;

TEST(Geometry, AfbrTableValues) {
  const auto u = build_afbr({}, {}, EosKind::SRK);
  const auto& g = u.volumes[0].geometry;
  EXPECT_DOUBLE_EQ(g.S_fluid, 0.33);
  EXPECT_NEAR(g.phi, 2.0303, 1e-4);
  EXPECT_EQ(g.a, 0.0);
  EXPECT_EQ(u.volumes[0].heat_partner, -1);
  EXPECT_DOUBLE_EQ(u.volumes[0].transport.kappa, 0.67 * 50.0);
}

TEST(Geometry, IdcrCoupling) {
  const auto u = build_idcr({}, {}, EosKind::SRK);
  ASSERT_EQ(u.volumes.size(), 2u);
  const auto& lct = u.volumes[0];
  const auto& fbr = u.volumes[1];
  EXPECT_EQ(lct.name, "LCT");
  EXPECT_FALSE(lct.kinetics.has_value());
  EXPECT_EQ(fbr.inlet.kind, BoundaryKind::Coupled);
  EXPECT_NEAR(fbr.inlet.psi, (0.5 / 6.0) / (0.18 * 3.0 / 6.0), 1e-14);
  EXPECT_NEAR(fbr.inlet.psi, 0.9259, 1e-4);
  EXPECT_DOUBLE_EQ(fbr.geometry.a, 50.0);
  EXPECT_DOUBLE_EQ(lct.geometry.a, 300.0);
  EXPECT_EQ(counter_current_index(counter_current_index(17, 100), 100), 17);
  EXPECT_EQ(counter_current_index(0, 100), 99);
}

TEST(Geometry, Validation) {
  EXPECT_THROW(VolumeGeometry::make(0.0, 1.0, 0.5), ConfigError);
  EXPECT_THROW(VolumeGeometry::make(1.0, 1.0, 1.5), ConfigError);
  auto g = VolumeGeometry::make(2.0, 2.0, 0.33);
  g.S_fluid = 0.5;
  EXPECT_THROW(g.validate(), ConfigError);

  auto u = build_idcr({}, {}, EosKind::SRK);
  u.volumes[1].inlet.psi = 1.0;
  EXPECT_THROW(u.validate(), ConfigError);
  u = build_idcr({}, {}, EosKind::SRK);
  u.volumes[1].heat_partner = -1;
  EXPECT_THROW(u.validate(), ConfigError);
}

TEST(Conditions, Validation) {
  auto c = nominal_conditions(ammonia_components(), 700.0);
  EXPECT_NO_THROW(c.validate(4));
  EXPECT_THROW(c.validate(3), ConfigError);
  c.x_in[0] += 0.01;
  EXPECT_THROW(c.validate(4), ConfigError);
  c = nominal_conditions(ammonia_components(), 0.0);
  EXPECT_THROW(c.validate(4), ConfigError);
}

TEST(Boundary, FlowDrivenZero) {
  auto u = build_afbr({}, {}, EosKind::IdealGas);
  u.volumes[0].inlet.kind = BoundaryKind::FlowDriven;
  auto cond = nominal_conditions(ammonia_components(), 650.0);
  cond.f_in.assign(4, 0.0);
  cond.h_in = 0.0;
  std::vector<double> N(4);
  double E = 1.0;
  inlet_fluxes<double>(u, 0, cond, 199.9e5, 0.02, N, E);
  for (double x : N) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(E, 0.0);
}

TEST(Boundary, PressureDrivenIdealDensity) {
  const auto u = build_afbr({}, {}, EosKind::IdealGas);
  const auto cond = nominal_conditions(ammonia_components(), 650.0);
  const double h = 0.02, P1 = 199.99e5;
  std::vector<double> N(4);
  double E = 0.0;
  inlet_fluxes<double>(u, 0, cond, P1, h, N, E);

  const double c_tot = 200e5 / (kGasConstant * 650.0);
  EXPECT_NEAR(c_tot, 3701.5, 1.0);
  double rho = 0.0, Nt = 0.0;
  for (int i = 0; i < 4; ++i) {
    rho += u.fluid.molecular_weights()[i] * cond.x_in[i] * c_tot;
    Nt += N[i];
  }
  const double v = velocity_from_pressure_gradient(u.volumes[0].advection, (P1 - 200e5) / (0.5 * h), rho);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(rel_err(Nt / v, c_tot), 1e-12);
  for (int i = 0; i < 4; ++i) EXPECT_LT(rel_err(N[i] / Nt, cond.x_in[i]), 1e-12);
  EXPECT_LT(rel_err(E, 0.33 * u.fluid.enthalpy(650.0, 200e5, std::span<const double>(N))), 1e-12);

  // Round trip through flow-driven conditions.
  auto uf = u;
  uf.volumes[0].inlet.kind = BoundaryKind::FlowDriven;
  const auto fc = to_flow_driven(u, 0, cond, N, E);
  std::vector<double> N2(4);
  double E2 = 0.0;
  inlet_fluxes<double>(uf, 0, fc, P1, h, N2, E2);
  for (int i = 0; i < 4; ++i) EXPECT_LT(rel_err(N2[i], N[i]), 1e-14);
  EXPECT_LT(rel_err(E2, E), 1e-14);
}

TEST(Boundary, OutletFluxes) {
  const auto u = build_afbr({}, {}, EosKind::SRK);
  const auto& vs = u.volumes[0];
  const std::vector<double> c = {1000.0, 3000.0, 500.0, 200.0};
  std::vector<double> N(4);
  double E = 1.0;
  outlet_fluxes<double>(u.fluid, vs.advection, 0.33, 700.0, 199e5, c, 199e5, 0.02, N, E);
  for (double x : N) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(E, 0.0);

  outlet_fluxes<double>(u.fluid, vs.advection, 0.33, 700.0, 199.01e5, c, 199e5, 0.02, N, E);
  const double rho = fluid_density<double>(c, u.fluid.molecular_weights());
  const double v = velocity_from_pressure_gradient(vs.advection, -0.01e5 / 0.01, rho);
  for (int i = 0; i < 4; ++i) EXPECT_LT(rel_err(N[i], v * c[i]), 1e-14);
  EXPECT_LT(rel_err(E, 0.33 * u.fluid.enthalpy(700.0, 199.01e5, std::span<const double>(N))), 1e-14);
}

TEST(Conversion, Limits) {
  EXPECT_EQ(h2_conversion(5.0, 0.33, 5.0, 0.33), 0.0);
  EXPECT_EQ(h2_conversion(5.0, 0.33, 0.0, 0.33), 1.0);
  EXPECT_NEAR(h2_conversion(5.0, 0.33, 2.0, 0.66), 0.2, 1e-15);
  EXPECT_THROW(h2_conversion(0.0, 0.33, 0.0, 0.33), ConfigError);
}

TEST(Units, WithoutDispersion) {
  const auto u = without_dispersion(build_idcr({}, {}, EosKind::SRK));
  for (const auto& v : u.volumes) {
    EXPECT_EQ(v.transport.D, 0.0);
    EXPECT_EQ(v.transport.kappa, 0.0);
  }
}
