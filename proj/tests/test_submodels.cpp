#include <gtest/gtest.h>

#include "fbrsim/reactor.hpp"
#include "fbrsim/submodels.hpp"
#include "support.hpp"

using namespace fbrsim;
using fbrsim::test::nominal_c;
using fbrsim::test::nominal_x;
using fbrsim::test::rel_err;

namespace {

KineticParams afbr_kinetics(double eta = 4.75) {
  return ammonia_kinetics(ammonia_components(), 4972.0, 7.14e15, 87090.0, 198464.0, 0.5, eta, 0.33);
}

AdvectionParams ergun() {
  AdvectionParams p;
  p.law = AdvectionLaw::Ergun;
  p.mu = 3.08e-5;
  p.d_p = 8e-3;
  p.epsilon = 0.33;
  return p;
}

}  // namespace

TEST(Kinetics, HandEvaluatedRate) {
  const FluidModel f(ammonia_components(), EosKind::SRK);
  const double T = 700.0, P = 200e5;
  const auto c = nominal_c(f, T, P);
  const double r = temkin_rate(afbr_kinetics(), {T, P, c});

  // Partial pressures in bar are x_i * 200.
  const double pN2 = 0.215 * 200.0, pH2 = 0.645 * 200.0, pNH3 = 0.10 * 200.0;
  const double kf = 4972.0 * std::exp(-87090.0 / (8.314 * T));
  const double kb = 7.14e15 * std::exp(-198464.0 / (8.314 * T));
  const double q = pH2 * pH2 * pH2 / (pNH3 * pNH3);
  const double oracle = (0.67 / 0.33) * 4.75 * (kf * pN2 * std::sqrt(q) - kb / std::sqrt(q));
  EXPECT_LT(rel_err(r, oracle), 1e-12);

  const auto R = production_rates(afbr_kinetics(), {T, P, c});
  EXPECT_EQ(R[0], -r);
  EXPECT_EQ(R[1], -3.0 * r);
  EXPECT_EQ(R[2], 2.0 * r);
  EXPECT_EQ(R[3], 0.0);
}

TEST(Kinetics, ForwardDominatesWithoutAmmonia) {
  const std::vector<double> c = {1000.0, 3000.0, 0.0, 100.0};
  EXPECT_GT(temkin_rate(afbr_kinetics(), {700.0, 200e5, c}), 0.0);
}

TEST(Kinetics, LinearInEta) {
  const FluidModel f(ammonia_components(), EosKind::IdealGas);
  const auto c = nominal_c(f, 720.0, 200e5);
  const double r1 = temkin_rate(afbr_kinetics(2.0), {720.0, 200e5, c});
  const double r2 = temkin_rate(afbr_kinetics(4.0), {720.0, 200e5, c});
  EXPECT_LT(rel_err(r2, 2.0 * r1), 1e-14);
}

TEST(Kinetics, Stoichiometry) {
  const FluidModel f(ammonia_components(), EosKind::IdealGas);
  for (double T : {550.0, 650.0, 800.0}) {
    const auto R = production_rates(afbr_kinetics(), {T, 200e5, nominal_c(f, T, 200e5)});
    EXPECT_EQ(R[1], 3.0 * R[0]);
  }
  // Equilibrium composition is not special-cased: a zero rate gives a zero vector.
  KineticParams k = afbr_kinetics();
  k.A_fwd = 0.0;
  k.A_bwd = 0.0;
  const auto R0 = production_rates(k, {700.0, 200e5, nominal_c(f, 700.0, 200e5)});
  for (double x : R0) EXPECT_EQ(x, 0.0);
}

TEST(Kinetics, Validation) {
  KineticParams k = afbr_kinetics();
  k.epsilon = 0.0;
  EXPECT_THROW(k.validate(), ConfigError);
  k = afbr_kinetics();
  k.nu = {1.0, 1.0};
  EXPECT_THROW(k.validate(), ConfigError);
}

TEST(Density, DotProduct) {
  const std::vector<double> M = {0.028};
  const std::vector<double> c = {1000.0};
  EXPECT_NEAR(fluid_density<double>(c, M), 28.0, 1e-12);
  const std::vector<double> z = {0.0};
  EXPECT_EQ(fluid_density<double>(z, M), 0.0);

  const FluidModel f(ammonia_components(), EosKind::SRK);
  const auto cn = nominal_c(f, 650.0, 200e5);
  const auto& Mw = f.molecular_weights();
  double oracle = 0.0;
  for (int i = 0; i < 4; ++i) oracle += Mw[i] * cn[i];
  EXPECT_LT(rel_err(fluid_density<double>(cn, Mw), oracle), 1e-15);
}

TEST(Advection, ZeroGradient) {
  auto p = ergun();
  EXPECT_EQ(velocity_from_pressure_gradient(p, 0.0, 60.0), 0.0);
  p.law = AdvectionLaw::DarcyWeisbach;
  p.d_t = 13.3e-3;
  p.f_DW = 2e-2;
  EXPECT_EQ(velocity_from_pressure_gradient(p, 0.0, 60.0), 0.0);
}

TEST(Advection, ErgunMatchesBisection) {
  const auto p = ergun();
  const double dPdz = -5e4, rho = 60.0;
  const double e = 0.33;
  const double a = 150.0 * p.mu * (1 - e) * (1 - e) / (p.d_p * p.d_p * e * e);
  const double b = 1.75 * rho * (1 - e) / (p.d_p * e);
  auto g = [&](double v) { return a * v + b * v * v + dPdz; };
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  EXPECT_NEAR(velocity_from_pressure_gradient(p, dPdz, rho), 0.5 * (lo + hi), 1e-10);
}

TEST(Advection, OddInGradient) {
  auto p = ergun();
  for (double g : {1.0, 3e3, 5e4}) {
    EXPECT_EQ(velocity_from_pressure_gradient(p, g, 60.0), -velocity_from_pressure_gradient(p, -g, 60.0));
  }
  p.law = AdvectionLaw::DarcyWeisbach;
  p.d_t = 13.3e-3;
  p.f_DW = 2e-2;
  EXPECT_EQ(velocity_from_pressure_gradient(p, 2e3, 60.0), -velocity_from_pressure_gradient(p, -2e3, 60.0));
  EXPECT_LT(velocity_from_pressure_gradient(p, 2e3, 60.0), 0.0);
  // Darcy-Weisbach: dP/dz = -f rho v^2 / (2 d_t)
  const double v = velocity_from_pressure_gradient(p, -2e3, 60.0);
  EXPECT_NEAR(p.f_DW * 60.0 * v * v / (2.0 * p.d_t), 2e3, 1e-9);
}

TEST(Dispersion, Fick) {
  const std::vector<double> D(4, 1e-5);
  const std::vector<double> g = {100.0, -200.0, 0.0, 50.0};
  const auto N = diffusive_flux(D, g);
  EXPECT_DOUBLE_EQ(N[0], -1e-3);
  EXPECT_DOUBLE_EQ(N[1], 2e-3);
  EXPECT_EQ(N[2], 0.0);
  EXPECT_DOUBLE_EQ(N[3], -5e-4);
  for (double x : diffusive_flux(std::vector<double>(4, 0.0), g)) EXPECT_EQ(x, 0.0);
  for (double x : diffusive_flux(D, std::vector<double>(4, 0.0))) EXPECT_EQ(x, 0.0);
}

TEST(EnergyFlux, Parts) {
  const FluidModel f(ammonia_components(), EosKind::SRK);
  const double T = 700.0, P = 200e5;
  const auto c = nominal_c(f, T, P);
  const ThermoState s{T, P, c};
  const std::vector<double> zero(4, 0.0);
  EXPECT_EQ(energy_flux_parts(f, s, zero, zero, 0.0, 50.0, 0.33), 0.0);

  double rho = 0.0;
  for (int i = 0; i < 4; ++i) rho += f.molecular_weights()[i] * c[i];
  const double v = velocity_from_pressure_gradient(ergun(), -50.0, rho);
  std::vector<double> Nadv(4);
  for (int i = 0; i < 4; ++i) Nadv[i] = v * c[i];
  EXPECT_LT(rel_err(energy_flux_parts(f, s, Nadv, zero, 0.0, 0.0, 0.33),
                    0.33 * enthalpy(f, T, P, Nadv)),
            1e-14);

  const std::vector<double> Nd = {1e-3, -2e-3, 5e-4, 0.0};
  const double dTdz = 3.0, kappa = 33.5;
  const auto Hbar = partial_molar_enthalpy(f, s);
  double oracle = enthalpy(f, T, P, Nadv);
  for (int i = 0; i < 4; ++i) oracle -= Hbar[i] * Nd[i];
  oracle = 0.33 * oracle - kappa * dTdz;
  EXPECT_LT(rel_err(energy_flux_parts(f, s, Nadv, Nd, dTdz, kappa, 0.33), oracle), 1e-10);
}

TEST(HeatTransfer, IdcrArithmetic) {
  const auto fbr = make_heat_transfer(300.0, 150.0, 3.0, 0.5);
  const auto lct = make_heat_transfer(300.0, 150.0, 0.5, 3.0);
  EXPECT_DOUBLE_EQ(fbr.a_self, 50.0);
  EXPECT_DOUBLE_EQ(lct.a_self, 300.0);
  EXPECT_DOUBLE_EQ(fbr.a_other, 300.0);
  const double Q_fbr = interfacial_heat(fbr, 610.0, 600.0);
  const double Q_lct = interfacial_heat(lct, 600.0, 610.0);
  EXPECT_DOUBLE_EQ(Q_fbr, 1.5e5);
  EXPECT_DOUBLE_EQ(Q_lct, -9e5);
  EXPECT_EQ(3.0 * Q_fbr + 0.5 * Q_lct, 0.0);
  EXPECT_EQ(interfacial_heat(fbr, 600.0, 600.0), 0.0);
  const auto fbr2 = make_heat_transfer(600.0, 150.0, 3.0, 0.5);
  EXPECT_DOUBLE_EQ(interfacial_heat(fbr2, 610.0, 600.0), 2.0 * Q_fbr);
  EXPECT_THROW(make_heat_transfer(300.0, 150.0, 0.0, 0.5), ConfigError);
}
