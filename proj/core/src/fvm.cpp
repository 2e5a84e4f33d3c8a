#include "fbrsim/fvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace fbrsim {

namespace {

// Derivative directions per residual pass. Units with more colored columns
// than this take several passes.
constexpr int kJacobianWidth = 24;
using JacobianScalar = Dual<double, kJacobianWidth>;

// Pressure gradient -dP/dz that drives velocity v through a volume.
double driving_gradient(const AdvectionParams& adv, double v, double rho) {
  if (adv.law == AdvectionLaw::Ergun) {
    const double e = adv.epsilon;
    const double a = 150.0 * adv.mu * (1.0 - e) * (1.0 - e) / (adv.d_p * adv.d_p * e * e);
    const double b = 1.75 * rho * (1.0 - e) / (adv.d_p * e);
    return a * v + b * v * std::abs(v);
  }
  return adv.f_DW * rho * v * std::abs(v) / (2.0 * adv.d_t);
}

}  // namespace

Grid Grid::make(double L, int n_cells) {
  if (n_cells < 2) throw ConfigError("grids need at least two cells");
  if (!(L > 0.0)) throw ConfigError("grid length must be positive");
  return {n_cells, L, L / n_cells};
}

SemiDiscreteSystem::SemiDiscreteSystem(UnitSpec unit, int n_cells) : unit_(std::move(unit)) {
  unit_.validate();
  const int nv = static_cast<int>(unit_.volumes.size());
  layout_ = {nv, n_cells, static_cast<int>(unit_.fluid.size())};
  for (const auto& vs : unit_.volumes) grids_.push_back(Grid::make(vs.geometry.L, n_cells));
  downstream_.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    const auto& b = unit_.volumes[v].inlet;
    if (b.kind == BoundaryKind::Coupled) {
      if (downstream_[b.upstream] >= 0) throw ConfigError("a volume can feed only one other volume");
      downstream_[b.upstream] = v;
    }
  }
  build_pattern();
}

void SemiDiscreteSystem::build_pattern() {
  const int nv = layout_.n_volumes;
  const int n = layout_.n_cells;
  const int ncell = nv * n;
  std::vector<std::vector<int>> deps(ncell);
  for (int v = 0; v < nv; ++v) {
    const auto& vs = unit_.volumes[v];
    for (int k = 0; k < n; ++k) {
      auto& d = deps[v * n + k];
      for (int j = std::max(0, k - 1); j <= std::min(n - 1, k + 1); ++j) d.push_back(v * n + j);
      if (vs.heat_partner >= 0) d.push_back(vs.heat_partner * n + counter_current_index(k, n));
      if (k == 0 && vs.inlet.kind == BoundaryKind::Coupled) d.push_back(vs.inlet.upstream * n + n - 1);
      if (k == n - 1 && downstream_[v] >= 0) d.push_back(downstream_[v] * n);
      std::sort(d.begin(), d.end());
      d.erase(std::unique(d.begin(), d.end()), d.end());
    }
  }

  // Distance-2 greedy coloring: cells appearing together in any row's
  // dependency set get distinct colors.
  std::vector<std::vector<int>> rows_of(ncell);
  for (int x = 0; x < ncell; ++x) {
    for (int y : deps[x]) rows_of[y].push_back(x);
  }
  cell_color_.assign(ncell, -1);
  n_colors_ = 0;
  for (int y = 0; y < ncell; ++y) {
    std::set<int> taken;
    for (int x : rows_of[y]) {
      for (int z : deps[x]) {
        if (cell_color_[z] >= 0) taken.insert(cell_color_[z]);
      }
    }
    int c = 0;
    while (taken.count(c)) ++c;
    cell_color_[y] = c;
    n_colors_ = std::max(n_colors_, c + 1);
  }

  const int nvar = layout_.n_var();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(ncell) * 4 * nvar * nvar);
  for (int x = 0; x < ncell; ++x) {
    for (int y : deps[x]) {
      for (int i = 0; i < nvar; ++i) {
        for (int j = 0; j < nvar; ++j) trip.emplace_back(x * nvar + i, y * nvar + j, 0.0);
      }
    }
  }
  pattern_.resize(layout_.size(), layout_.size());
  pattern_.setFromTriplets(trip.begin(), trip.end());
  pattern_.makeCompressed();
}

template <class S>
void SemiDiscreteSystem::residual(std::span<const S> w, const OperatingConditions& cond,
                                  std::span<S> F, FluxRecord* record) const {
  const int nc = layout_.n_components;
  const int n = layout_.n_cells;
  const int nv = layout_.n_volumes;
  const auto& fluid = unit_.fluid;
  const std::span<const double> M(fluid.molecular_weights());
  const auto& L = layout_;
  if (static_cast<int>(w.size()) != L.size() || static_cast<int>(F.size()) != L.size()) {
    throw ConfigError("state vector size does not match the layout");
  }
  auto conc = [&](int v, int k) { return w.subspan(L.c(v, k, 0), nc); };
  auto total = [&](std::span<const S> c) {
    double s = 0.0;
    for (const auto& x : c) s += value_of(x);
    return s;
  };

  std::vector<S> N(static_cast<std::size_t>(n + 1) * nc);
  std::vector<S> E(n + 1);
  std::array<S, kMaxComponents> N_adv;
  std::array<S, kMaxComponents> N_diff;
  std::array<S, kMaxComponents> R;
  if (record) {
    record->N.assign(nv, {});
    record->E.assign(nv, {});
    record->v.assign(nv, {});
  }

  for (int v = 0; v < nv; ++v) {
    const auto& vs = unit_.volumes[v];
    const auto& geo = vs.geometry;
    const double h = grids_[v].h;
    const double D = vs.transport.D;
    const double kappa = vs.transport.kappa;
    std::vector<double> vel(record ? n + 1 : 0);

    // Inlet interface.
    try {
      if (vs.inlet.kind == BoundaryKind::Coupled) {
        const int up = vs.inlet.upstream;
        const auto& us = unit_.volumes[up];
        S E_up;
        outlet_fluxes(fluid, us.advection, us.geometry.epsilon, w[L.T(up, n - 1)],
                      w[L.P(up, n - 1)], conc(up, n - 1), w[L.P(v, 0)], grids_[up].h,
                      std::span<S>(N_adv.data(), nc), E_up);
        for (int i = 0; i < nc; ++i) N[i] = vs.inlet.psi * N_adv[i];
        E[0] = (us.geometry.S / geo.S) * E_up;
        if (record) {
          double Nt = 0.0;
          for (int i = 0; i < nc; ++i) Nt += value_of(N[i]);
          vel[0] = Nt / total(conc(up, n - 1));
        }
      } else {
        inlet_fluxes(unit_, v, cond, w[L.P(v, 0)], h, std::span<S>(N.data(), nc), E[0]);
        if (record && vs.inlet.kind == BoundaryKind::PressureDriven) {
          const double Vx = fluid.volume(cond.T_in, cond.P_in, std::span<const double>(cond.x_in));
          double Nt = 0.0;
          for (int i = 0; i < nc; ++i) Nt += value_of(N[i]);
          vel[0] = Nt * Vx;
        }
      }
    } catch (const ThermoError& e) {
      throw EvaluationError(e.what(), v, 0, "inlet flux");
    }

    // Interior interfaces k - 1/2 between cells k - 1 and k.
    for (int k = 1; k < n; ++k) {
      const int up = upwind_select(w[L.P(v, k - 1)], w[L.P(v, k)]) == 0 ? k - 1 : k;
      try {
        const auto c_up = conc(v, up);
        const S dPdz = interface_gradient(w[L.P(v, k - 1)], w[L.P(v, k)], h);
        const S rho = fluid_density(c_up, M);
        const S u_adv = velocity_from_pressure_gradient(vs.advection, dPdz, rho);
        const auto cl = conc(v, k - 1);
        const auto cr = conc(v, k);
        for (int i = 0; i < nc; ++i) {
          N_adv[i] = u_adv * c_up[i];
          N_diff[i] = D != 0.0 ? S(-D * interface_gradient(cl[i], cr[i], h)) : S(0.0);
          N[k * nc + i] = N_adv[i] + N_diff[i];
        }
        const S dTdz = interface_gradient(w[L.T(v, k - 1)], w[L.T(v, k)], h);
        E[k] = energy_flux_parts(fluid, w[L.T(v, up)], w[L.P(v, up)], c_up,
                                 std::span<const S>(N_adv.data(), nc),
                                 std::span<const S>(N_diff.data(), nc), dTdz, kappa, geo.epsilon);
        if (record) vel[k] = value_of(u_adv);
      } catch (const ThermoError& e) {
        throw EvaluationError(e.what(), v, up, "interface flux");
      }
    }

    // Outlet interface.
    try {
      const S P_out = downstream_[v] >= 0 ? w[L.P(downstream_[v], 0)] : S(cond.P_out);
      outlet_fluxes(fluid, vs.advection, geo.epsilon, w[L.T(v, n - 1)], w[L.P(v, n - 1)],
                    conc(v, n - 1), P_out, h, std::span<S>(N.data() + n * nc, nc), E[n]);
      if (record) {
        double Nt = 0.0;
        for (int i = 0; i < nc; ++i) Nt += value_of(N[n * nc + i]);
        vel[n] = Nt / total(conc(v, n - 1));
      }
    } catch (const ThermoError& e) {
      throw EvaluationError(e.what(), v, n - 1, "outlet flux");
    }

    // Cell balances and constraints.
    for (int k = 0; k < n; ++k) {
      const int off = L.cell_offset(v, k);
      const S& T = w[off + nc + 1];
      const S& P = w[off + nc + 2];
      const S& u = w[off + nc];
      const auto c = conc(v, k);
      const char* what = "reaction";
      try {
        if (vs.kinetics) {
          production_rates(*vs.kinetics, T, P, c, std::span<S>(R.data(), nc));
        } else {
          std::fill(R.begin(), R.begin() + nc, S(0.0));
        }
        S Q = S(0.0);
        if (vs.heat_partner >= 0) {
          Q = interfacial_heat(vs.heat, w[L.T(vs.heat_partner, counter_current_index(k, n))], T);
        }
        for (int i = 0; i < nc; ++i) F[off + i] = -(N[(k + 1) * nc + i] - N[k * nc + i]) / h + R[i];
        F[off + nc] = -(E[k + 1] - E[k]) / h + Q;
        what = "constraints";
        const auto props = fluid.properties(T, P, c);
        F[off + nc + 1] = props.V - 1.0;
        S U = geo.epsilon * (props.H - P * props.V);
        if (geo.epsilon < 1.0) U += (1.0 - geo.epsilon) * vs.solid.internal_energy_density(T);
        F[off + nc + 2] = U - u;
      } catch (const ThermoError& e) {
        throw EvaluationError(e.what(), v, k, what);
      }
    }

    if (record) {
      record->N[v].resize(N.size());
      for (std::size_t i = 0; i < N.size(); ++i) record->N[v][i] = value_of(N[i]);
      record->E[v].resize(E.size());
      for (std::size_t i = 0; i < E.size(); ++i) record->E[v][i] = value_of(E[i]);
      record->v[v] = std::move(vel);
    }
  }
}

template void SemiDiscreteSystem::residual<double>(std::span<const double>,
                                                   const OperatingConditions&, std::span<double>,
                                                   FluxRecord*) const;
template void SemiDiscreteSystem::residual<JacobianScalar>(std::span<const JacobianScalar>,
                                                           const OperatingConditions&,
                                                           std::span<JacobianScalar>,
                                                           FluxRecord*) const;

SemiDiscreteSystem::Vector SemiDiscreteSystem::residual(const Vector& w,
                                                        const OperatingConditions& cond) const {
  Vector F(w.size());
  residual<double>(std::span<const double>(w.data(), w.size()), cond,
                   std::span<double>(F.data(), F.size()));
  return F;
}

FluxRecord SemiDiscreteSystem::fluxes(const Vector& w, const OperatingConditions& cond) const {
  FluxRecord rec;
  Vector F(w.size());
  residual<double>(std::span<const double>(w.data(), w.size()), cond,
                   std::span<double>(F.data(), F.size()), &rec);
  return rec;
}

void SemiDiscreteSystem::jacobian(const Vector& w, const OperatingConditions& cond,
                                  SparseMatrix& J) const {
  if (J.rows() != pattern_.rows() || J.nonZeros() != pattern_.nonZeros()) J = pattern_;
  const int nvar = layout_.n_var();
  const int size = layout_.size();
  const int directions = n_colors_ * nvar;
  auto direction = [&](int j) { return cell_color_[layout_.cell_index(j)] * nvar + layout_.variable(j); };

  std::vector<JacobianScalar> wd(size);
  std::vector<JacobianScalar> Fd(size);
  for (int first = 0; first < directions; first += kJacobianWidth) {
    for (int j = 0; j < size; ++j) {
      wd[j] = JacobianScalar(w[j]);
      const int d = direction(j) - first;
      if (d >= 0 && d < kJacobianWidth) wd[j].d[d] = 1.0;
    }
    residual<JacobianScalar>(wd, cond, Fd);
    for (int j = 0; j < size; ++j) {
      const int d = direction(j) - first;
      if (d < 0 || d >= kJacobianWidth) continue;
      for (SparseMatrix::InnerIterator it(J, j); it; ++it) it.valueRef() = Fd[it.row()].d[d];
    }
  }
}

SemiDiscreteSystem::SparseMatrix SemiDiscreteSystem::jacobian(
    const Vector& w, const OperatingConditions& cond) const {
  SparseMatrix J = pattern_;
  jacobian(w, cond, J);
  return J;
}

SemiDiscreteSystem::Vector SemiDiscreteSystem::mass_matrix(MassMatrixMode mode) const {
  Vector m = Vector::Zero(layout_.size());
  const int nc = layout_.n_components;
  for (int j = 0; j < layout_.size(); ++j) {
    const int var = layout_.variable(j);
    if (var == nc || (mode == MassMatrixMode::FullDynamic && var < nc)) m[j] = 1.0;
  }
  return m;
}

std::vector<double> SemiDiscreteSystem::pressure_levels(const OperatingConditions& cond,
                                                        PressureSplit split) const {
  const int nv = layout_.n_volumes;
  // Volumes in flow order.
  std::vector<int> chain{unit_.feed_volume};
  while (downstream_[chain.back()] >= 0) chain.push_back(downstream_[chain.back()]);
  if (static_cast<int>(chain.size()) != nv) throw ConfigError("unit volumes do not form a single chain");

  const double dP = cond.P_in - cond.P_out;
  std::vector<double> drop(nv, 0.0);
  if (split == PressureSplit::Length || nv == 1) {
    double Ltot = 0.0;
    for (const auto& vs : unit_.volumes) Ltot += vs.geometry.L;
    for (int v = 0; v < nv; ++v) drop[v] = dP * unit_.volumes[v].geometry.L / Ltot;
  } else {
    // Find the molar flow F whose summed pressure drops match dP, with every
    // volume at the feed state.
    const auto& fluid = unit_.fluid;
    const std::span<const double> x(cond.x_in);
    const double ctot = 1.0 / fluid.volume(cond.T_in, cond.P_in, x);
    double rho = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) rho += fluid.molecular_weights()[i] * x[i] * ctot;
    auto drops = [&](double Fm, std::vector<double>& out) {
      double sum = 0.0;
      for (int v = 0; v < nv; ++v) {
        const auto& vs = unit_.volumes[v];
        const double vel = Fm / (vs.geometry.S_fluid * ctot);
        out[v] = vs.geometry.L * driving_gradient(vs.advection, vel, rho);
        sum += out[v];
      }
      return sum;
    };
    double lo = 0.0;
    double hi = 1.0;
    while (drops(hi, drop) < dP) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (drops(mid, drop) < dP ? lo : hi) = mid;
    }
    const double sum = drops(0.5 * (lo + hi), drop);
    for (auto& d : drop) d *= dP / sum;
  }
  std::vector<double> levels(nv + 1, cond.P_out);
  double P = cond.P_in;
  for (int v : chain) {
    levels[v] = P;
    P -= drop[v];
  }
  levels[nv] = cond.P_out;
  return levels;
}

SemiDiscreteSystem::Vector SemiDiscreteSystem::initial_guess(const OperatingConditions& cond,
                                                             PressureSplit split) const {
  cond.validate(unit_.fluid.size());
  const auto levels = pressure_levels(cond, split);
  const int nv = layout_.n_volumes;
  const int n = layout_.n_cells;
  const int nc = layout_.n_components;
  const auto& fluid = unit_.fluid;
  const std::span<const double> x(cond.x_in);
  Vector w(layout_.size());
  for (int v = 0; v < nv; ++v) {
    const auto& vs = unit_.volumes[v];
    const double P0 = levels[v];
    const double P1 = downstream_[v] >= 0 ? levels[downstream_[v]] : levels[nv];
    for (int k = 0; k < n; ++k) {
      const double T = cond.T_in;
      const double P = P0 - (P0 - P1) * (k + 0.5) / n;
      const double Vx = fluid.volume(T, P, x);
      std::array<double, kMaxComponents> c{};
      for (int i = 0; i < nc; ++i) c[i] = x[i] / Vx;
      const std::span<const double> cs(c.data(), nc);
      for (int i = 0; i < nc; ++i) w[layout_.c(v, k, i)] = c[i];
      w[layout_.T(v, k)] = T;
      w[layout_.P(v, k)] = P;
      w[layout_.u(v, k)] =
          volume_internal_energy_density<double>(fluid, T, P, cs, vs.geometry.epsilon, vs.solid);
    }
  }
  return w;
}

double SemiDiscreteSystem::make_consistent(Vector& w, double tol, int max_iter) const {
  using D2 = Dual<double, 2>;
  const int nc = layout_.n_components;
  const auto& fluid = unit_.fluid;
  double worst = 0.0;
  for (int v = 0; v < layout_.n_volumes; ++v) {
    const auto& vs = unit_.volumes[v];
    for (int k = 0; k < layout_.n_cells; ++k) {
      std::array<D2, kMaxComponents> c;
      for (int i = 0; i < nc; ++i) c[i] = D2(w[layout_.c(v, k, i)]);
      const std::span<const D2> cs(c.data(), nc);
      const double u = w[layout_.u(v, k)];
      const double uscale = std::max(std::abs(u), 1.0);
      double T = w[layout_.T(v, k)];
      double P = w[layout_.P(v, k)];
      double res = std::numeric_limits<double>::infinity();
      for (int it = 0; it < max_iter; ++it) {
        const D2 Td = make_variable<double, 2>(T, 0);
        const D2 Pd = make_variable<double, 2>(P, 1);
        D2 g1;
        D2 g2;
        try {
          g1 = fluid.volume(Td, Pd, cs) - 1.0;
          g2 = (volume_internal_energy_density(fluid, Td, Pd, cs, vs.geometry.epsilon, vs.solid) -
                u) / uscale;
        } catch (const ThermoError& e) {
          throw EvaluationError(e.what(), v, k, "consistency");
        }
        res = std::max(std::abs(g1.v), std::abs(g2.v));
        if (res <= tol) break;
        const double det = g1.d[0] * g2.d[1] - g1.d[1] * g2.d[0];
        if (det == 0.0) throw EvaluationError("singular constraint block", v, k, "consistency");
        double dT = (g1.v * g2.d[1] - g2.v * g1.d[1]) / det;
        double dP = (g1.d[0] * g2.v - g2.d[0] * g1.v) / det;
        // Keep the iterate physical.
        double alpha = 1.0;
        while (T - alpha * dT <= 0.0 || P - alpha * dP <= 0.0) alpha *= 0.5;
        T -= alpha * dT;
        P -= alpha * dP;
      }
      w[layout_.T(v, k)] = T;
      w[layout_.P(v, k)] = P;
      worst = std::max(worst, res);
    }
  }
  return worst;
}

double SemiDiscreteSystem::constraint_residual(const Vector& w) const {
  const int nc = layout_.n_components;
  const auto& fluid = unit_.fluid;
  double worst = 0.0;
  for (int v = 0; v < layout_.n_volumes; ++v) {
    const auto& vs = unit_.volumes[v];
    for (int k = 0; k < layout_.n_cells; ++k) {
      const std::span<const double> c(w.data() + layout_.c(v, k, 0), nc);
      const double T = w[layout_.T(v, k)];
      const double P = w[layout_.P(v, k)];
      const double u = w[layout_.u(v, k)];
      const double g1 = fluid.volume(T, P, c) - 1.0;
      const double g2 =
          volume_internal_energy_density<double>(fluid, T, P, c, vs.geometry.epsilon, vs.solid) - u;
      worst = std::max({worst, std::abs(g1), std::abs(g2) / std::max(std::abs(u), 1.0)});
    }
  }
  return worst;
}

SemiDiscreteSystem::Vector SemiDiscreteSystem::variable_scales(
    const Vector& w_ref, const OperatingConditions& cond) const {
  const auto& fluid = unit_.fluid;
  const double c_ref = 1.0 / fluid.volume(cond.T_in, cond.P_in, std::span<const double>(cond.x_in));
  const int nc = layout_.n_components;
  Vector s(layout_.size());
  for (int j = 0; j < layout_.size(); ++j) {
    const int var = layout_.variable(j);
    if (var < nc) s[j] = c_ref;
    else if (var == nc) s[j] = std::max(std::abs(w_ref[j]), 1.0);
    else if (var == nc + 1) s[j] = 100.0;
    else s[j] = 1e5;
  }
  return s;
}

SemiDiscreteSystem::Vector SemiDiscreteSystem::residual_scales(
    const Vector& w_ref, const OperatingConditions& cond) const {
  const auto& fluid = unit_.fluid;
  const std::span<const double> x(cond.x_in);
  const double c_ref = 1.0 / fluid.volume(cond.T_in, cond.P_in, x);
  double cp_ref = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cp_ref += x[i] * fluid.components()[i].cp(cond.T_in);
  const FluxRecord rec = fluxes(w_ref, cond);
  const int nc = layout_.n_components;
  const double dT = 100.0;
  Vector s(layout_.size());
  for (int v = 0; v < layout_.n_volumes; ++v) {
    const auto& vs = unit_.volumes[v];
    const double eps = vs.geometry.epsilon;
    double v_ref = 0.0;
    for (double vel : rec.v[v]) v_ref += std::abs(vel);
    v_ref = std::max(v_ref / rec.v[v].size(), 1e-3);
    const double h = grids_[v].h;
    const double heat_capacity =
        eps * c_ref * cp_ref + (eps < 1.0 ? (1.0 - eps) * vs.solid.rho * vs.solid.cp : 0.0);
    for (int k = 0; k < layout_.n_cells; ++k) {
      const int off = layout_.cell_offset(v, k);
      for (int i = 0; i < nc; ++i) s[off + i] = c_ref * v_ref / h;
      s[off + nc] = eps * c_ref * cp_ref * dT * v_ref / h;
      s[off + nc + 1] = 1.0;
      s[off + nc + 2] = heat_capacity * dT;
    }
  }
  return s;
}

UnitOutputs SemiDiscreteSystem::outputs(const Vector& w, const OperatingConditions& cond) const {
  const FluxRecord rec = fluxes(w, cond);
  const int n = layout_.n_cells;
  const int nc = layout_.n_components;
  UnitOutputs o;
  const int fv = unit_.feed_volume;
  const int ov = unit_.outlet_volume;
  o.T_out = w[layout_.T(ov, n - 1)];
  o.T_top = w[layout_.T(unit_.top_volume, n - 1)];
  if (unit_.fluid.components().contains("H2")) {
    const auto iH2 = static_cast<int>(unit_.fluid.components().index_of("H2"));
    const double S_in = unit_.volumes[fv].geometry.S_fluid;
    const double S_out = unit_.volumes[ov].geometry.S_fluid;
    o.F_in_H2 = rec.N[fv][iH2] * S_in;
    o.F_out_H2 = rec.N[ov][n * nc + iH2] * S_out;
    o.X_out = h2_conversion(rec.N[fv][iH2], S_in, rec.N[ov][n * nc + iH2], S_out);
  } else {
    o.X_out = std::numeric_limits<double>::quiet_NaN();
  }
  return o;
}

}  // namespace fbrsim
