#pragma once

// First-order upwind finite-volume semi-discretization of a reactor unit into
// the semi-explicit DAE  M dw/dt = F(w).
//
// Each cell k of each volume carries  [c_1..c_nC, u | T, P]; the first nC+1
// entries are differential, the last two algebraic. Cells are stored
// contiguously, volume after volume.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <span>
#include <vector>

#include "fbrsim/reactor.hpp"

namespace fbrsim {

struct Grid {
  int n_cells = 0;
  double L = 0.0;
  double h = 0.0;

  static Grid make(double L, int n_cells);
  double midpoint(int k) const { return (k + 0.5) * h; }
};

struct StateLayout {
  int n_volumes = 0;
  int n_cells = 0;
  int n_components = 0;

  int n_var() const { return n_components + 3; }
  int n_differential() const { return n_components + 1; }
  int size() const { return n_volumes * n_cells * n_var(); }
  int cell_offset(int v, int k) const { return (v * n_cells + k) * n_var(); }
  int c(int v, int k, int i) const { return cell_offset(v, k) + i; }
  int u(int v, int k) const { return cell_offset(v, k) + n_components; }
  int T(int v, int k) const { return cell_offset(v, k) + n_components + 1; }
  int P(int v, int k) const { return cell_offset(v, k) + n_components + 2; }
  int variable(int index) const { return index % n_var(); }
  int cell_index(int index) const { return index / n_var(); }
  bool is_differential(int index) const { return variable(index) < n_differential(); }
};

enum class MassMatrixMode { FullDynamic, PseudoSteadyMass };

// Index of the upwind side at an interface: 0 (left) if P_right <= P_left.
template <class S>
int upwind_select(const S& P_left, const S& P_right) {
  return value_of(P_right) <= value_of(P_left) ? 0 : 1;
}

template <class S>
S interface_gradient(const S& w_left, const S& w_right, double h) {
  return (w_right - w_left) / h;
}

// How the initial guess splits the unit's pressure drop over coupled volumes.
enum class PressureSplit {
  Length,    // proportional to volume length
  Coupling,  // equal molar flow through each volume at the feed state
};

// Interface fluxes of one evaluation, n_cells + 1 interfaces per volume.
struct FluxRecord {
  std::vector<std::vector<double>> N;  // [volume][interface * nC + i], per fluid area
  std::vector<std::vector<double>> E;  // [volume][interface], per total area
  std::vector<std::vector<double>> v;  // advective velocity [volume][interface]
};

struct UnitOutputs {
  double X_out = 0.0;      // H2 conversion
  double T_out = 0.0;      // outlet cell temperature of the outlet volume [K]
  double T_top = 0.0;      // outlet cell temperature of the top volume [K]
  double F_in_H2 = 0.0;    // [mol/s]
  double F_out_H2 = 0.0;   // [mol/s]
};

class SemiDiscreteSystem {
 public:
  using Vector = Eigen::VectorXd;
  using SparseMatrix = Eigen::SparseMatrix<double>;

  SemiDiscreteSystem(UnitSpec unit, int n_cells);

  const UnitSpec& unit() const { return unit_; }
  const StateLayout& layout() const { return layout_; }
  const Grid& grid(int v) const { return grids_[v]; }
  int size() const { return layout_.size(); }

  // F(w) under the boundary inputs `cond`. Throws EvaluationError.
  template <class S>
  void residual(std::span<const S> w, const OperatingConditions& cond, std::span<S> F,
                FluxRecord* record = nullptr) const;

  Vector residual(const Vector& w, const OperatingConditions& cond) const;
  FluxRecord fluxes(const Vector& w, const OperatingConditions& cond) const;

  // Jacobian by colored forward-mode differentiation. The returned matrix
  // always has the sparsity pattern of jacobian_pattern().
  void jacobian(const Vector& w, const OperatingConditions& cond, SparseMatrix& J) const;
  SparseMatrix jacobian(const Vector& w, const OperatingConditions& cond) const;
  const SparseMatrix& jacobian_pattern() const { return pattern_; }
  int n_colors() const { return n_colors_; }

  // Diagonal of the 0/1 mass matrix.
  Vector mass_matrix(MassMatrixMode mode) const;

  // Constant temperature, piecewise linear pressure, feed composition at the
  // EOS density, consistent internal energy.
  Vector initial_guess(const OperatingConditions& cond,
                       PressureSplit split = PressureSplit::Coupling) const;
  // Interface pressures (inlet of each volume, then unit outlet) used by the guess.
  std::vector<double> pressure_levels(const OperatingConditions& cond, PressureSplit split) const;

  // Solves the algebraic rows for (T, P) of every cell at fixed x. Returns
  // the final max constraint residual (scaled).
  double make_consistent(Vector& w, double tol = 1e-12, int max_iter = 30) const;
  // Largest |V - 1| and |U - u| / u_scale over all cells.
  double constraint_residual(const Vector& w) const;

  // Per-variable scales: c by the feed concentration, u by |u| of `w_ref`,
  // T by 100 K, P by 1 bar.
  Vector variable_scales(const Vector& w_ref, const OperatingConditions& cond) const;

  // Residual scales at a reference state: species rows by c_ref v_ref / h,
  // energy rows by the sensible enthalpy flux of 100 K over h, volume rows by
  // 1 and energy constraints by the heat capacity of 100 K.
  Vector residual_scales(const Vector& w_ref, const OperatingConditions& cond) const;

  UnitOutputs outputs(const Vector& w, const OperatingConditions& cond) const;

 private:
  void build_pattern();

  UnitSpec unit_;
  StateLayout layout_;
  std::vector<Grid> grids_;
  std::vector<int> downstream_;  // volume fed by each volume's outlet, or -1
  std::vector<int> cell_color_;
  int n_colors_ = 0;
  SparseMatrix pattern_;
};

}  // namespace fbrsim
