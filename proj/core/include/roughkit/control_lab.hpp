#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "roughkit/control.hpp"

namespace roughkit {

// ---- degeneracy example -------------------------------------------------

/// Trading against a scalar price eta with inventory in [-Q, Q]. On each grid cell the
/// agent first moves its inventory from q_i to q_{i+1} (paying eps |dq / h|^q_exp h) and
/// then holds, earning q_{i+1} (eta_{i+1} - eta_i). Inventory starts at 0.
struct TradingConfig {
  double x = 0.0;
  double inventory_bound = 1.0;
  /// Odd, so that 0 is on the lattice; 0 picks 4 n + 1 for a path with n cells.
  std::size_t inventory_levels = 0;
  double q_exp = 2.0;

  void validate() const;
};

/// Best attainable wealth by backward dynamic programming over the inventory lattice.
double trading_value(const SampledPath& eta, double eps, const TradingConfig& cfg);

/// Piecewise-linear interpolations of one sample at uniform meshes n (each a divisor of
/// the sample's grid).
std::vector<SampledPath> mesh_family(const SampledPath& sample, const std::vector<std::size_t>& meshes);

struct DegeneracyRow {
  std::size_t mesh = 0;
  double eps = 0.0;
  double value = 0.0;
  double path_length = 0.0;  ///< 1-variation of the interpolation
  double closed_form = 0.0;  ///< x + Q * path_length, the eps = 0 value
};

struct DegeneracyTable {
  std::vector<DegeneracyRow> rows;
  /// x + Q sup|eta| + T (q-1) eps (sup|eta| / (q eps))^(q/(q-1)) for the smallest
  /// positive eps, sup taken of |eta - eta_0| over the family: a mesh-free ceiling for every
  /// regularized value.
  double regularized_bound = INFINITY;
  bool eps0_increasing = true;       ///< eps = 0 values strictly increase with the mesh
  bool eps0_matches = true;          ///< |value - closed form| <= 1e-9 for eps = 0
  bool regularized_bounded = true;   ///< every eps > 0 value is below the ceiling
};

/// Rows in mesh order for every eps in `eps_list` (meshes must be increasing).
DegeneracyTable degeneracy_demo(const std::vector<SampledPath>& family, const std::vector<std::size_t>& meshes,
                                const std::vector<double>& eps_list, const TradingConfig& cfg);

// ---- value tables and the HJB residual ----------------------------------

/// Scalar state and scalar gamma: a value table on (driver grid) x (x grid) x (a grid),
/// built backward with one Davie step per driver cell and bilinear interpolation
/// (clamped at the box edges) of the next slice.
struct ValueTable {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> a;
  std::vector<double> u;  ///< control levels searched at each node
  std::vector<double> v;  ///< v[(k * x.size() + i) * a.size() + j]

  double node(std::size_t k, std::size_t i, std::size_t j) const { return v[(k * x.size() + i) * a.size() + j]; }
  double& node(std::size_t k, std::size_t i, std::size_t j) { return v[(k * x.size() + i) * a.size() + j]; }
  /// Interpolated slice k at (x, a).
  double at(std::size_t k, double xv, double av) const;
  /// Minimizing control level at node (k, i, j), first on ties; k < t.size() - 1.
  double best_control(const ControlProblem& problem, std::size_t k, double xv, double av) const;
};

/// Needs a one-dimensional driver, x and a grids of at least 3 increasing nodes and at
/// least one control level.
ValueTable value_table(const ControlProblem& problem, std::vector<double> x_grid, std::vector<double> a_grid,
                       std::vector<double> u_levels);

/// Table of a candidate w(t, x, a) on the nodes of `shape`.
ValueTable tabulate(const std::function<double(double, double, double)>& w, const ValueTable& shape);

struct HjbResidual {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  double terminal_max = 0.0;  ///< max |v(T, .) - g|
  std::size_t nodes = 0;
};

/// -dv/dt - b dv/dx - min_u {h dv/da + f + eps |u|^q} - (lam dv/dx + psi) eta' at interior
/// nodes: forward differences in t, central differences in x and a, eta' the cell slope.
/// Nodes within `margin` of the x or a edges are skipped.
HjbResidual hjb_residual(const ControlProblem& problem, const ValueTable& table, std::size_t margin = 1);

using Feedback = std::function<double(double t, double x, double a)>;

struct VerificationReport {
  double residual = 0.0;    ///< max |HJB residual| of the candidate w
  double feedback_cost = 0.0;
  double lattice_value = 0.0;
  double cost_gap = 0.0;    ///< feedback_cost - lattice_value (never negative)
  double value_gap = 0.0;   ///< max |w - table| over the table nodes
};

/// Checks a candidate (w, u*) against the table and the lattice value from (t0 = 0, x0, a0).
/// u* is read at each knot of `grid` along its own trajectory and snapped to the nearest
/// lattice level, so the feedback control is itself a lattice control.
VerificationReport verification_probe(const ControlProblem& problem, const Feedback& w, const Feedback& u_star,
                                      const ValueTable& table, const ControlGrid& grid, double x0, double a0,
                                      std::size_t margin = 1);

// ---- continuity in the driver -------------------------------------------

struct ContinuityRow {
  std::size_t coarse = 0;
  std::size_t fine = 0;
  double value_coarse = 0.0;
  double value_fine = 0.0;
  double value_gap = 0.0;
  double metric = 0.0;  ///< rough_metric in p-variation
  double ratio = 0.0;
};

struct ContinuityScan {
  std::vector<ContinuityRow> rows;  ///< pairs with metric <= 1e-12 (equal drivers) are skipped
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  double head_max = 0.0;  ///< largest ratio over the coarser half of the pairs
  double tail_max = 0.0;  ///< largest ratio over the finer half
  bool stable = true;     ///< tail_max <= head_max: the constant does not grow under refinement
};

/// Pairs (n, 2n) of interpolations of `sample`, each resampled onto the sample's grid and
/// lifted canonically; v(0, x, a) on the control lattice for every driver.
ContinuityScan driver_continuity_scan(const ControlProblem& problem, const SampledPath& sample,
                                      const std::vector<std::size_t>& coarse_meshes, double p, const Vector& x,
                                      const Vector& a, const ControlGrid& grid);

// ---- desk instances -----------------------------------------------------

struct DeskInstance {
  std::string name;
  ControlProblem problem;
  Vector x0;
  Vector a0;
  ControlGrid grid;
};

/// "lq", "bilinear", "trader" (Brownian driver from `seed` on n_steps cells over [0, 1])
/// and "line" (eta_t = t). Unknown names raise ArgumentError.
DeskInstance desk_instance(const std::string& name, std::uint64_t seed = 1, std::size_t n_steps = 64);
std::vector<std::string> desk_instance_names();

void write_degeneracy_csv(std::ostream& out, const DegeneracyTable& table);
void write_continuity_csv(std::ostream& out, const ContinuityScan& scan);
/// Rows t,x,a,v.
void write_value_table_csv(std::ostream& out, const ValueTable& table);

}  // namespace roughkit
