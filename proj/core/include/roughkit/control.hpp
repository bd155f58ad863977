#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "roughkit/rde.hpp"

namespace roughkit {

using RunningCost = std::function<double(const Vector& x, const Vector& gamma, const Vector& u)>;
using TerminalCost = std::function<double(const Vector& x, const Vector& gamma)>;
using ControlDynamics = std::function<Vector(const Vector& gamma, const Vector& u)>;

/// J(t, x, a, u) = int f ds + int psi(X, gamma) dzeta + g(X_T, gamma_T) + eps int |u|^q ds with
/// dX = b ds + lam dzeta and dgamma = h(gamma, u) ds.
///
/// Empty callables mean: b = 0, lam = 0, f = 0, psi = 0, g = 0, h(a, u) = u.
/// psi returns a d-vector (a 1 x d one-form); its Jacobian is d x m.
struct ControlProblem {
  DriftFn b;
  DiffusionFn lam;
  DiffusionDerivFn dlam;
  RunningCost f;
  OneForm psi;
  TerminalCost g;
  ControlDynamics h;
  double eps = 0.0;
  double q_exp = 2.0;
  std::shared_ptr<const RoughPath> driver;

  double horizon() const { return driver->base().horizon(); }
  /// eps >= 0, q_exp >= 1, driver present; derivative callables checked by finite
  /// differences at (x, a) with relative tolerance 1e-4.
  void validate(const Vector& x, const Vector& a) const;
};

/// Control taking values[k] on [starts[k], starts[k+1]) (the last piece runs to the horizon).
struct PiecewiseControl {
  std::vector<double> starts;
  std::vector<Vector> values;

  const Vector& at(double t) const;
};

/// Piecewise-constant controls on n_knots equal pieces of [0, T], each coordinate taking
/// `levels` equally spaced values in [lo_i, hi_i].
struct ControlGrid {
  std::size_t n_knots = 1;
  Vector lo;
  Vector hi;
  std::size_t levels = 3;

  void validate(double horizon) const;
  double knot_time(std::size_t k, double horizon) const;
  std::vector<Vector> level_values() const;  ///< the per-piece lattice in lexicographic order
};

/// Cost accumulated on [t, r] together with the state reached at r.
struct Segment {
  double running = 0.0;
  Vector x_end;
  Vector gamma_end;
};

/// Running cost on [t, r] (f by trapezoid, psi by rough integral, eps |u|^q exactly); t, r on the driver grid.
Segment cost_segment(const ControlProblem& problem, double t, double r, const Vector& x, const Vector& a,
                     const PiecewiseControl& u);

/// Full cost J on [t, T] including g.
double cost(const ControlProblem& problem, double t, const Vector& x, const Vector& a, const PiecewiseControl& u);

struct ValueResult {
  double value = 0.0;
  PiecewiseControl control;
  std::size_t evaluations = 0;
  bool exhaustive = true;
};

/// Largest lattice searched exhaustively; larger ones use coordinate descent.
inline constexpr std::size_t kExhaustiveLimit = 100000;

/// Infimum of the cost over the lattice controls on the knots in [t, T]; t must be a knot.
/// Ties go to the lexicographically smallest control.
ValueResult value(const ControlProblem& problem, double t, const Vector& x, const Vector& a, const ControlGrid& grid);

struct DppReport {
  double direct = 0.0;  ///< v(t, x, a)
  double split = 0.0;   ///< inf over controls on [t, r] of running cost + v(r, X_r, gamma_r)
  double gap = 0.0;
  bool within = true;   ///< gap <= tolerance
};

/// Dynamic programming check at an intermediate knot r.
DppReport dpp_check(const ControlProblem& problem, double t, double r, const Vector& x, const Vector& a,
                    const ControlGrid& grid, double tolerance = 1e-12);

}  // namespace roughkit
