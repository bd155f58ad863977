#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "roughkit/rough_integration.hpp"

namespace roughkit {

using DriftFn = std::function<Vector(const Vector& x, const Vector& gamma)>;
using DiffusionFn = std::function<Matrix(const Vector& x, const Vector& gamma)>;
/// Entry k is the m x d matrix d lambda / d x_k.
using DiffusionDerivFn = std::function<std::vector<Matrix>(const Vector& x, const Vector& gamma)>;

struct RdeCoefficients {
  DriftFn b;
  DiffusionFn lam;
  DiffusionDerivFn dlam;
};

/// psi(x, gamma) returning n = k * d values (row-major k x d one-form) and its
/// x-Jacobian (n x m).
struct OneForm {
  std::function<Vector(const Vector& x, const Vector& gamma)> value;
  std::function<Matrix(const Vector& x, const Vector& gamma)> jacobian;
};

/// Throws ArgumentError when dlam disagrees with central differences of lam at (x, gamma)
/// beyond rel_tol (relative to max(1, |dlam|)).
void validate_diffusion_derivative(const RdeCoefficients& coeffs, const Vector& x, const Vector& gamma,
                                   double rel_tol = 1e-4);
void validate_one_form_jacobian(const OneForm& psi, const Vector& x, const Vector& gamma, double rel_tol = 1e-4);

/// Davie step X_{i+1} = X_i + b dt + lam dz + (dlam . lam) Z on the grid of rp.
/// gamma must share that grid. The Gubinelli derivative is lam(X, gamma).
ControlledPath solve_rde(const RdeCoefficients& coeffs, const SampledPath& gamma,
                         std::shared_ptr<const RoughPath> rp, const Vector& x0);

/// psi(X, gamma) as a controlled path with derivative d_x psi . X'.
ControlledPath compose(const OneForm& psi, const ControlledPath& x, const SampledPath& gamma);

struct RegularityReport {
  double x_pvar = 0.0;         ///< |X|_p
  double gamma_pvar = 0.0;     ///< |gamma|_{p/2}
  double rx_pvar = 0.0;        ///< |R^X|_{p/2}
  double psi_prime_pvar = 0.0; ///< |psi(X, gamma)'|_p
  double rpsi_pvar = 0.0;      ///< |R^psi|_{p/2}
  /// Ratios of left to right sides of the four regularity estimates.
  double ratio[4] = {0.0, 0.0, 0.0, 0.0};
  bool finite = true;
};

RegularityReport regularity_report(const ControlledPath& x, const SampledPath& gamma, const OneForm& psi, double p);

struct StabilityReport {
  double lhs = 0.0;   ///< |int psi(X, gamma) dz - int psi(Y, theta) dh|_p
  double rhs = 0.0;   ///< |x - y| + |gamma - theta|_inf + |gamma - theta|_p + rho_p(z, h)
  double ratio = 0.0; ///< lhs / rhs, 0 when rhs vanishes
};

StabilityReport driver_stability_probe(const RdeCoefficients& coeffs, const OneForm& psi, const Vector& x0,
                                       const Vector& y0, const SampledPath& gamma, const SampledPath& theta,
                                       std::shared_ptr<const RoughPath> rp1, std::shared_ptr<const RoughPath> rp2,
                                       double p);

}  // namespace roughkit
