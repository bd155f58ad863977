#include "roughkit/rde.hpp"

#include <cmath>

#include "roughkit/errors.hpp"

namespace roughkit {

namespace {

double fd_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

void require_same_grid(const SampledPath& a, const SampledPath& b, const char* what) {
  if (a.size() != b.size()) throw ArgumentError(std::string(what) + ": grids differ");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a.time(i) - b.time(i)) > kTimeTolerance) throw ArgumentError(std::string(what) + ": grids differ");
}

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

void validate_diffusion_derivative(const RdeCoefficients& coeffs, const Vector& x, const Vector& gamma,
                                   double rel_tol) {
  if (!coeffs.lam || !coeffs.dlam) throw ArgumentError("lam and its derivative dlam are both required");
  std::vector<Matrix> analytic = coeffs.dlam(x, gamma);
  if (analytic.size() != static_cast<std::size_t>(x.size()))
    throw ArgumentError("dlam must return one matrix per state coordinate");
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    double h = fd_step(x[k]);
    Vector up = x;
    Vector down = x;
    up[k] += h;
    down[k] -= h;
    Matrix fd = (coeffs.lam(up, gamma) - coeffs.lam(down, gamma)) / (2.0 * h);
    const Matrix& an = analytic[static_cast<std::size_t>(k)];
    if (an.rows() != fd.rows() || an.cols() != fd.cols()) throw ArgumentError("dlam has the wrong shape");
    double scale = std::max(1.0, an.cwiseAbs().maxCoeff());
    if ((fd - an).cwiseAbs().maxCoeff() > rel_tol * scale)
      throw ArgumentError("dlam disagrees with finite differences of lam in coordinate " + std::to_string(k));
  }
}

void validate_one_form_jacobian(const OneForm& psi, const Vector& x, const Vector& gamma, double rel_tol) {
  Matrix an = psi.jacobian(x, gamma);
  Vector base = psi.value(x, gamma);
  if (an.rows() != base.size() || an.cols() != x.size()) throw ArgumentError("psi Jacobian has the wrong shape");
  double scale = std::max(1.0, an.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    double h = fd_step(x[k]);
    Vector up = x;
    Vector down = x;
    up[k] += h;
    down[k] -= h;
    Vector fd = (psi.value(up, gamma) - psi.value(down, gamma)) / (2.0 * h);
    if ((fd - an.col(k)).cwiseAbs().maxCoeff() > rel_tol * scale)
      throw ArgumentError("psi Jacobian disagrees with finite differences in coordinate " + std::to_string(k));
  }
}

ControlledPath solve_rde(const RdeCoefficients& coeffs, const SampledPath& gamma,
                         std::shared_ptr<const RoughPath> rp, const Vector& x0) {
  if (!rp) throw ArgumentError("solve_rde: null rough path");
  require_same_grid(gamma, rp->base(), "solve_rde");
  validate_diffusion_derivative(coeffs, x0, gamma.value(0));
  auto m = x0.size();
  auto d = static_cast<Eigen::Index>(rp->dim());
  std::size_t n = rp->size();
  std::vector<Vector> xs;
  std::vector<Matrix> primes;
  xs.reserve(n);
  primes.reserve(n);
  xs.push_back(x0);
  for (std::size_t i = 0;; ++i) {
    const Vector& x = xs.back();
    const Vector& g = gamma.value(i);
    Matrix lam = coeffs.lam(x, g);
    if (lam.rows() != m || lam.cols() != d) throw ArgumentError("lam must return an m x d matrix");
    primes.push_back(lam);
    if (i + 1 == n) break;
    double dt = rp->base().time(i + 1) - rp->base().time(i);
    Vector dz = rp->base().value(i + 1) - rp->base().value(i);
    const Matrix& dzz = rp->segment_levels()[i];
    Vector next = x + lam * dz;
    if (coeffs.b) next += coeffs.b(x, g) * dt;
    {
      std::vector<Matrix> dl = coeffs.dlam(x, g);
      // (dlam . lam)_{j,(a,b)} = sum_k d_k lam_{j b} lam_{k a}
      for (Eigen::Index j = 0; j < m; ++j) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
          const Matrix& dk = dl[static_cast<std::size_t>(k)];
          for (Eigen::Index a = 0; a < d; ++a) {
            double lka = lam(k, a);
            if (lka == 0.0) continue;
            for (Eigen::Index b = 0; b < d; ++b) acc += dk(j, b) * lka * dzz(a, b);
          }
        }
        next[j] += acc;
      }
    }
    if (!all_finite(next)) throw DivergenceError("solve_rde: non-finite state", i + 1);
    xs.push_back(std::move(next));
  }
  SampledPath value(std::vector<double>(rp->base().times().begin(), rp->base().times().end()), std::move(xs));
  return ControlledPath(std::move(value), std::move(primes), std::move(rp));
}

ControlledPath compose(const OneForm& psi, const ControlledPath& x, const SampledPath& gamma) {
  require_same_grid(gamma, x.value(), "compose");
  std::vector<Vector> values;
  std::vector<Matrix> primes;
  values.reserve(x.value().size());
  primes.reserve(x.value().size());
  for (std::size_t i = 0; i < x.value().size(); ++i) {
    values.push_back(psi.value(x.value().value(i), gamma.value(i)));
    primes.push_back(psi.jacobian(x.value().value(i), gamma.value(i)) * x.gubinelli(i));
  }
  SampledPath v(std::vector<double>(x.value().times().begin(), x.value().times().end()), std::move(values));
  return ControlledPath(std::move(v), std::move(primes), x.reference_ptr());
}

RegularityReport regularity_report(const ControlledPath& x, const SampledPath& gamma, const OneForm& psi, double p) {
  if (!(p >= 2.0 && p < 3.0)) throw ArgumentError("regularity_report: p must lie in [2, 3)");
  ControlledPath composed = compose(psi, x, gamma);
  RegularityReport rep;
  rep.x_pvar = p_variation(x.value(), p);
  rep.gamma_pvar = gamma.size() > 1 ? pvar_dp(gamma.size(), [&](std::size_t i, std::size_t j) {
    return (gamma.value(j) - gamma.value(i)).norm();
  }, p / 2.0) : 0.0;
  rep.rx_pvar = remainder_pvar(x, p / 2.0);
  rep.psi_prime_pvar = matrix_pvar(composed.gubinelli(), p);
  rep.rpsi_pvar = remainder_pvar(composed, p / 2.0);
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : (num > 0.0 ? INFINITY : 0.0); };
  rep.ratio[0] = ratio(rep.psi_prime_pvar, rep.x_pvar + rep.gamma_pvar);
  rep.ratio[1] = ratio(rep.rpsi_pvar, rep.x_pvar * rep.x_pvar + rep.rx_pvar + rep.gamma_pvar);
  rep.ratio[2] = ratio(rep.x_pvar, 1.0 + std::pow(rep.gamma_pvar, 1.0 + p));
  rep.ratio[3] = ratio(rep.rx_pvar, 1.0 + std::pow(rep.gamma_pvar, 2.0 + p));
  for (double r : rep.ratio) rep.finite = rep.finite && std::isfinite(r);
  return rep;
}

StabilityReport driver_stability_probe(const RdeCoefficients& coeffs, const OneForm& psi, const Vector& x0,
                                       const Vector& y0, const SampledPath& gamma, const SampledPath& theta,
                                       std::shared_ptr<const RoughPath> rp1, std::shared_ptr<const RoughPath> rp2,
                                       double p) {
  require_same_grid(rp1->base(), rp2->base(), "driver_stability_probe");
  ControlledPath xs = solve_rde(coeffs, gamma, rp1, x0);
  ControlledPath ys = solve_rde(coeffs, theta, rp2, y0);
  SampledPath ix = rough_integral_path(compose(psi, xs, gamma), *rp1);
  SampledPath iy = rough_integral_path(compose(psi, ys, theta), *rp2);
  StabilityReport rep;
  std::size_t n = ix.size();
  rep.lhs = n > 1 ? pvar_dp(n, [&](std::size_t i, std::size_t j) {
    return ((ix.value(j) - ix.value(i)) - (iy.value(j) - iy.value(i))).norm();
  }, p) : 0.0;
  double sup_gap = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) sup_gap = std::max(sup_gap, (gamma.value(i) - theta.value(i)).norm());
  double var_gap = n > 1 ? pvar_dp(n, [&](std::size_t i, std::size_t j) {
    return ((gamma.value(j) - gamma.value(i)) - (theta.value(j) - theta.value(i))).norm();
  }, p) : 0.0;
  rep.rhs = (x0 - y0).norm() + sup_gap + var_gap + rough_metric(*rp1, *rp2, p);
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

}  // namespace roughkit
