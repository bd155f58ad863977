#include "roughkit/rough_integration.hpp"

#include <cmath>

#include "roughkit/errors.hpp"

namespace roughkit {

namespace {

void require_compatible(const SampledPath& path, const RoughPath& rp) {
  if (path.size() != rp.size()) throw ArgumentError("controlled path and rough path have different grids");
  for (std::size_t i = 0; i < path.size(); ++i)
    if (std::abs(path.time(i) - rp.base().time(i)) > kTimeTolerance)
      throw ArgumentError("controlled path and rough path have different grids");
}

}  // namespace

ControlledPath::ControlledPath(SampledPath value, std::vector<Matrix> gubinelli,
                               std::shared_ptr<const RoughPath> reference)
    : value_(std::move(value)), gubinelli_(std::move(gubinelli)), reference_(std::move(reference)) {
  if (!reference_) throw ArgumentError("ControlledPath: null reference");
  require_compatible(value_, *reference_);
  if (gubinelli_.size() != value_.size()) throw ArgumentError("ControlledPath: one Gubinelli matrix per sample");
  auto n = static_cast<Eigen::Index>(value_.dim());
  auto d = static_cast<Eigen::Index>(reference_->dim());
  for (const auto& g : gubinelli_)
    if (g.rows() != n || g.cols() != d) throw ArgumentError("ControlledPath: Gubinelli derivative must be n x d");
}

Vector ControlledPath::remainder(std::size_t i, std::size_t j) const {
  return value_.increment_between(i, j) - gubinelli_.at(i) * reference_->increment_between(i, j);
}

SampledPath ControlledPath::gubinelli_path() const {
  std::vector<Vector> flat;
  flat.reserve(gubinelli_.size());
  for (const auto& g : gubinelli_) {
    Vector v(g.size());
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      for (Eigen::Index c = 0; c < g.cols(); ++c) v[r * g.cols() + c] = g(r, c);
    flat.push_back(std::move(v));
  }
  return SampledPath(std::vector<double>(value_.times().begin(), value_.times().end()), std::move(flat));
}

Vector compensated_term(const Vector& y, const Matrix& y_prime, const Vector& dz, const Matrix& dzz) {
  Eigen::Index d = dz.size();
  Eigen::Index m = y.size() / d;
  Vector out = Vector::Zero(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    double acc = 0.0;
    for (Eigen::Index b = 0; b < d; ++b) {
      acc += y[k * d + b] * dz[b];
      for (Eigen::Index a = 0; a < d; ++a) acc += y_prime(k * d + b, a) * dzz(a, b);
    }
    out[k] = acc;
  }
  return out;
}

Vector rough_integral(const ControlledPath& y, const RoughPath& rp, double s, double t) {
  require_compatible(y.value(), rp);
  std::size_t d = rp.dim();
  if (y.value().dim() % d != 0) throw ArgumentError("integrand dimension must be a multiple of the driver dimension");
  if (s > t) throw ArgumentError("rough_integral: s > t");
  std::size_t i0 = rp.base().require_grid_index(s);
  std::size_t i1 = rp.base().require_grid_index(t);
  Vector total = Vector::Zero(static_cast<Eigen::Index>(y.value().dim() / d));
  for (std::size_t i = i0; i < i1; ++i)
    total += compensated_term(y.value().value(i), y.gubinelli(i), rp.base().value(i + 1) - rp.base().value(i),
                              rp.segment_levels()[i]);
  return total;
}

SampledPath rough_integral_path(const ControlledPath& y, const RoughPath& rp) {
  require_compatible(y.value(), rp);
  std::size_t d = rp.dim();
  if (y.value().dim() % d != 0) throw ArgumentError("integrand dimension must be a multiple of the driver dimension");
  std::vector<Vector> running;
  running.reserve(rp.size());
  running.push_back(Vector::Zero(static_cast<Eigen::Index>(y.value().dim() / d)));
  for (std::size_t i = 0; i + 1 < rp.size(); ++i)
    running.push_back(running.back() + compensated_term(y.value().value(i), y.gubinelli(i),
                                                        rp.base().value(i + 1) - rp.base().value(i),
                                                        rp.segment_levels()[i]));
  return SampledPath(std::vector<double>(rp.base().times().begin(), rp.base().times().end()), std::move(running));
}

double remainder_pvar(const ControlledPath& y, double exponent, std::size_t from, std::size_t to) {
  to = std::min(to, y.value().size() - 1);
  if (from >= to) return 0.0;
  return pvar_dp(to - from + 1, [&](std::size_t i, std::size_t j) { return y.remainder(from + i, from + j).norm(); },
                 exponent);
}

double matrix_pvar(const std::vector<Matrix>& path, double p, std::size_t from, std::size_t to) {
  to = std::min(to, path.size() - 1);
  if (from >= to) return 0.0;
  return pvar_dp(to - from + 1,
                 [&](std::size_t i, std::size_t j) { return (path[from + j] - path[from + i]).cwiseAbs().maxCoeff(); },
                 p);
}

RemainderReport remainder_estimate_check(const ControlledPath& y, const RoughPath& rp, double p, double s, double t) {
  if (!(p >= 2.0 && p < 3.0)) throw ArgumentError("remainder estimate requires p in [2, 3)");
  std::size_t i0 = rp.base().require_grid_index(s);
  std::size_t i1 = rp.base().require_grid_index(t);
  if (i0 > i1) throw ArgumentError("remainder_estimate_check: s > t");
  RemainderReport rep;
  Vector integral = rough_integral(y, rp, s, t);
  Vector local =
      compensated_term(y.value().value(i0), y.gubinelli(i0), rp.increment_between(i0, i1), rp.second_level_between(i0, i1));
  rep.lhs = (integral - local).norm();
  if (i0 == i1) return rep;
  std::size_t n = i1 - i0 + 1;
  double r_norm = remainder_pvar(y, p / 2.0, i0, i1);
  double z_norm = pvar_dp(n, [&](std::size_t a, std::size_t b) { return rp.increment_between(i0 + a, i0 + b).norm(); }, p);
  double yp_norm = matrix_pvar(y.gubinelli(), p, i0, i1);
  double zz_norm = pvar_dp(
      n, [&](std::size_t a, std::size_t b) { return rp.second_level_between(i0 + a, i0 + b).cwiseAbs().maxCoeff(); },
      p / 2.0);
  rep.rhs_factor = r_norm * z_norm + yp_norm * zz_norm;
  rep.finite = std::isfinite(rep.lhs) && std::isfinite(rep.rhs_factor);
  rep.constant = rep.rhs_factor > 0.0 ? rep.lhs / rep.rhs_factor : 0.0;
  return rep;
}

SampledPath young_integral(const SampledPath& y, const SampledPath& x, double p, double q) {
  if (!(p >= 1.0 && q >= 1.0)) throw ArgumentError("young_integral: exponents must be >= 1");
  if (!(1.0 / p + 1.0 / q > 1.0)) throw ArgumentError("young_integral: need 1/p + 1/q > 1");
  if (y.size() != x.size()) throw ArgumentError("young_integral: grids differ");
  for (std::size_t i = 0; i < y.size(); ++i)
    if (std::abs(y.time(i) - x.time(i)) > kTimeTolerance) throw ArgumentError("young_integral: grids differ");
  auto d = static_cast<Eigen::Index>(x.dim());
  if (static_cast<Eigen::Index>(y.dim()) % d != 0)
    throw ArgumentError("young_integral: integrand dimension must be a multiple of the driver dimension");
  Eigen::Index m = static_cast<Eigen::Index>(y.dim()) / d;
  std::vector<Vector> running;
  running.reserve(y.size());
  running.push_back(Vector::Zero(m));
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    Vector dx = x.value(i + 1) - x.value(i);
    Vector next = running.back();
    for (Eigen::Index k = 0; k < m; ++k)
      for (Eigen::Index b = 0; b < d; ++b) next[k] += y.value(i)[k * d + b] * dx[b];
    running.push_back(std::move(next));
  }
  return SampledPath(std::vector<double>(y.times().begin(), y.times().end()), std::move(running));
}

}  // namespace roughkit
