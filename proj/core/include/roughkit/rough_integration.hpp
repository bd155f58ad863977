#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "roughkit/rough_path.hpp"

namespace roughkit {

/// Path Y with Gubinelli derivative Y' relative to a reference rough path.
///
/// Y has dimension n and Y'_i is an n x d matrix, one per sample. When Y is
/// integrated against a d-dimensional driver it is read as an (n/d) x d matrix
/// stored row-major, so entry (k, b) sits at index k * d + b.
class ControlledPath {
 public:
  ControlledPath(SampledPath value, std::vector<Matrix> gubinelli, std::shared_ptr<const RoughPath> reference);

  const SampledPath& value() const noexcept { return value_; }
  const Matrix& gubinelli(std::size_t i) const { return gubinelli_.at(i); }
  const std::vector<Matrix>& gubinelli() const noexcept { return gubinelli_; }
  const RoughPath& reference() const noexcept { return *reference_; }
  std::shared_ptr<const RoughPath> reference_ptr() const noexcept { return reference_; }

  /// R^Y_{t_i, t_j} = Y_{t_i, t_j} - Y'_{t_i} z_{t_i, t_j}.
  Vector remainder(std::size_t i, std::size_t j) const;

  /// Y' viewed as a path of flattened matrices (row-major).
  SampledPath gubinelli_path() const;

 private:
  SampledPath value_;
  std::vector<Matrix> gubinelli_;
  std::shared_ptr<const RoughPath> reference_;
};

/// Compensated sum of Y z + Y' Z over every grid cell in [s, t].
Vector rough_integral(const ControlledPath& y, const RoughPath& rp, double s, double t);

/// Running rough integral t -> int_0^t Y dz on the grid of rp.
SampledPath rough_integral_path(const ControlledPath& y, const RoughPath& rp);

/// Cell contribution Y_i z_{i,i+1} + Y'_i Z_{i,i+1} (m = n / d entries).
Vector compensated_term(const Vector& y, const Matrix& y_prime, const Vector& dz, const Matrix& dzz);

struct RemainderReport {
  double lhs = 0.0;          ///< |int_s^t Y dz - Y_s z_{s,t} - Y'_s Z_{s,t}|
  double rhs_factor = 0.0;   ///< |R^Y|_{p/2} |z|_p + |Y'|_p |Z|_{p/2} on [s, t]
  double constant = 0.0;     ///< lhs / rhs_factor (0 when both vanish)
  bool finite = true;
};

RemainderReport remainder_estimate_check(const ControlledPath& y, const RoughPath& rp, double p, double s, double t);

/// p-variation of the remainder R^Y over the grid (two-parameter, Euclidean norm).
double remainder_pvar(const ControlledPath& y, double exponent, std::size_t from = 0, std::size_t to = SIZE_MAX);

/// Left-point Young integral of Y (n = m * d, row-major) against X. Requires 1/p + 1/q > 1.
SampledPath young_integral(const SampledPath& y, const SampledPath& x, double p, double q);

/// p-variation of a path of matrices using the max-entry norm.
double matrix_pvar(const std::vector<Matrix>& path, double p, std::size_t from = 0, std::size_t to = SIZE_MAX);

}  // namespace roughkit
