#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace roughkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute tolerance for comparing times against grid points.
inline constexpr double kTimeTolerance = 1e-12;

/// Time-stamped samples of a d-dimensional path, interpolated piecewise-linearly.
///
/// Invariants: times start at 0 and strictly increase; every value has length dim().
/// Instances are immutable after construction.
class SampledPath {
 public:
  SampledPath(std::vector<double> times, std::vector<Vector> values);

  /// Samples on the uniform grid k * horizon / (values.size() - 1).
  static SampledPath uniform(double horizon, std::vector<Vector> values);
  static SampledPath scalar(std::vector<double> times, const std::vector<double>& values);

  std::size_t size() const noexcept { return times_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t segments() const noexcept { return times_.size() - 1; }
  double horizon() const noexcept { return times_.back(); }

  double time(std::size_t i) const { return times_.at(i); }
  const Vector& value(std::size_t i) const { return values_.at(i); }
  std::span<const double> times() const noexcept { return times_; }
  const std::vector<Vector>& values() const noexcept { return values_; }

  /// Interpolated value; throws DomainError outside [0, horizon].
  Vector at(double t) const;

  /// X_t - X_s. Requires 0 <= s <= t <= horizon.
  Vector increment(double s, double t) const;

  /// X_{t_j} - X_{t_i} between stored samples.
  Vector increment_between(std::size_t i, std::size_t j) const;

  /// Index i with t in [t_i, t_{i+1}] (the last segment for t == horizon).
  std::size_t segment_index(double t) const;

  /// Sample index whose time equals t within kTimeTolerance.
  std::optional<std::size_t> grid_index(double t) const;

  /// Sample index for a grid time, throwing ArgumentError when t is off-grid.
  std::size_t require_grid_index(double t) const;

 private:
  void check_time(double t) const;

  std::vector<double> times_;
  std::vector<Vector> values_;
  std::size_t dim_ = 0;
};

/// Strictly increasing sample indices from 0 to n-1.
struct Partition {
  std::vector<std::size_t> indices;

  static Partition validated(std::vector<std::size_t> indices, std::size_t n_samples);
};

struct PVariationResult {
  double value = 0.0;
  Partition partition;
};

/// Supremum over grid partitions of (sum dist(t_i, t_{i+1})^p)^(1/p) by dynamic
/// programming. dist(i, j) must be defined for i < j. Any exponent p > 0 is accepted.
/// If prefix is non-null it receives the p-variation of every prefix [t_0, t_j].
double pvar_dp(std::size_t n, const std::function<double(std::size_t, std::size_t)>& dist, double p,
               std::vector<double>* prefix = nullptr);

/// p-variation (Euclidean norm) of a piecewise-linear path. Exact for p >= 1.
double p_variation(const SampledPath& path, double p);

/// Same as p_variation, also returning a maximising partition.
PVariationResult p_variation_with_partition(const SampledPath& path, double p);

/// p-variation of each prefix [0, t_j], j = 0..n-1.
std::vector<double> running_p_variation(const SampledPath& path, double p);

/// max over sample pairs s < t of |X_{s,t}| / |t - s|^alpha; 0 for single-sample paths.
double holder_seminorm(const SampledPath& path, double alpha);

/// Euclidean length of the path on [0, t].
double path_length_1var(const SampledPath& path, double t);

/// Uniform grid with n_steps cells on [0, horizon].
std::vector<double> uniform_times(std::size_t n_steps, double horizon);

/// Values of path re-sampled at the given times (which must lie in the path domain).
SampledPath resample(const SampledPath& path, std::vector<double> times);

/// Sorted union of two time grids, merging points closer than kTimeTolerance.
std::vector<double> merge_grids(std::span<const double> a, std::span<const double> b);

/// Path frozen after the cut: values at t > cut equal the value at cut. The cut is added to the grid.
SampledPath frozen_after(const SampledPath& path, double cut);

}  // namespace roughkit
