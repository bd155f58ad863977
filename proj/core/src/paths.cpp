#include "roughkit/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughkit/errors.hpp"

namespace roughkit {

SampledPath::SampledPath(std::vector<double> times, std::vector<Vector> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty()) throw ArgumentError("SampledPath: at least one sample required");
  if (times_.size() != values_.size())
    throw ArgumentError("SampledPath: " + std::to_string(times_.size()) + " times but " +
                        std::to_string(values_.size()) + " values");
  if (std::abs(times_.front()) > kTimeTolerance) throw ArgumentError("SampledPath: first time must be 0");
  times_.front() = 0.0;
  dim_ = static_cast<std::size_t>(values_.front().size());
  if (dim_ == 0) throw ArgumentError("SampledPath: dimension must be positive");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (static_cast<std::size_t>(values_[i].size()) != dim_)
      throw ArgumentError("SampledPath: sample " + std::to_string(i) + " has wrong dimension");
    if (!std::isfinite(times_[i])) throw ArgumentError("SampledPath: non-finite time");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw ArgumentError("SampledPath: times must be strictly increasing (index " + std::to_string(i) + ")");
  }
}

SampledPath SampledPath::uniform(double horizon, std::vector<Vector> values) {
  if (values.empty()) throw ArgumentError("SampledPath::uniform: no values");
  std::vector<double> times =
      values.size() == 1 ? std::vector<double>{0.0} : uniform_times(values.size() - 1, horizon);
  return SampledPath(std::move(times), std::move(values));
}

SampledPath SampledPath::scalar(std::vector<double> times, const std::vector<double>& values) {
  std::vector<Vector> v;
  v.reserve(values.size());
  for (double x : values) v.push_back(Vector::Constant(1, x));
  return SampledPath(std::move(times), std::move(v));
}

void SampledPath::check_time(double t) const {
  if (!(t >= -kTimeTolerance && t <= horizon() + kTimeTolerance))
    throw DomainError("time " + std::to_string(t) + " outside path domain [0, " + std::to_string(horizon()) + "]");
}

std::size_t SampledPath::segment_index(double t) const {
  check_time(t);
  if (size() == 1) return 0;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t idx = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(idx, segments() - 1);
}

Vector SampledPath::at(double t) const {
  check_time(t);
  if (size() == 1) return values_.front();
  std::size_t i = segment_index(t);
  double t0 = times_[i];
  double t1 = times_[i + 1];
  double clamped = std::clamp(t, t0, t1);
  if (clamped == t0) return values_[i];
  if (clamped == t1) return values_[i + 1];
  double w = (clamped - t0) / (t1 - t0);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

Vector SampledPath::increment(double s, double t) const {
  check_time(s);
  check_time(t);
  if (s > t) throw DomainError("increment: s > t");
  if (s == t) return Vector::Zero(static_cast<Eigen::Index>(dim_));
  return at(t) - at(s);
}

Vector SampledPath::increment_between(std::size_t i, std::size_t j) const {
  return values_.at(j) - values_.at(i);
}

std::optional<std::size_t> SampledPath::grid_index(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t - kTimeTolerance);
  if (it != times_.end() && std::abs(*it - t) <= kTimeTolerance)
    return static_cast<std::size_t>(it - times_.begin());
  return std::nullopt;
}

std::size_t SampledPath::require_grid_index(double t) const {
  auto idx = grid_index(t);
  if (!idx) throw ArgumentError("time " + std::to_string(t) + " is not a grid point");
  return *idx;
}

Partition Partition::validated(std::vector<std::size_t> indices, std::size_t n_samples) {
  if (indices.empty() || indices.front() != 0 || indices.back() + 1 != n_samples)
    throw ArgumentError("Partition must start at 0 and end at the last sample");
  for (std::size_t k = 1; k < indices.size(); ++k)
    if (indices[k] <= indices[k - 1]) throw ArgumentError("Partition indices must strictly increase");
  return Partition{std::move(indices)};
}

namespace {

// Forward DP over sample indices. best[j] is the largest sum of dist^p over partitions
// of [t_0, t_j]; rounding is monotone so the maximiser is exact in floating point too.
double pvar_dp_impl(std::size_t n, const std::function<double(std::size_t, std::size_t)>& dist, double p,
                    std::vector<double>* prefix, std::vector<std::size_t>* argmax) {
  if (!(p > 0.0)) throw ArgumentError("p-variation exponent must be positive");
  if (n == 0) throw ArgumentError("p-variation of an empty path");
  std::vector<double> best(n, 0.0);
  std::vector<std::size_t> from(n, 0);
  for (std::size_t j = 1; j < n; ++j) {
    double top = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < j; ++i) {
      double candidate = best[i] + std::pow(dist(i, j), p);
      if (candidate > top) {
        top = candidate;
        arg = i;
      }
    }
    best[j] = top;
    from[j] = arg;
  }
  if (prefix) {
    prefix->resize(n);
    for (std::size_t j = 0; j < n; ++j) (*prefix)[j] = std::pow(best[j], 1.0 / p);
  }
  if (argmax) {
    argmax->clear();
    std::size_t j = n - 1;
    argmax->push_back(j);
    while (j != 0) {
      j = from[j];
      argmax->push_back(j);
    }
    std::reverse(argmax->begin(), argmax->end());
  }
  return std::pow(best[n - 1], 1.0 / p);
}

std::function<double(std::size_t, std::size_t)> euclidean_dist(const SampledPath& path) {
  return [&path](std::size_t i, std::size_t j) { return (path.value(j) - path.value(i)).norm(); };
}

void require_p_at_least_one(double p) {
  if (!(p >= 1.0)) throw ArgumentError("p-variation requires p >= 1, got " + std::to_string(p));
}

}  // namespace

double pvar_dp(std::size_t n, const std::function<double(std::size_t, std::size_t)>& dist, double p,
               std::vector<double>* prefix) {
  return pvar_dp_impl(n, dist, p, prefix, nullptr);
}

double p_variation(const SampledPath& path, double p) {
  require_p_at_least_one(p);
  return pvar_dp_impl(path.size(), euclidean_dist(path), p, nullptr, nullptr);
}

PVariationResult p_variation_with_partition(const SampledPath& path, double p) {
  require_p_at_least_one(p);
  PVariationResult out;
  out.value = pvar_dp_impl(path.size(), euclidean_dist(path), p, nullptr, &out.partition.indices);
  return out;
}

std::vector<double> running_p_variation(const SampledPath& path, double p) {
  require_p_at_least_one(p);
  std::vector<double> prefix;
  pvar_dp_impl(path.size(), euclidean_dist(path), p, &prefix, nullptr);
  return prefix;
}

double holder_seminorm(const SampledPath& path, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("Hölder exponent must lie in (0, 1]");
  double best = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i)
    for (std::size_t j = i + 1; j < path.size(); ++j) {
      double r = (path.value(j) - path.value(i)).norm() / std::pow(path.time(j) - path.time(i), alpha);
      best = std::max(best, r);
    }
  return best;
}

double path_length_1var(const SampledPath& path, double t) {
  if (path.size() == 1) {
    path.at(t);
    return 0.0;
  }
  std::size_t seg = path.segment_index(t);
  double length = 0.0;
  for (std::size_t i = 0; i < seg; ++i) length += (path.value(i + 1) - path.value(i)).norm();
  double frac = (std::clamp(t, path.time(seg), path.time(seg + 1)) - path.time(seg)) /
                (path.time(seg + 1) - path.time(seg));
  return length + frac * (path.value(seg + 1) - path.value(seg)).norm();
}

std::vector<double> uniform_times(std::size_t n_steps, double horizon) {
  if (n_steps == 0) throw ArgumentError("uniform grid needs at least one step");
  if (!(horizon > 0.0)) throw ArgumentError("horizon must be positive");
  std::vector<double> t(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) t[k] = horizon * static_cast<double>(k) / static_cast<double>(n_steps);
  t.back() = horizon;
  return t;
}

SampledPath resample(const SampledPath& path, std::vector<double> times) {
  std::vector<Vector> values;
  values.reserve(times.size());
  for (double t : times) values.push_back(path.at(t));
  return SampledPath(std::move(times), std::move(values));
}

std::vector<double> merge_grids(std::span<const double> a, std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double t : all)
    if (out.empty() || t - out.back() > kTimeTolerance) out.push_back(t);
  return out;
}

SampledPath frozen_after(const SampledPath& path, double cut) {
  Vector frozen = path.at(cut);
  std::vector<double> cut_grid{cut};
  std::vector<double> times = merge_grids(path.times(), cut_grid);
  std::vector<Vector> values;
  values.reserve(times.size());
  for (double t : times) values.push_back(t <= cut + kTimeTolerance ? path.at(std::min(t, path.horizon())) : frozen);
  return SampledPath(std::move(times), std::move(values));
}

}  // namespace roughkit
