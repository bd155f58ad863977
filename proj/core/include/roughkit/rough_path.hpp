#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roughkit/paths.hpp"

namespace roughkit {

/// Level-2 rough path over a sampled base path. Second-level data is stored per
/// segment; values on longer grid intervals are assembled with Chen's relation.
class RoughPath {
 public:
  /// segment_levels[i] is the d x d second level over [t_i, t_{i+1}].
  RoughPath(SampledPath base, std::vector<Matrix> segment_levels);

  const SampledPath& base() const noexcept { return base_; }
  std::size_t dim() const noexcept { return base_.dim(); }
  std::size_t size() const noexcept { return base_.size(); }
  const std::vector<Matrix>& segment_levels() const noexcept { return segments_; }

  Vector increment_between(std::size_t i, std::size_t j) const { return base_.increment_between(i, j); }
  /// Second level over [t_i, t_j], i <= j, folded segment by segment.
  Matrix second_level_between(std::size_t i, std::size_t j) const;

  /// Grid-time versions; off-grid times raise ArgumentError.
  Vector increment(double s, double t) const;
  Matrix second_level(double s, double t) const;

  /// Largest deviation |Sym(Z_{s,t}) - z_{s,t} (x) z_{s,t} / 2| over all grid pairs.
  double symmetry_defect() const;
  bool is_geometric(double tol = 1e-10) const { return symmetry_defect() <= tol; }

  /// Largest entrywise Chen defect over all grid triples i <= k <= j.
  double chen_defect() const;

  /// Columns of second levels Z_{i,j} for fixed j and every i < j (out[i]), by a backward fold.
  void second_level_column(std::size_t j, std::vector<Matrix>& out) const;

 private:
  SampledPath base_;
  std::vector<Matrix> segments_;
};

/// Segment-wise Z = dz (x) dz / 2, the exact lift of a piecewise-linear path.
RoughPath canonical_lift(const SampledPath& path);

/// Z_{s,t} from Z_{s,r}, Z_{r,t} and the first-level increments. Requires s <= r <= t on the grid.
Matrix chen_extend(const RoughPath& rp, double s, double r, double t);

enum class MetricMode { pvar, holder };

/// |z - h| + |Z - H| with the p-variation (or 1/p-Holder) norm on level 1 and the
/// p/2-variation (2/p-Holder) norm with max-entry matrix norm on level 2.
double rough_metric(const RoughPath& a, const RoughPath& b, double p, MetricMode mode = MetricMode::pvar);

/// Level-2 p/2-variation of a single rough path (max-entry norm).
double second_level_pvar(const RoughPath& rp, double p);

/// Gaussian increments of variance T/n per coordinate, canonically lifted.
RoughPath brownian_rough_path(std::uint64_t seed, std::size_t n_steps, double horizon, std::size_t dim);

/// Same as brownian_rough_path but returning only the base path.
SampledPath brownian_path(std::uint64_t seed, std::size_t n_steps, double horizon, std::size_t dim);

/// JSON `{"version": "rp-v1", "dim", "base_csv", "second_level"}` with one
/// row-major array per segment.
std::string rough_path_to_json(const RoughPath& rp);
RoughPath rough_path_from_json(const std::string& text);

}  // namespace roughkit
