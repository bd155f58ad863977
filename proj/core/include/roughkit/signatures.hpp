#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "roughkit/paths.hpp"
#include "roughkit/tensor_algebra.hpp"

namespace roughkit {

/// Letter of the time coordinate in time-augmented paths.
inline constexpr int kTimeLetter = 1;

struct Signature {
  TruncatedTensor tensor;
  double s = 0.0;
  double t = 0.0;
};

/// (t, X_t): the time coordinate comes first, so it is letter 1.
SampledPath time_augment(const SampledPath& path);

/// Level-N signature over [s, t] (any times in the domain); segments are joined with
/// tensor_mul in time order.
Signature signature(const SampledPath& path, std::size_t level, double s, double t);
Signature signature(const SampledPath& path, std::size_t level);

/// Signatures over [0, t_i] for every sample i, built by one left-to-right sweep.
std::vector<TruncatedTensor> running_signature(const SampledPath& path, std::size_t level);

/// Full-interval signatures of many paths, computed in parallel.
std::vector<Signature> signature_batch(const std::vector<SampledPath>& paths, std::size_t level);

/// Stopped path: time-augmented samples and a cut. After the cut the spatial
/// coordinates are frozen while the time coordinate continues.
struct StoppedRoughPath {
  SampledPath underlying;
  double cut = 0.0;
};

/// The frozen extension (s, X_{s ^ cut}) sampled on the given times.
SampledPath stopped_extension(const StoppedRoughPath& sp, const std::vector<double>& times);

/// p-variation distance of the frozen extensions plus |t - s|. Level 1 only for
/// p < 2, rough_metric of canonical lifts for 2 <= p < 3; p >= 3 is rejected.
double stopped_metric(const StoppedRoughPath& a, const StoppedRoughPath& b, double p);

struct IdentityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
};

/// int_0^t <l, X_{0,s}>^2 ds by the trapezoid rule on the path grid refined to at
/// least fine_steps cells, against <(l sh l) 1, X_{0,t}>. path must be time-augmented.
IdentityReport quadratic_shuffle_identity_check(const LinearFunctional& l, const SampledPath& path, double t,
                                                std::size_t level, std::size_t fine_steps = 4096);

/// Words of l longer than max_len removed.
LinearFunctional truncate_words(const LinearFunctional& l, std::size_t max_len);

struct DerivativeReport {
  double max_discrepancy = 0.0;
  double max_rhs = 0.0;
  std::size_t points = 0;
};

/// Central difference (step h) of t -> <exp_sh(l1), X^{<=N}_{0,t}> at every segment
/// midpoint, against sum_i <l_i w_i, X> <exp_sh(l1), X^{<= N - deg w_i - 1}>.
DerivativeReport exp_shuffle_derivative_check(const LinearFunctional& l, const SampledPath& path, std::size_t level,
                                              double h = 1e-5);

struct TruncationReport {
  double error = 0.0;     ///< |exp(<l, g>) - <exp_sh(l), pi_{<=N} g>|
  double bound = 0.0;     ///< 4 exp(<l, 1>) (|l| |pi_{<=deg l} g|)^m / m!, m = floor(N / deg l) + 1
  bool hypothesis = false;///< N > 2 |l| deg(l) |pi_{deg l} g|
  bool holds = true;      ///< error <= bound (only meaningful when the hypothesis holds)
};

/// g must be truncated at a level >= max(N, deg l).
TruncationReport exp_shuffle_truncation_error(const LinearFunctional& l, const TruncatedTensor& g, std::size_t level);

/// First grid time where the running level-1 p-variation reaches k, else the horizon.
double pvar_threshold_time(const SampledPath& path, double k, double p);

/// `{"version": "sig-v1", "dim", "level", "s", "t", "levels"}`; level n is a depth-n nested array.
std::string signature_to_json(const Signature& sig);
Signature signature_from_json(const std::string& text);

}  // namespace roughkit
