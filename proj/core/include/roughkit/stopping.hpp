#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "roughkit/paths.hpp"
#include "roughkit/tensor_algebra.hpp"

namespace roughkit {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// Linear signature functional over the alphabet {1 = time, 2..d+1 = space}.
struct StoppingPolicy {
  LinearFunctional functional;
  std::size_t level = 4;

  /// Throws ArgumentError when deg(functional) > level.
  void validate() const;
};

/// Only Expo(1) randomisation is provided.
struct RandomizerConfig {
  enum class Law { exponential };
  Law law = Law::exponential;
  std::uint64_t seed = 0;
};

enum class PayoffKind { american_call, american_put, custom };

/// Y_t for a price path. Calls and puts read the first spatial coordinate and are
/// discounted: exp(-r t) (S_t - K)^+ or exp(-r t) (K - S_t)^+. A custom evaluator
/// receives the samples up to and including t.
struct PayoffSpec {
  PayoffKind kind = PayoffKind::american_put;
  double strike = 20.0;
  double rate = 0.0;
  std::function<double(double t, std::span<const Vector> prefix)> custom;
};

/// Payoff process Y_{t_i} on the grid of a (non-augmented) path.
std::vector<double> payoff_process(const PayoffSpec& payoff, const SampledPath& path);

/// theta_i = <l, X^_{0,t_i}> along the time-augmented path.
std::vector<double> policy_features(const StoppingPolicy& policy, const SampledPath& path);

/// Running trapezoid integral of theta^2 on the grid.
std::vector<double> intensity_integral(const std::vector<double>& theta, std::span<const double> times);

/// First t with int_0^t theta^2 >= z (running integral interpolated linearly inside
/// a cell); kNever when the total integral stays below z. Requires z > 0.
double randomized_stop_time(const StoppingPolicy& policy, const SampledPath& path, double z);

/// First grid time with <l, X^_{0,t}> >= 1, else kNever.
double hitting_time(const StoppingPolicy& policy, const SampledPath& path);

/// exp(-int_0^t theta^2 ds) with the same interpolation as randomized_stop_time.
double survival_weight(const StoppingPolicy& policy, const SampledPath& path, double t);

/// E[Y_{tau ^ T} | path] for Expo(1) randomisation:
/// Y_0 + int_0^T exp(-int_0^t theta^2) dY_t, with Y and the running integral linear
/// inside each cell so every cell is integrated exactly.
double conditional_value(const StoppingPolicy& policy, const SampledPath& path, const PayoffSpec& payoff);

/// Same quantity from precomputed theta and Y on the grid.
double conditional_value_from(const std::vector<double>& theta, const std::vector<double>& y,
                              std::span<const double> times);

/// Y linearly interpolated at min(tau, T).
double stopped_payoff(const std::vector<double>& y, std::span<const double> times, double tau);

/// Y_0 + sum over cells up to S_k of w_{t_i} (Y_{i+1} - Y_i) with
/// w = <exp_sh(-(l sh l) 1), X^{<=N}_{0,t}>. S_k uses the level-1 p-variation of the
/// augmented path; k = infinity means S_k = T.
double conditional_value_linearized(const StoppingPolicy& policy, const SampledPath& path, const PayoffSpec& payoff,
                                    std::size_t level, double k = kNever, double p = 2.5);

/// The same left-point sum with the exact weights exp(-<(l sh l) 1, X^_{0,t}>).
double conditional_value_signature_weights(const StoppingPolicy& policy, const SampledPath& path,
                                           const PayoffSpec& payoff, double k = kNever, double p = 2.5);

/// Price-path generator. sample() must be deterministic in the seed.
class PathModel {
 public:
  virtual ~PathModel() = default;
  virtual SampledPath sample(std::uint64_t seed, std::size_t n_steps) const = 0;
  virtual double horizon() const = 0;
  virtual std::string describe() const = 0;
};

/// dS = r S dt + sigma S dW, sampled exactly on a uniform grid.
class GeometricBrownianModel : public PathModel {
 public:
  GeometricBrownianModel(double s0, double rate, double sigma, double horizon);
  SampledPath sample(std::uint64_t seed, std::size_t n_steps) const override;
  double horizon() const override { return horizon_; }
  std::string describe() const override;

  double s0() const { return s0_; }
  double rate() const { return rate_; }
  double sigma() const { return sigma_; }

 private:
  double s0_, rate_, sigma_, horizon_;
};

/// S = s0 + mu t + sigma W.
class ArithmeticBrownianModel : public PathModel {
 public:
  ArithmeticBrownianModel(double s0, double mu, double sigma, double horizon);
  SampledPath sample(std::uint64_t seed, std::size_t n_steps) const override;
  double horizon() const override { return horizon_; }
  std::string describe() const override;

 private:
  double s0_, mu_, sigma_, horizon_;
};

/// Seed of path `index` in a run with base seed `seed` (std::seed_seq mixing).
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

struct MCConfig {
  std::size_t n_paths = 10000;
  std::size_t n_steps = 256;
  std::uint64_t seed = 1;
  std::size_t level = 4;         ///< truncation N: policies have degree <= N
  double k_budget = 10.0;        ///< |l|_1 + deg(l) <= K
  std::size_t basis_degree = 2;  ///< optimiser searches words up to this degree (<= level)
  std::size_t starts = 8;        ///< Nelder-Mead restarts
  std::size_t max_evaluations = 1500;
};

struct MCEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

enum class PolicyKind { randomized, hitting };

std::string to_string(PolicyKind kind);

/// Mean over cfg.n_paths model paths of conditional_value (randomized) or of
/// Y_{tau_l ^ T} (hitting), with per-path seeds path_seed(cfg.seed, i).
MCEstimate mc_value(const StoppingPolicy& policy, const PayoffSpec& payoff, const PathModel& model,
                    const MCConfig& cfg, PolicyKind kind = PolicyKind::randomized);

struct OptimizerTraceRow {
  std::size_t evaluation = 0;
  std::string kind;
  std::size_t start = 0;
  double value = 0.0;
  double best = 0.0;
};

struct OptimizationResult {
  StoppingPolicy policy;
  PolicyKind kind = PolicyKind::hitting;
  double in_sample = 0.0;
  double in_sample_se = 0.0;
  MCEstimate out_of_sample;
  bool budget_exhausted = false;
  std::vector<OptimizerTraceRow> trace;
};

/// Multi-start Nelder-Mead over the coefficients of all words up to cfg.basis_degree,
/// with common random numbers (the in-sample paths are fixed for the whole run).
/// Coefficient vectors violating the K-budget are scaled back onto it. Both the
/// randomized and the hitting objective are searched; the in-sample winner is kept
/// only if it beats the best trivial rule (stop now / never stop) by more than two
/// paired standard errors. The result is re-valued on cfg.n_paths fresh paths.
OptimizationResult optimize_policy(const PayoffSpec& payoff, const PathModel& model, const MCConfig& cfg);

/// optimize_policy with the discounted call or put payoff.
OptimizationResult price_american_option(PayoffKind kind, double strike, double rate, const PathModel& model,
                                         const MCConfig& cfg);

/// Scales l so that |l|_1 + deg(l) <= budget (no-op when already inside).
LinearFunctional project_to_budget(const LinearFunctional& l, double budget);

/// All words over {1..alphabet} of length <= degree, in (length, lexicographic) order.
std::vector<Word> words_up_to(std::size_t alphabet, std::size_t degree);

}  // namespace roughkit
