#include "roughkit/stopping.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit/signatures.hpp"
#include "survival_cell.hpp"

namespace roughkit {

void StoppingPolicy::validate() const {
  if (word_degree(functional) > level)
    throw ArgumentError("policy degree " + std::to_string(word_degree(functional)) + " exceeds truncation " +
                        std::to_string(level));
}

std::vector<double> payoff_process(const PayoffSpec& payoff, const SampledPath& path) {
  std::vector<double> y(path.size());
  std::span<const Vector> all(path.values());
  for (std::size_t i = 0; i < path.size(); ++i) {
    double t = path.time(i);
    switch (payoff.kind) {
      case PayoffKind::american_call:
        y[i] = std::exp(-payoff.rate * t) * std::max(path.value(i)[0] - payoff.strike, 0.0);
        break;
      case PayoffKind::american_put:
        y[i] = std::exp(-payoff.rate * t) * std::max(payoff.strike - path.value(i)[0], 0.0);
        break;
      case PayoffKind::custom:
        if (!payoff.custom) throw ArgumentError("custom payoff without evaluator");
        y[i] = payoff.custom(t, all.first(i + 1));
        break;
    }
  }
  return y;
}

std::vector<double> policy_features(const StoppingPolicy& policy, const SampledPath& path) {
  policy.validate();
  SampledPath aug = time_augment(path);
  if (static_cast<std::size_t>(policy.functional.max_letter()) > aug.dim())
    throw ArgumentError("policy uses letters beyond the augmented alphabet");
  std::vector<TruncatedTensor> run = running_signature(aug, word_degree(policy.functional));
  std::vector<double> theta(run.size());
  for (std::size_t i = 0; i < run.size(); ++i) theta[i] = pair(policy.functional, run[i]);
  return theta;
}

std::vector<double> intensity_integral(const std::vector<double>& theta, std::span<const double> times) {
  std::vector<double> integral(theta.size(), 0.0);
  for (std::size_t i = 1; i < theta.size(); ++i)
    integral[i] = integral[i - 1] + 0.5 * (times[i] - times[i - 1]) * (theta[i - 1] * theta[i - 1] + theta[i] * theta[i]);
  return integral;
}

namespace {

double crossing_time(const std::vector<double>& integral, std::span<const double> times, double z) {
  for (std::size_t i = 1; i < integral.size(); ++i) {
    if (integral[i] >= z) {
      double rise = integral[i] - integral[i - 1];
      double frac = rise > 0.0 ? (z - integral[i - 1]) / rise : 0.0;
      return times[i - 1] + std::clamp(frac, 0.0, 1.0) * (times[i] - times[i - 1]);
    }
  }
  return kNever;
}


}  // namespace

double randomized_stop_time(const StoppingPolicy& policy, const SampledPath& path, double z) {
  if (!(z > 0.0)) throw ArgumentError("randomized_stop_time: z must be positive");
  std::vector<double> theta = policy_features(policy, path);
  return crossing_time(intensity_integral(theta, path.times()), path.times(), z);
}

double hitting_time(const StoppingPolicy& policy, const SampledPath& path) {
  std::vector<double> theta = policy_features(policy, path);
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (theta[i] >= 1.0) return path.time(i);
  return kNever;
}

double survival_weight(const StoppingPolicy& policy, const SampledPath& path, double t) {
  std::vector<double> integral = intensity_integral(policy_features(policy, path), path.times());
  if (path.size() == 1) return 1.0;
  std::size_t i = path.segment_index(t);
  double frac = (std::clamp(t, path.time(i), path.time(i + 1)) - path.time(i)) / (path.time(i + 1) - path.time(i));
  return std::exp(-(integral[i] + frac * (integral[i + 1] - integral[i])));
}

double conditional_value_from(const std::vector<double>& theta, const std::vector<double>& y,
                              std::span<const double> times) {
  // survival exp(-I_i) carried multiplicatively; each cell is integrated exactly in I
  double value = y[0];
  double survival = 1.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    double rise = 0.5 * (times[i + 1] - times[i]) * (theta[i] * theta[i] + theta[i + 1] * theta[i + 1]);
    detail::SurvivalCell cell = detail::survival_cell(rise);
    value += (y[i + 1] - y[i]) * survival * cell.mean;
    survival *= cell.factor;
  }
  return value;
}

double conditional_value(const StoppingPolicy& policy, const SampledPath& path, const PayoffSpec& payoff) {
  return conditional_value_from(policy_features(policy, path), payoff_process(payoff, path), path.times());
}

double stopped_payoff(const std::vector<double>& y, std::span<const double> times, double tau) {
  if (tau >= times.back()) return y.back();
  if (tau <= times.front()) return y.front();
  auto it = std::upper_bound(times.begin(), times.end(), tau);
  std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  double frac = (tau - times[i]) / (times[i + 1] - times[i]);
  return y[i] + frac * (y[i + 1] - y[i]);
}

namespace {

std::size_t threshold_index(const SampledPath& aug, double k, double p) {
  if (!std::isfinite(k)) return aug.size() - 1;
  return aug.require_grid_index(pvar_threshold_time(aug, k, p));
}

double left_point_sum(const std::vector<double>& w, const std::vector<double>& y, std::size_t last) {
  double value = y[0];
  for (std::size_t i = 0; i < last; ++i) value += w[i] * (y[i + 1] - y[i]);
  return value;
}

}  // namespace

double conditional_value_linearized(const StoppingPolicy& policy, const SampledPath& path, const PayoffSpec& payoff,
                                    std::size_t level, double k, double p) {
  policy.validate();
  LinearFunctional quad = shuffle_functional(policy.functional, policy.functional).append_letter(kTimeLetter);
  if (!policy.functional.is_zero() && word_degree(quad) > level)
    throw ArgumentError("conditional_value_linearized: (l sh l)1 has degree " + std::to_string(word_degree(quad)) +
                        " above level " + std::to_string(level));
  LinearFunctional weight_fn = exp_shuffle(-1.0 * quad, level);
  SampledPath aug = time_augment(path);
  std::vector<TruncatedTensor> run = running_signature(aug, level);
  std::vector<double> w(run.size());
  for (std::size_t i = 0; i < run.size(); ++i) w[i] = pair(weight_fn, run[i]);
  return left_point_sum(w, payoff_process(payoff, path), threshold_index(aug, k, p));
}

double conditional_value_signature_weights(const StoppingPolicy& policy, const SampledPath& path,
                                           const PayoffSpec& payoff, double k, double p) {
  policy.validate();
  LinearFunctional quad = shuffle_functional(policy.functional, policy.functional).append_letter(kTimeLetter);
  SampledPath aug = time_augment(path);
  std::vector<TruncatedTensor> run = running_signature(aug, std::max<std::size_t>(1, word_degree(quad)));
  std::vector<double> w(run.size());
  for (std::size_t i = 0; i < run.size(); ++i) w[i] = std::exp(-pair(quad, run[i]));
  return left_point_sum(w, payoff_process(payoff, path), threshold_index(aug, k, p));
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

GeometricBrownianModel::GeometricBrownianModel(double s0, double rate, double sigma, double horizon)
    : s0_(s0), rate_(rate), sigma_(sigma), horizon_(horizon) {
  if (!(s0 > 0.0) || !(sigma >= 0.0) || !(horizon > 0.0)) throw ModelError("GBM needs s0 > 0, sigma >= 0, T > 0");
}

SampledPath GeometricBrownianModel::sample(std::uint64_t seed, std::size_t n_steps) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double dt = horizon_ / static_cast<double>(n_steps);
  double drift = (rate_ - 0.5 * sigma_ * sigma_) * dt;
  double vol = sigma_ * std::sqrt(dt);
  std::vector<Vector> values;
  values.reserve(n_steps + 1);
  double log_s = std::log(s0_);
  values.push_back(Vector::Constant(1, s0_));
  for (std::size_t k = 0; k < n_steps; ++k) {
    log_s += drift + vol * normal(rng);
    values.push_back(Vector::Constant(1, std::exp(log_s)));
  }
  return SampledPath(uniform_times(n_steps, horizon_), std::move(values));
}

std::string GeometricBrownianModel::describe() const {
  std::ostringstream s;
  s << "gbm(s0=" << s0_ << ", r=" << rate_ << ", sigma=" << sigma_ << ", T=" << horizon_ << ")";
  return s.str();
}

ArithmeticBrownianModel::ArithmeticBrownianModel(double s0, double mu, double sigma, double horizon)
    : s0_(s0), mu_(mu), sigma_(sigma), horizon_(horizon) {
  if (!(sigma >= 0.0) || !(horizon > 0.0)) throw ModelError("Brownian model needs sigma >= 0, T > 0");
}

SampledPath ArithmeticBrownianModel::sample(std::uint64_t seed, std::size_t n_steps) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double dt = horizon_ / static_cast<double>(n_steps);
  double vol = sigma_ * std::sqrt(dt);
  std::vector<Vector> values;
  values.reserve(n_steps + 1);
  double s = s0_;
  values.push_back(Vector::Constant(1, s));
  for (std::size_t k = 0; k < n_steps; ++k) {
    s += mu_ * dt + vol * normal(rng);
    values.push_back(Vector::Constant(1, s));
  }
  return SampledPath(uniform_times(n_steps, horizon_), std::move(values));
}

std::string ArithmeticBrownianModel::describe() const {
  std::ostringstream s;
  s << "abm(s0=" << s0_ << ", mu=" << mu_ << ", sigma=" << sigma_ << ", T=" << horizon_ << ")";
  return s.str();
}

std::string to_string(PolicyKind kind) { return kind == PolicyKind::randomized ? "randomized" : "hitting"; }

MCEstimate mc_value(const StoppingPolicy& policy, const PayoffSpec& payoff, const PathModel& model,
                    const MCConfig& cfg, PolicyKind kind) {
  policy.validate();
  if (cfg.n_paths == 0 || cfg.n_steps == 0) throw ArgumentError("mc_value: n_paths and n_steps must be positive");
  std::vector<double> samples(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t i) {
    SampledPath path = model.sample(path_seed(cfg.seed, i), cfg.n_steps);
    std::vector<double> y = payoff_process(payoff, path);
    std::vector<double> theta = policy_features(policy, path);
    if (kind == PolicyKind::randomized) {
      samples[i] = conditional_value_from(theta, y, path.times());
    } else {
      std::size_t stop = y.size() - 1;
      for (std::size_t k = 0; k < theta.size(); ++k)
        if (theta[k] >= 1.0) {
          stop = k;
          break;
        }
      samples[i] = y[stop];
    }
  });
  MCEstimate est;
  est.n_paths = cfg.n_paths;
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var = samples.size() > 1 ? var / static_cast<double>(samples.size() - 1) : 0.0;
  est.estimate = mean;
  est.std_error = std::sqrt(var / static_cast<double>(samples.size()));
  return est;
}

}  // namespace roughkit
