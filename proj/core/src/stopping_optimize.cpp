#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit/signatures.hpp"
#include "roughkit/stopping.hpp"
#include "survival_cell.hpp"

namespace roughkit {

std::vector<Word> words_up_to(std::size_t alphabet, std::size_t degree) {
  std::vector<Word> out;
  for (std::size_t len = 0; len <= degree; ++len) {
    std::size_t count = 1;
    for (std::size_t k = 0; k < len; ++k) count *= alphabet;
    for (std::size_t idx = 0; idx < count; ++idx) out.push_back(word_at(idx, len, alphabet));
  }
  return out;
}

LinearFunctional project_to_budget(const LinearFunctional& l, double budget) {
  double deg = static_cast<double>(word_degree(l));
  double norm = l1_norm(l);
  if (norm + deg <= budget) return l;
  if (deg >= budget) return LinearFunctional();
  return ((budget - deg) / norm) * l;
}

namespace {

// Basis-word signature features of a fixed path set. Words whose feature is identical on every
// path (the pure time words) are stored once per time in shared; the rest live in features,
// laid out as [(path * times + k) * varying.size() + j].
struct FeatureBank {
  std::size_t n_paths = 0;
  std::size_t n_times = 0;
  std::vector<Word> words;
  std::vector<std::size_t> varying;
  std::vector<std::size_t> common;
  std::vector<float> features;
  std::vector<float> shared;   // [k * common.size() + j]
  std::vector<double> payoff;  // [path * times + k]
  std::vector<double> times;

  float feature(std::size_t path, std::size_t k, std::size_t w) const {
    for (std::size_t j = 0; j < varying.size(); ++j)
      if (varying[j] == w) return features[(path * n_times + k) * varying.size() + j];
    for (std::size_t j = 0; j < common.size(); ++j)
      if (common[j] == w) return shared[k * common.size() + j];
    return 0.0f;
  }
};

FeatureBank build_bank(const PayoffSpec& payoff, const PathModel& model, const MCConfig& cfg) {
  FeatureBank bank;
  bank.n_paths = cfg.n_paths;
  bank.n_times = cfg.n_steps + 1;
  bank.words = words_up_to(2, cfg.basis_degree);
  std::size_t nw = bank.words.size();
  std::size_t nt = bank.n_times;
  std::vector<float> full(bank.n_paths * nt * nw);
  bank.payoff.resize(bank.n_paths * nt);
  bank.times = uniform_times(cfg.n_steps, model.horizon());
  parallel_for(bank.n_paths, [&](std::size_t i) {
    SampledPath path = model.sample(path_seed(cfg.seed, i), cfg.n_steps);
    if (path.dim() != 1) throw ArgumentError("optimize_policy expects scalar price paths");
    std::vector<double> y = payoff_process(payoff, path);
    std::vector<TruncatedTensor> run = running_signature(time_augment(path), cfg.basis_degree);
    for (std::size_t k = 0; k < nt; ++k) {
      bank.payoff[i * nt + k] = y[k];
      float* dst = &full[(i * nt + k) * nw];
      for (std::size_t w = 0; w < nw; ++w) dst[w] = static_cast<float>(run[k].coeff(bank.words[w]));
    }
  });
  for (std::size_t w = 0; w < nw; ++w) {
    bool same = true;
    for (std::size_t i = 1; i < bank.n_paths && same; ++i)
      for (std::size_t k = 0; k < nt && same; ++k) same = full[(i * nt + k) * nw + w] == full[k * nw + w];
    (same ? bank.common : bank.varying).push_back(w);
  }
  bank.shared.resize(nt * bank.common.size());
  for (std::size_t k = 0; k < nt; ++k)
    for (std::size_t j = 0; j < bank.common.size(); ++j) bank.shared[k * bank.common.size() + j] = full[k * nw + bank.common[j]];
  bank.features.resize(bank.n_paths * nt * bank.varying.size());
  for (std::size_t r = 0; r < bank.n_paths * nt; ++r)
    for (std::size_t j = 0; j < bank.varying.size(); ++j)
      bank.features[r * bank.varying.size() + j] = full[r * nw + bank.varying[j]];
  return bank;
}

// Per-path values of the policy with coefficient vector c on the bank. Matches conditional_value_from
// and the first-hitting rule cell by cell, without materialising theta.
void evaluate(const FeatureBank& bank, const std::vector<double>& c, PolicyKind kind, std::vector<double>& out) {
  std::size_t nv = bank.varying.size();
  std::size_t nt = bank.n_times;
  std::vector<double> base(nt, 0.0);
  std::vector<double> cv(nv);
  for (std::size_t j = 0; j < nv; ++j) cv[j] = c[bank.varying[j]];
  for (std::size_t k = 0; k < nt; ++k)
    for (std::size_t j = 0; j < bank.common.size(); ++j)
      base[k] += c[bank.common[j]] * static_cast<double>(bank.shared[k * bank.common.size() + j]);
  out.resize(bank.n_paths);
  parallel_for(bank.n_paths, [&](std::size_t i) {
    const float* f = &bank.features[i * nt * nv];
    const double* y = &bank.payoff[i * nt];
    auto theta_at = [&](std::size_t k) {
      double s = base[k];
      for (std::size_t j = 0; j < nv; ++j) s += cv[j] * static_cast<double>(f[k * nv + j]);
      return s;
    };
    if (kind == PolicyKind::randomized) {
      double value = y[0];
      double survival = 1.0;
      double prev = theta_at(0);
      for (std::size_t k = 0; k + 1 < nt; ++k) {
        double next = theta_at(k + 1);
        double rise = 0.5 * (bank.times[k + 1] - bank.times[k]) * (prev * prev + next * next);
        detail::SurvivalCell cell = detail::survival_cell(rise);
        value += (y[k + 1] - y[k]) * survival * cell.mean;
        survival *= cell.factor;
        prev = next;
      }
      out[i] = value;
    } else {
      std::size_t stop = nt - 1;
      for (std::size_t k = 0; k < nt; ++k)
        if (theta_at(k) >= 1.0) {
          stop = k;
          break;
        }
      out[i] = y[stop];
    }
  });
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

LinearFunctional to_functional(const std::vector<Word>& words, const std::vector<double>& c) {
  LinearFunctional l;
  for (std::size_t w = 0; w < words.size(); ++w) l.add_term(words[w], c[w]);
  return l;
}

std::vector<double> to_coefficients(const std::vector<Word>& words, const LinearFunctional& l) {
  std::vector<double> c(words.size());
  for (std::size_t w = 0; w < words.size(); ++w) c[w] = l.coeff(words[w]);
  return c;
}

struct SearchOutcome {
  std::vector<double> coeffs;
  double value = -INFINITY;
  bool exhausted = false;
};

// Nelder-Mead maximisation in scaled coordinates u (c_w = u_w * scale_w).
SearchOutcome nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
                          double step, std::size_t max_evals, std::size_t& evals) {
  std::size_t n = start.size();
  std::vector<std::vector<double>> simplex(n + 1, start);
  for (std::size_t k = 0; k < n; ++k) simplex[k + 1][k] += step;
  std::vector<double> values(n + 1);
  std::size_t used = 0;
  auto eval = [&](const std::vector<double>& u) {
    ++used;
    ++evals;
    return -f(u);
  };
  for (std::size_t k = 0; k <= n; ++k) values[k] = eval(simplex[k]);
  bool converged = false;
  while (used < max_evals) {
    std::vector<std::size_t> order(n + 1);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> v2;
    for (std::size_t k : order) {
      s2.push_back(simplex[k]);
      v2.push_back(values[k]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
    double spread = values[n] - values[0];
    double size = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
      for (std::size_t j = 0; j < n; ++j) size = std::max(size, std::abs(simplex[k][j] - simplex[0][j]));
    if (spread <= 1e-12 && size <= 1e-6) {
      converged = true;
      break;
    }
    if (size <= 1e-9) {
      converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[k][j] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (simplex[n][j] - centroid[j]);
      return p;
    };
    std::vector<double> reflected = along(-1.0);
    double fr = eval(reflected);
    if (fr < values[0]) {
      std::vector<double> expanded = along(-2.0);
      double fe = eval(expanded);
      if (fe < fr) {
        simplex[n] = std::move(expanded);
        values[n] = fe;
      } else {
        simplex[n] = std::move(reflected);
        values[n] = fr;
      }
    } else if (fr < values[n - 1]) {
      simplex[n] = std::move(reflected);
      values[n] = fr;
    } else {
      bool outside = fr < values[n];
      std::vector<double> contracted = along(outside ? -0.5 : 0.5);
      double fc = eval(contracted);
      if (fc < (outside ? fr : values[n])) {
        simplex[n] = std::move(contracted);
        values[n] = fc;
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          for (std::size_t j = 0; j < n; ++j) simplex[k][j] = simplex[0][j] + 0.5 * (simplex[k][j] - simplex[0][j]);
          values[k] = eval(simplex[k]);
        }
      }
    }
  }
  std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return SearchOutcome{simplex[best], -values[best], !converged};
}

}  // namespace

OptimizationResult optimize_policy(const PayoffSpec& payoff, const PathModel& model, const MCConfig& cfg) {
  if (cfg.basis_degree > cfg.level) throw ArgumentError("basis_degree must not exceed the truncation level");
  if (cfg.n_paths < 2) throw ArgumentError("optimize_policy needs at least two paths");
  FeatureBank bank = build_bank(payoff, model, cfg);
  std::size_t nw = bank.words.size();

  // scale_w = 1 / RMS of the terminal feature, so unit steps move every word comparably
  std::vector<double> scale(nw, 1.0);
  for (std::size_t w = 0; w < nw; ++w) {
    double ss = 0.0;
    for (std::size_t i = 0; i < bank.n_paths; ++i) {
      double f = bank.feature(i, bank.n_times - 1, w);
      ss += f * f;
    }
    double rms = std::sqrt(ss / static_cast<double>(bank.n_paths));
    scale[w] = rms > 0.0 ? 1.0 / rms : 1.0;
  }
  auto coefficients = [&](const std::vector<double>& u) {
    std::vector<double> c(nw);
    for (std::size_t w = 0; w < nw; ++w) c[w] = u[w] * scale[w];
    return to_coefficients(bank.words, project_to_budget(to_functional(bank.words, c), cfg.k_budget));
  };

  OptimizationResult result;
  std::size_t evals = 0;
  std::vector<double> scratch;
  std::size_t letter2 = 0;
  for (std::size_t w = 0; w < nw; ++w)
    if (bank.words[w] == Word{2}) letter2 = w;

  struct Candidate {
    std::vector<double> c;
    PolicyKind kind;
    double value;
  };
  std::vector<Candidate> winners;
  std::size_t per_start = std::max<std::size_t>(nw + 2, cfg.max_evaluations / (2 * std::max<std::size_t>(1, cfg.starts)));
  for (PolicyKind kind : {PolicyKind::randomized, PolicyKind::hitting}) {
    std::vector<std::vector<double>> starts;
    starts.emplace_back(nw, 0.0);
    for (double depth : {1.0, 2.0, 3.0, 5.0}) {
      std::vector<double> u(nw, 0.0);
      if (letter2 != 0) u[letter2] = (payoff.kind == PayoffKind::american_call ? depth : -depth);
      if (kind == PolicyKind::randomized && letter2 != 0) u[letter2] *= 3.0;
      starts.push_back(u);
    }
    std::mt19937_64 rng(path_seed(cfg.seed, 0xC0FFEEULL + static_cast<std::uint64_t>(kind)));
    std::normal_distribution<double> normal(0.0, 2.0);
    while (starts.size() < cfg.starts) {
      std::vector<double> u(nw);
      for (double& x : u) x = normal(rng);
      starts.push_back(u);
    }
    starts.resize(std::min(starts.size(), std::max<std::size_t>(1, cfg.starts)));
    double best_kind = -INFINITY;
    for (std::size_t s = 0; s < starts.size(); ++s) {
      auto objective = [&](const std::vector<double>& u) {
        evaluate(bank, coefficients(u), kind, scratch);
        double v = mean_of(scratch);
        if (v > best_kind) best_kind = v;
        if (result.trace.empty() || v >= result.trace.back().best || evals % 100 == 0)
          result.trace.push_back(OptimizerTraceRow{evals, to_string(kind), s, v, best_kind});
        return v;
      };
      SearchOutcome out = nelder_mead(objective, starts[s], 1.0, per_start, evals);
      result.budget_exhausted = result.budget_exhausted || out.exhausted;
      winners.push_back(Candidate{coefficients(out.coeffs), kind, out.value});
    }
  }

  auto best_it = std::max_element(winners.begin(), winners.end(),
                                  [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  Candidate chosen = *best_it;

  // trivial rules: never stop (l = 0) and stop at once (l = e with the hitting rule)
  std::vector<double> never_vals;
  std::vector<double> now_vals;
  evaluate(bank, std::vector<double>(nw, 0.0), PolicyKind::hitting, never_vals);
  std::vector<double> now_c(nw, 0.0);
  now_c[0] = 1.0;
  evaluate(bank, now_c, PolicyKind::hitting, now_vals);
  bool never_better = mean_of(never_vals) >= mean_of(now_vals);
  const std::vector<double>& base_vals = never_better ? never_vals : now_vals;
  std::vector<double> chosen_vals;
  evaluate(bank, chosen.c, chosen.kind, chosen_vals);
  std::vector<double> diff(chosen_vals.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = chosen_vals[i] - base_vals[i];
  if (!(mean_of(diff) > 2.0 * std_error_of(diff))) {
    chosen = Candidate{never_better ? std::vector<double>(nw, 0.0) : now_c, PolicyKind::hitting, mean_of(base_vals)};
    chosen_vals = base_vals;
  }

  result.policy = StoppingPolicy{to_functional(bank.words, chosen.c), cfg.level};
  result.kind = chosen.kind;
  result.in_sample = mean_of(chosen_vals);
  result.in_sample_se = std_error_of(chosen_vals);
  MCConfig fresh = cfg;
  fresh.seed = path_seed(cfg.seed, 0x8000000000000000ULL);
  result.out_of_sample = mc_value(result.policy, payoff, model, fresh, result.kind);
  return result;
}

OptimizationResult price_american_option(PayoffKind kind, double strike, double rate, const PathModel& model,
                                         const MCConfig& cfg) {
  if (kind == PayoffKind::custom) throw ArgumentError("price_american_option prices calls and puts only");
  PayoffSpec payoff;
  payoff.kind = kind;
  payoff.strike = strike;
  payoff.rate = rate;
  return optimize_policy(payoff, model, cfg);
}

}  // namespace roughkit
