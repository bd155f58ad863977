#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "roughkit/errors.hpp"
#include "roughkit/filtering.hpp"
#include "roughkit/parallel.hpp"
#include "filter_step.hpp"

namespace roughkit {

void PenaltyConfig::validate() const {
  if (!(k1 > 0.0)) throw ArgumentError("penalty: k1 must be positive");
  if (!(k2 >= 1.0)) throw ArgumentError("penalty: k2 must be at least 1");
  if (reference.size() > 1) throw ArgumentError("penalty: at most one reference model");
}

namespace {

double prior_integral(const LinearGaussianModel& model, const SampledPath& observation,
                      const std::vector<FilterState>& states, std::size_t last, const PenaltyConfig& cfg) {
  double total = cfg.g ? cfg.g(model.mu0, model.sigma0) : 0.0;
  if (cfg.z)
    for (std::size_t i = 0; i < last; ++i)
      total += cfg.z(states[i].q, states[i].R, model.at(observation.time(i))) * (observation.time(i + 1) - observation.time(i));
  return total;
}

std::size_t index_of(const SampledPath& path, double t) {
  return std::isfinite(t) ? path.require_grid_index(t) : path.size() - 1;
}

}  // namespace

double penalty(const LinearGaussianModel& candidate, const SampledPath& observation, const PenaltyConfig& cfg,
               double until) {
  cfg.validate();
  if (!candidate.admissible()) return INFINITY;
  std::vector<FilterState> states = kalman_bucy(candidate, observation);
  std::size_t last = index_of(observation, until);
  return prior_integral(candidate, observation, states, last, cfg) +
         neg_log_likelihood_pathwise(candidate, canonical_lift(observation), states, observation.time(last));
}

std::vector<CandidateSummary> summarize_candidates(const std::vector<LinearGaussianModel>& candidates,
                                                   const SampledPath& observation, const PenaltyConfig& cfg,
                                                   double t) {
  cfg.validate();
  if (candidates.empty()) throw ArgumentError("robust filtering needs at least one candidate");
  std::size_t last = index_of(observation, t);
  RoughPath lifted = canonical_lift(observation);
  auto summarize = [&](const LinearGaussianModel& model) {
    CandidateSummary s;
    if (!model.admissible()) return s;
    std::vector<FilterState> states = kalman_bucy(model, observation);
    s.q = states[last].q;
    s.R = states[last].R;
    s.beta = prior_integral(model, observation, states, last, cfg) +
             neg_log_likelihood_pathwise(model, lifted, states, observation.time(last));
    return s;
  };
  std::vector<CandidateSummary> out(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t j) { out[j] = summarize(candidates[j]); });
  double anchor = INFINITY;
  if (!cfg.reference.empty()) {
    anchor = summarize(cfg.reference.front()).beta;
    if (!std::isfinite(anchor)) throw ModelError("penalty: reference model is inadmissible");
  } else {
    for (const auto& s : out) anchor = std::min(anchor, s.beta);
    if (!std::isfinite(anchor)) throw ArgumentError("robust filtering: no admissible candidate");
  }
  for (auto& s : out)
    if (std::isfinite(s.beta)) s.weight = std::pow(std::max(s.beta - anchor, 0.0) / cfg.k1, cfg.k2);
  return out;
}

namespace {

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1 against N(0, 1/2) after scaling
};

// Golub-Welsch for the physicists' Hermite weight exp(-x^2), normalised to total mass 1.
const Quadrature& hermite20() {
  static const Quadrature rule = [] {
    constexpr int n = 20;
    Matrix jacobi = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
    Quadrature q;
    for (int k = 0; k < n; ++k) {
      q.nodes.push_back(es.eigenvalues()[k]);
      q.weights.push_back(es.eigenvectors()(0, k) * es.eigenvectors()(0, k));
    }
    return q;
  }();
  return rule;
}

Matrix covariance_root(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (cov + cov.transpose()));
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

double gaussian_expectation(const TestFunction& phi, const Vector& mean, const Matrix& cov) {
  auto m = mean.size();
  if (cov.rows() != m || cov.cols() != m) throw ArgumentError("gaussian_expectation: covariance shape");
  Matrix root = covariance_root(cov);
  if (m <= 2) {
    const Quadrature& q = hermite20();
    std::size_t n = q.nodes.size();
    double total = 0.0;
    Vector x(m);
    if (m == 1) {
      for (std::size_t a = 0; a < n; ++a) {
        x[0] = mean[0] + std::sqrt(2.0) * root(0, 0) * q.nodes[a];
        total += q.weights[a] * phi(x);
      }
    } else {
      Vector u(2);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          u << q.nodes[a], q.nodes[b];
          x = mean + std::sqrt(2.0) * (root * u);
          total += q.weights[a] * q.weights[b] * phi(x);
        }
    }
    return total;
  }
  constexpr std::size_t samples = 100000;
  std::mt19937_64 rng(0x5EEDF11EULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  double total = 0.0;
  Vector u(m);
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index a = 0; a < m; ++a) u[a] = normal(rng);
    total += phi(mean + root * u);
  }
  return total / static_cast<double>(samples);
}

namespace {

double sup_over(const std::vector<CandidateSummary>& summaries, const TestFunction& phi) {
  double best = -INFINITY;
  for (const auto& s : summaries)
    if (std::isfinite(s.weight)) best = std::max(best, gaussian_expectation(phi, s.q, s.R) - s.weight);
  return best;
}

Interval interval_from(const std::vector<CandidateSummary>& summaries, const TestFunction& phi) {
  TestFunction neg = [&phi](const Vector& x) { return -phi(x); };
  return Interval{-sup_over(summaries, neg), sup_over(summaries, phi)};
}

double point_from(const std::vector<CandidateSummary>& summaries, const TestFunction& phi) {
  struct Moments {
    double m1, m2, weight;
  };
  std::vector<Moments> moments;
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& s : summaries) {
    if (!std::isfinite(s.weight)) continue;
    double m1 = gaussian_expectation(phi, s.q, s.R);
    double m2 = gaussian_expectation([&phi](const Vector& x) { double v = phi(x); return v * v; }, s.q, s.R);
    double sd = std::sqrt(std::max(m2 - m1 * m1, 0.0));
    lo = std::min(lo, m1 - 6.0 * sd);
    hi = std::max(hi, m1 + 6.0 * sd);
    moments.push_back(Moments{m1, m2, s.weight});
  }
  if (hi - lo <= 0.0) {
    lo -= 1.0;
    hi += 1.0;
  }
  auto objective = [&](double xi) {
    double best = -INFINITY;
    for (const auto& m : moments) best = std::max(best, m.m2 - 2.0 * xi * m.m1 + xi * xi - m.weight);
    return best;
  };
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 400 && b - a > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = objective(x2);
    }
  }
  // each piece is xi^2 plus a line; a piece that is active at its own vertex gives the
  // exact minimiser, which the flat bottom hides from the search
  for (const auto& m : moments) {
    double own = m.m2 - 2.0 * m.m1 * m.m1 + m.m1 * m.m1 - m.weight;
    if (own >= objective(m.m1)) return m.m1;
  }
  return 0.5 * (a + b);
}

}  // namespace

double robust_expectation(const TestFunction& phi, const std::vector<LinearGaussianModel>& candidates,
                          const SampledPath& observation, const PenaltyConfig& cfg, double t) {
  return sup_over(summarize_candidates(candidates, observation, cfg, t), phi);
}

double robust_point_estimate(const TestFunction& phi, const std::vector<LinearGaussianModel>& candidates,
                             const SampledPath& observation, const PenaltyConfig& cfg, double t) {
  return point_from(summarize_candidates(candidates, observation, cfg, t), phi);
}

Interval robust_confidence_interval(const TestFunction& phi, const std::vector<LinearGaussianModel>& candidates,
                                    const SampledPath& observation, const PenaltyConfig& cfg, double t) {
  return interval_from(summarize_candidates(candidates, observation, cfg, t), phi);
}

RobustReport robust_report(const TestFunction& phi, const std::vector<LinearGaussianModel>& candidates,
                           const SampledPath& observation, const PenaltyConfig& cfg, double t) {
  std::vector<CandidateSummary> summaries = summarize_candidates(candidates, observation, cfg, t);
  RobustReport report;
  report.estimate = point_from(summaries, phi);
  report.ci = interval_from(summaries, phi);
  for (std::size_t j = 0; j < summaries.size(); ++j) {
    report.penalties.push_back(summaries[j].weight);
    report.betas.push_back(summaries[j].beta);
    if (summaries[j].beta < summaries[report.best_candidate].beta) report.best_candidate = j;
  }
  return report;
}

double filtering_cost(const LinearGaussianModel& gamma, const Vector& q0, const Matrix& r0,
                      const RoughPath& observation, const PenaltyConfig& cfg, double t) {
  cfg.validate();
  gamma.check_shapes();
  for (const auto& k : gamma.pieces) {
    Matrix gap = Matrix::Identity(k.rho.rows(), k.rho.rows()) - k.rho * k.rho.transpose();
    if (Eigen::SelfAdjointEigenSolver<Matrix>(gap, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < -1e-10)
      throw ModelError("filtering_cost: control knot with I - rho rho^T not PSD");
  }
  if (q0.size() != static_cast<Eigen::Index>(gamma.signal_dim()) || r0.rows() != q0.size() || r0.cols() != q0.size())
    throw ArgumentError("filtering_cost: initial state has the wrong shape");
  if (observation.dim() != gamma.obs_dim()) throw ArgumentError("filtering_cost: observation dimension mismatch");
  const SampledPath& grid = observation.base();
  std::size_t last = index_of(grid, t);
  double cost = cfg.g ? cfg.g(q0, r0) : 0.0;
  Vector q = q0;
  Matrix r = r0;
  auto d = static_cast<Eigen::Index>(gamma.obs_dim());
  for (std::size_t i = 0; i < last; ++i) {
    const ModelCoefficients& k = gamma.at(grid.time(i));
    double h = grid.time(i + 1) - grid.time(i);
    Vector dz = grid.increment_between(i, i + 1);
    const Matrix& zz = observation.segment_levels()[i];
    Matrix gain = r * k.c.transpose() + k.sigma * k.rho;
    Vector cq = k.c * q;
    Matrix ck = k.c * gain;
    double rough = 0.0;
    for (Eigen::Index b = 0; b < d; ++b) {
      rough -= cq[b] * dz[b];
      for (Eigen::Index a = 0; a < d; ++a) rough -= ck(b, a) * zz(a, b);
    }
    double w = (cfg.z ? cfg.z(q, r, k) : 0.0) + 0.5 * (cq.squaredNorm() + ck.trace());
    cost += rough + w * h;
    bool clamped = false;
    detail::filter_step(k, dz, h, q, r, clamped);
    if (!q.allFinite() || !r.allFinite()) throw DivergenceError("filtering_cost: non-finite state", i + 1);
  }
  return cost;
}

}  // namespace roughkit
