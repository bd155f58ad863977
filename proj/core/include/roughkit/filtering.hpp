#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "roughkit/paths.hpp"
#include "roughkit/rough_path.hpp"

namespace roughkit {

/// Coefficients of the linear signal/observation system on one time piece.
/// alpha m x m, sigma m x l, c d x m, rho l x d.
struct ModelCoefficients {
  Matrix alpha;
  Matrix sigma;
  Matrix c;
  Matrix rho;
};

/// dS = alpha S dt + sigma dB1, dY = c S dt + dB2 with d<B1, B2> = rho dt and S_0 ~ N(mu0, Sigma0).
///
/// pieces[j] applies on [starts[j], starts[j+1]); starts[0] = 0 and the last piece runs to horizon.
struct LinearGaussianModel {
  std::vector<double> starts{0.0};
  std::vector<ModelCoefficients> pieces;
  Vector mu0;
  Matrix sigma0;
  double horizon = 1.0;

  static LinearGaussianModel constant(ModelCoefficients coeffs, Vector mu0, Matrix sigma0, double horizon);

  std::size_t signal_dim() const { return static_cast<std::size_t>(mu0.size()); }
  std::size_t noise_dim() const { return static_cast<std::size_t>(pieces.front().sigma.cols()); }
  std::size_t obs_dim() const { return static_cast<std::size_t>(pieces.front().c.rows()); }

  /// Coefficients in force at time t (right-continuous).
  const ModelCoefficients& at(double t) const;

  /// Shapes, knots and Sigma0 symmetry; throws ArgumentError.
  void check_shapes() const;
  /// I - rho rho^T >= -1e-10 and Sigma0 PSD at every piece.
  bool admissible() const;
  /// check_shapes plus admissibility; throws ModelError when inadmissible.
  void validate() const;
};

struct FilterState {
  double t = 0.0;
  Vector q;
  Matrix R;
  bool clamped = false;  ///< an eigenvalue of R fell below -1e-8 and was reset to 0
};

struct SimulatedPair {
  SampledPath signal;
  SampledPath observation;
};

/// Euler-Maruyama on a uniform grid with dB1 = rho dB2 + L xi, L L^T = I - rho rho^T.
SimulatedPair simulate_pair(const LinearGaussianModel& model, std::uint64_t seed, std::size_t n_steps);

/// Euler march of the Kalman-Bucy mean and Riccati covariance along the observation grid.
std::vector<FilterState> kalman_bucy(const LinearGaussianModel& model, const SampledPath& observation);

/// V_t = Y_t - int_0^t c q ds, left-point on the grid.
SampledPath innovation(const LinearGaussianModel& model, const SampledPath& observation,
                       const std::vector<FilterState>& states);

/// -sum c q_i . dY_i + 1/2 sum |c q_i|^2 h_i over cells ending at or before `until`.
double neg_log_likelihood_ito(const LinearGaussianModel& model, const SampledPath& observation,
                              const std::vector<FilterState>& states, double until = INFINITY);

/// Rough integral of psi = -c q against the lifted observation (psi' = -c(R c^T + sigma rho))
/// plus 1/2 int (|c q|^2 + tr(c(R c^T + sigma rho))) ds.
double neg_log_likelihood_pathwise(const LinearGaussianModel& model, const RoughPath& observation,
                                   const std::vector<FilterState>& states, double until = INFINITY);

/// Sum over grid cells of Delta(cq) . Delta Y, the discrete covariation of cq with Y.
double covariation_estimate(const LinearGaussianModel& model, const SampledPath& observation,
                            const std::vector<FilterState>& states);

using PriorIntegrand = std::function<double(const Vector& q, const Matrix& R, const ModelCoefficients& gamma)>;
using InitialCost = std::function<double(const Vector& mu0, const Matrix& sigma0)>;

/// Penalty (beta / k1)^k2. beta is defined up to a constant; it is measured from the
/// reference model when one is set, otherwise from the smallest beta in the candidate set.
struct PenaltyConfig {
  double k1 = 1.0;
  double k2 = 1.0;
  PriorIntegrand z;  ///< empty means 0
  InitialCost g;     ///< empty means 0
  std::vector<LinearGaussianModel> reference;  ///< at most one model

  void validate() const;
};

/// beta = int_0^t z ds + g(mu0, Sigma0) + pathwise negative log-likelihood, +inf when inadmissible.
double penalty(const LinearGaussianModel& candidate, const SampledPath& observation, const PenaltyConfig& cfg,
               double until = INFINITY);

using TestFunction = std::function<double(const Vector&)>;

/// Filter output and raw penalty of one candidate at time t.
struct CandidateSummary {
  Vector q;
  Matrix R;
  double beta = INFINITY;
  double weight = INFINITY;  ///< (max(beta - anchor, 0) / k1)^k2
};

std::vector<CandidateSummary> summarize_candidates(const std::vector<LinearGaussianModel>& candidates,
                                                   const SampledPath& observation, const PenaltyConfig& cfg,
                                                   double t);

/// E[phi(X)] for X ~ N(mean, cov): Gauss-Hermite (order 20 per axis) up to dimension 2,
/// 1e5-sample Monte Carlo with a fixed seed beyond.
double gaussian_expectation(const TestFunction& phi, const Vector& mean, const Matrix& cov);

/// max over candidates of E[phi(S_t) | q_t, R_t] - penalty.
double robust_expectation(const TestFunction& phi, const std::vector<LinearGaussianModel>& candidates,
                          const SampledPath& observation, const PenaltyConfig& cfg, double t);

/// argmin over xi of the robust expectation of (phi(S_t) - xi)^2, by golden-section search.
double robust_point_estimate(const TestFunction& phi, const std::vector<LinearGaussianModel>& candidates,
                             const SampledPath& observation, const PenaltyConfig& cfg, double t);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// [-E(-phi), E(phi)] under the robust expectation.
Interval robust_confidence_interval(const TestFunction& phi, const std::vector<LinearGaussianModel>& candidates,
                                    const SampledPath& observation, const PenaltyConfig& cfg, double t);

struct RobustReport {
  double estimate = 0.0;
  Interval ci;
  std::size_t best_candidate = 0;  ///< smallest beta
  std::vector<double> penalties;   ///< (beta - anchor)^+ / k1 raised to k2
  std::vector<double> betas;
};

RobustReport robust_report(const TestFunction& phi, const std::vector<LinearGaussianModel>& candidates,
                           const SampledPath& observation, const PenaltyConfig& cfg, double t);

/// int_0^t w ds + int_0^t psi dzeta + g(q0, R0) for the piecewise-constant control gamma
/// (the pieces of `gamma`), with (q, R) started from (q0, R0).
double filtering_cost(const LinearGaussianModel& gamma, const Vector& q0, const Matrix& r0,
                      const RoughPath& observation, const PenaltyConfig& cfg, double t);

/// Model spec JSON `{"version": "lgm-v1", "horizon", "mu0", "Sigma0", "pieces": [{"start", "alpha",
/// "sigma", "c", "rho"}]}` with matrices as arrays of rows.
std::string model_to_json(const LinearGaussianModel& model);
LinearGaussianModel model_from_json(const std::string& text);

/// CSV with header t,q1..qm,R11,R12,..,Rmm.
void write_filter_csv(std::ostream& out, const std::vector<FilterState>& states);

}  // namespace roughkit
