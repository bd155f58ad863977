#include "roughkit/filtering.hpp"

#include <algorithm>
#include <memory>
#include <random>

#include <Eigen/Eigenvalues>

#include "json.hpp"

#include "roughkit/errors.hpp"
#include "roughkit/path_io.hpp"
#include "roughkit/rough_integration.hpp"
#include "filter_step.hpp"

namespace roughkit {

namespace {

bool psd(const Matrix& m, double tol) {
  if (m.rows() == 1) return m(0, 0) >= -tol;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

// Symmetric square root of a PSD matrix, negative eigenvalues treated as 0.
Matrix psd_sqrt(const Matrix& m) {
  if (m.rows() == 1) return Matrix::Constant(1, 1, std::sqrt(std::max(m(0, 0), 0.0)));
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Matrix correlation_gap(const ModelCoefficients& k) {
  return Matrix::Identity(k.rho.rows(), k.rho.rows()) - k.rho * k.rho.transpose();
}

void check_uniform(const SampledPath& path) {
  if (path.size() < 2) throw ArgumentError("observation needs at least two samples");
  double h = path.horizon() / static_cast<double>(path.segments());
  for (std::size_t i = 0; i < path.segments(); ++i)
    if (std::abs(path.time(i + 1) - path.time(i) - h) > 1e-9 * std::max(1.0, h))
      throw ArgumentError("observation must lie on a uniform grid");
}

std::size_t last_index(const SampledPath& path, double until) {
  if (!std::isfinite(until)) return path.size() - 1;
  return path.require_grid_index(until);
}

void check_states(const SampledPath& observation, const std::vector<FilterState>& states) {
  if (states.size() != observation.size()) throw ArgumentError("one filter state per observation sample required");
  for (std::size_t i = 0; i < states.size(); ++i)
    if (std::abs(states[i].t - observation.time(i)) > kTimeTolerance)
      throw ArgumentError("filter states and observation have different grids");
}

}  // namespace

LinearGaussianModel LinearGaussianModel::constant(ModelCoefficients coeffs, Vector mu0, Matrix sigma0,
                                                  double horizon) {
  LinearGaussianModel m;
  m.starts = {0.0};
  m.pieces = {std::move(coeffs)};
  m.mu0 = std::move(mu0);
  m.sigma0 = std::move(sigma0);
  m.horizon = horizon;
  m.check_shapes();
  return m;
}

const ModelCoefficients& LinearGaussianModel::at(double t) const {
  auto it = std::upper_bound(starts.begin(), starts.end(), t + kTimeTolerance);
  std::size_t j = it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
  return pieces.at(std::min(j, pieces.size() - 1));
}

void LinearGaussianModel::check_shapes() const {
  if (pieces.empty() || starts.size() != pieces.size()) throw ArgumentError("model: one start time per piece");
  if (std::abs(starts.front()) > kTimeTolerance) throw ArgumentError("model: first piece must start at 0");
  for (std::size_t j = 1; j < starts.size(); ++j)
    if (!(starts[j] > starts[j - 1])) throw ArgumentError("model: piece starts must increase");
  if (!(horizon > starts.back())) throw ArgumentError("model: horizon must exceed the last piece start");
  auto m = mu0.size();
  if (m == 0) throw ArgumentError("model: signal dimension must be positive");
  if (sigma0.rows() != m || sigma0.cols() != m) throw ArgumentError("model: Sigma0 must be m x m");
  if ((sigma0 - sigma0.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ArgumentError("model: Sigma0 not symmetric");
  auto l = pieces.front().sigma.cols();
  auto d = pieces.front().c.rows();
  if (l == 0 || d == 0) throw ArgumentError("model: noise and observation dimensions must be positive");
  for (const auto& k : pieces) {
    if (k.alpha.rows() != m || k.alpha.cols() != m) throw ArgumentError("model: alpha must be m x m");
    if (k.sigma.rows() != m || k.sigma.cols() != l) throw ArgumentError("model: sigma must be m x l");
    if (k.c.rows() != d || k.c.cols() != m) throw ArgumentError("model: c must be d x m");
    if (k.rho.rows() != l || k.rho.cols() != d) throw ArgumentError("model: rho must be l x d");
    if (!k.alpha.allFinite() || !k.sigma.allFinite() || !k.c.allFinite() || !k.rho.allFinite())
      throw ArgumentError("model: non-finite coefficient");
  }
}

bool LinearGaussianModel::admissible() const {
  check_shapes();
  if (!psd(sigma0, 1e-10)) return false;
  return std::all_of(pieces.begin(), pieces.end(), [](const ModelCoefficients& k) { return psd(correlation_gap(k), 1e-10); });
}

void LinearGaussianModel::validate() const {
  if (!admissible()) throw ModelError("model: I - rho rho^T or Sigma0 is not positive semi-definite");
}

SimulatedPair simulate_pair(const LinearGaussianModel& model, std::uint64_t seed, std::size_t n_steps) {
  model.validate();
  std::vector<double> times = uniform_times(n_steps, model.horizon);
  auto m = static_cast<Eigen::Index>(model.signal_dim());
  auto l = static_cast<Eigen::Index>(model.noise_dim());
  auto d = static_cast<Eigen::Index>(model.obs_dim());
  std::vector<Matrix> mix;
  for (const auto& k : model.pieces) mix.push_back(psd_sqrt(correlation_gap(k)));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
  };
  Vector s = model.mu0 + psd_sqrt(model.sigma0) * draw(m);
  Vector y = Vector::Zero(d);
  std::vector<Vector> signal{s};
  std::vector<Vector> obs{y};
  for (std::size_t i = 0; i < n_steps; ++i) {
    double h = times[i + 1] - times[i];
    double root = std::sqrt(h);
    auto it = std::upper_bound(model.starts.begin(), model.starts.end(), times[i] + kTimeTolerance);
    std::size_t j = std::min(static_cast<std::size_t>(it - model.starts.begin()) - 1, model.pieces.size() - 1);
    const ModelCoefficients& k = model.pieces[j];
    Vector db2 = root * draw(d);
    Vector db1 = k.rho * db2 + mix[j] * (root * draw(l));
    Vector s_next = s + h * (k.alpha * s) + k.sigma * db1;
    y += h * (k.c * s) + db2;
    s = std::move(s_next);
    signal.push_back(s);
    obs.push_back(y);
  }
  return SimulatedPair{SampledPath(times, std::move(signal)), SampledPath(times, std::move(obs))};
}

namespace detail {

void filter_step(const ModelCoefficients& k, const Vector& dy, double h, Vector& q, Matrix& r, bool& clamped) {
  Matrix gain = r * k.c.transpose() + k.sigma * k.rho;
  Vector q_next = q + h * (k.alpha * q) + gain * (dy - h * (k.c * q));
  Matrix r_next = r + h * (k.sigma * k.sigma.transpose() + k.alpha * r + r * k.alpha.transpose() -
                           gain * gain.transpose());
  r_next = 0.5 * (r_next + r_next.transpose()).eval();
  clamped = false;
  if (r_next.rows() == 1) {
    if (r_next(0, 0) < -1e-8) {
      r_next(0, 0) = 0.0;
      clamped = true;
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(r_next);
    if (es.eigenvalues().minCoeff() < -1e-8) {
      Vector ev = es.eigenvalues();
      for (Eigen::Index a = 0; a < ev.size(); ++a)
        if (ev[a] < -1e-8) ev[a] = 0.0;
      r_next = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
      r_next = 0.5 * (r_next + r_next.transpose()).eval();
      clamped = true;
    }
  }
  q = std::move(q_next);
  r = std::move(r_next);
}

}  // namespace detail

std::vector<FilterState> kalman_bucy(const LinearGaussianModel& model, const SampledPath& observation) {
  model.check_shapes();
  check_uniform(observation);
  if (observation.dim() != model.obs_dim()) throw ArgumentError("observation dimension does not match c");
  std::vector<FilterState> states;
  states.reserve(observation.size());
  Vector q = model.mu0;
  Matrix r = model.sigma0;
  states.push_back(FilterState{0.0, q, r, false});
  for (std::size_t i = 0; i + 1 < observation.size(); ++i) {
    double h = observation.time(i + 1) - observation.time(i);
    bool clamped = false;
    detail::filter_step(model.at(observation.time(i)), observation.increment_between(i, i + 1), h, q, r, clamped);
    if (!q.allFinite() || !r.allFinite()) throw DivergenceError("kalman_bucy: non-finite state", i + 1);
    states.push_back(FilterState{observation.time(i + 1), q, r, clamped});
  }
  return states;
}

SampledPath innovation(const LinearGaussianModel& model, const SampledPath& observation,
                       const std::vector<FilterState>& states) {
  check_states(observation, states);
  std::vector<Vector> v{Vector::Zero(static_cast<Eigen::Index>(observation.dim()))};
  for (std::size_t i = 0; i + 1 < observation.size(); ++i) {
    double h = observation.time(i + 1) - observation.time(i);
    const ModelCoefficients& k = model.at(observation.time(i));
    v.push_back(v.back() + observation.increment_between(i, i + 1) - h * (k.c * states[i].q));
  }
  return SampledPath(std::vector<double>(observation.times().begin(), observation.times().end()), std::move(v));
}

double neg_log_likelihood_ito(const LinearGaussianModel& model, const SampledPath& observation,
                              const std::vector<FilterState>& states, double until) {
  check_states(observation, states);
  std::size_t last = last_index(observation, until);
  double total = 0.0;
  for (std::size_t i = 0; i < last; ++i) {
    double h = observation.time(i + 1) - observation.time(i);
    Vector cq = model.at(observation.time(i)).c * states[i].q;
    total += -cq.dot(observation.increment_between(i, i + 1)) + 0.5 * cq.squaredNorm() * h;
  }
  return total;
}

double neg_log_likelihood_pathwise(const LinearGaussianModel& model, const RoughPath& observation,
                                   const std::vector<FilterState>& states, double until) {
  check_states(observation.base(), states);
  const SampledPath& grid = observation.base();
  std::size_t last = last_index(grid, until);
  std::vector<Vector> psi;
  std::vector<Matrix> psi_prime;
  double drift = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ModelCoefficients& k = model.at(grid.time(i));
    Matrix ck = k.c * (states[i].R * k.c.transpose() + k.sigma * k.rho);
    Vector cq = k.c * states[i].q;
    psi.push_back(-cq);
    psi_prime.push_back(-ck);
    if (i < last) drift += 0.5 * (cq.squaredNorm() + ck.trace()) * (grid.time(i + 1) - grid.time(i));
  }
  auto ref = std::make_shared<const RoughPath>(observation);
  ControlledPath y(SampledPath(std::vector<double>(grid.times().begin(), grid.times().end()), std::move(psi)),
                   std::move(psi_prime), ref);
  return rough_integral(y, observation, 0.0, grid.time(last))[0] + drift;
}

double covariation_estimate(const LinearGaussianModel& model, const SampledPath& observation,
                            const std::vector<FilterState>& states) {
  check_states(observation, states);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < observation.size(); ++i) {
    Vector cq0 = model.at(observation.time(i)).c * states[i].q;
    Vector cq1 = model.at(observation.time(i)).c * states[i + 1].q;
    total += (cq1 - cq0).dot(observation.increment_between(i, i + 1));
  }
  return total;
}

namespace {

nlohmann::ordered_json matrix_json(const Matrix& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from(const nlohmann::json& j, const char* name) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) throw ParseError(std::string(name) + " must be an array of rows");
  auto rows = static_cast<Eigen::Index>(j.size());
  auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError(std::string(name) + " has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string model_to_json(const LinearGaussianModel& model) {
  nlohmann::ordered_json doc;
  doc["version"] = "lgm-v1";
  doc["horizon"] = model.horizon;
  doc["mu0"] = std::vector<double>(model.mu0.data(), model.mu0.data() + model.mu0.size());
  doc["Sigma0"] = matrix_json(model.sigma0);
  nlohmann::ordered_json pieces = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < model.pieces.size(); ++j) {
    nlohmann::ordered_json p;
    p["start"] = model.starts[j];
    p["alpha"] = matrix_json(model.pieces[j].alpha);
    p["sigma"] = matrix_json(model.pieces[j].sigma);
    p["c"] = matrix_json(model.pieces[j].c);
    p["rho"] = matrix_json(model.pieces[j].rho);
    pieces.push_back(std::move(p));
  }
  doc["pieces"] = std::move(pieces);
  return doc.dump(2);
}

LinearGaussianModel model_from_json(const std::string& text) {
  LinearGaussianModel model;
  try {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (!doc.is_object() || doc.value("version", "") != "lgm-v1") throw ParseError("expected lgm-v1 model document");
    model.horizon = doc.at("horizon").get<double>();
    auto mu = doc.at("mu0").get<std::vector<double>>();
    model.mu0 = Eigen::Map<const Vector>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    model.sigma0 = matrix_from(doc.at("Sigma0"), "Sigma0");
    model.starts.clear();
    for (const auto& p : doc.at("pieces")) {
      model.starts.push_back(p.value("start", 0.0));
      model.pieces.push_back(ModelCoefficients{matrix_from(p.at("alpha"), "alpha"), matrix_from(p.at("sigma"), "sigma"),
                                               matrix_from(p.at("c"), "c"), matrix_from(p.at("rho"), "rho")});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
  model.check_shapes();
  return model;
}

void write_filter_csv(std::ostream& out, const std::vector<FilterState>& states) {
  if (states.empty()) return;
  auto m = states.front().q.size();
  out << "t";
  for (Eigen::Index a = 0; a < m; ++a) out << ",q" << a + 1;
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) out << ",R" << a + 1 << b + 1;
  out << "\n";
  for (const auto& s : states) {
    out << format_double(s.t);
    for (Eigen::Index a = 0; a < m; ++a) out << "," << format_double(s.q[a]);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) out << "," << format_double(s.R(a, b));
    out << "\n";
  }
}

}  // namespace roughkit
