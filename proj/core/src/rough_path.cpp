#include "roughkit/rough_path.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "roughkit/errors.hpp"
#include "roughkit/path_io.hpp"

namespace roughkit {

RoughPath::RoughPath(SampledPath base, std::vector<Matrix> segment_levels)
    : base_(std::move(base)), segments_(std::move(segment_levels)) {
  if (segments_.size() != base_.segments())
    throw ArgumentError("RoughPath: expected " + std::to_string(base_.segments()) + " segment matrices, got " +
                        std::to_string(segments_.size()));
  auto d = static_cast<Eigen::Index>(base_.dim());
  for (const auto& m : segments_)
    if (m.rows() != d || m.cols() != d) throw ArgumentError("RoughPath: segment matrix must be d x d");
}

Matrix RoughPath::second_level_between(std::size_t i, std::size_t j) const {
  if (i > j || j >= size()) throw ArgumentError("second_level_between: need i <= j < size");
  auto d = static_cast<Eigen::Index>(dim());
  Matrix acc = Matrix::Zero(d, d);
  Vector x = Vector::Zero(d);
  for (std::size_t k = i; k < j; ++k) {
    Vector delta = base_.value(k + 1) - base_.value(k);
    acc += segments_[k] + x * delta.transpose();
    x += delta;
  }
  return acc;
}

Vector RoughPath::increment(double s, double t) const {
  std::size_t i = base_.require_grid_index(s);
  std::size_t j = base_.require_grid_index(t);
  if (i > j) throw ArgumentError("increment: s > t");
  return increment_between(i, j);
}

Matrix RoughPath::second_level(double s, double t) const {
  std::size_t i = base_.require_grid_index(s);
  std::size_t j = base_.require_grid_index(t);
  if (i > j) throw ArgumentError("second_level: s > t");
  return second_level_between(i, j);
}

void RoughPath::second_level_column(std::size_t j, std::vector<Matrix>& out) const {
  auto d = static_cast<Eigen::Index>(dim());
  out.resize(j + 1);
  out[j] = Matrix::Zero(d, d);
  for (std::size_t i = j; i-- > 0;) {
    Vector delta = base_.value(i + 1) - base_.value(i);
    Vector tail = base_.value(j) - base_.value(i + 1);
    out[i] = segments_[i] + delta * tail.transpose() + out[i + 1];
  }
}

double RoughPath::symmetry_defect() const {
  double worst = 0.0;
  std::vector<Matrix> column;
  for (std::size_t j = 1; j < size(); ++j) {
    second_level_column(j, column);
    for (std::size_t i = 0; i < j; ++i) {
      Vector z = base_.value(j) - base_.value(i);
      Matrix sym = 0.5 * (column[i] + column[i].transpose()) - 0.5 * z * z.transpose();
      worst = std::max(worst, sym.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double RoughPath::chen_defect() const {
  std::size_t n = size();
  std::size_t d = dim();
  std::size_t dd = d * d;
  // all-pairs table, flat row-major d x d blocks at [(i * n + j) * dd]
  std::vector<double> table(n * n * dd, 0.0);
  std::vector<Matrix> column;
  for (std::size_t j = 1; j < n; ++j) {
    second_level_column(j, column);
    for (std::size_t i = 0; i < j; ++i)
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
          table[(i * n + j) * dd + a * d + b] = column[i](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  std::vector<double> values(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a) values[i * d + a] = base_.value(i)[static_cast<Eigen::Index>(a)];
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i; k < n; ++k)
      for (std::size_t j = k; j < n; ++j) {
        const double* zij = &table[(i * n + j) * dd];
        const double* zik = &table[(i * n + k) * dd];
        const double* zkj = &table[(k * n + j) * dd];
        for (std::size_t a = 0; a < d; ++a) {
          double xa = values[k * d + a] - values[i * d + a];
          for (std::size_t b = 0; b < d; ++b) {
            double xb = values[j * d + b] - values[k * d + b];
            double defect = zij[a * d + b] - zik[a * d + b] - zkj[a * d + b] - xa * xb;
            worst = std::max(worst, std::abs(defect));
          }
        }
      }
  return worst;
}

RoughPath canonical_lift(const SampledPath& path) {
  std::vector<Matrix> segs;
  segs.reserve(path.segments());
  for (std::size_t i = 0; i < path.segments(); ++i) {
    Vector delta = path.value(i + 1) - path.value(i);
    segs.push_back(0.5 * delta * delta.transpose());
  }
  return RoughPath(path, std::move(segs));
}

Matrix chen_extend(const RoughPath& rp, double s, double r, double t) {
  if (!(s <= r && r <= t)) throw ArgumentError("chen_extend: need s <= r <= t");
  std::size_t i = rp.base().require_grid_index(s);
  std::size_t k = rp.base().require_grid_index(r);
  std::size_t j = rp.base().require_grid_index(t);
  return rp.second_level_between(i, k) + rp.second_level_between(k, j) +
         rp.increment_between(i, k) * rp.increment_between(k, j).transpose();
}

namespace {

void require_same_grid(const SampledPath& a, const SampledPath& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) throw ArgumentError("rough paths must share grid and dimension");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a.time(i) - b.time(i)) > kTimeTolerance) throw ArgumentError("rough paths must share the time grid");
}

// p-variation DP where the distances into sample j arrive as a column.
double column_pvar(std::size_t n, double p, const std::function<void(std::size_t, std::vector<double>&)>& column) {
  std::vector<double> best(n, 0.0);
  std::vector<double> dist;
  for (std::size_t j = 1; j < n; ++j) {
    column(j, dist);
    double top = -1.0;
    for (std::size_t i = 0; i < j; ++i) top = std::max(top, best[i] + std::pow(dist[i], p));
    best[j] = top;
  }
  return std::pow(best[n - 1], 1.0 / p);
}

}  // namespace

double second_level_pvar(const RoughPath& rp, double p) {
  if (!(p > 0.0)) throw ArgumentError("p must be positive");
  if (rp.size() == 1) return 0.0;
  std::vector<Matrix> col;
  return column_pvar(rp.size(), p / 2.0, [&](std::size_t j, std::vector<double>& dist) {
    rp.second_level_column(j, col);
    dist.resize(j);
    for (std::size_t i = 0; i < j; ++i) dist[i] = col[i].cwiseAbs().maxCoeff();
  });
}

double rough_metric(const RoughPath& a, const RoughPath& b, double p, MetricMode mode) {
  if (!(p >= 1.0)) throw ArgumentError("rough_metric: p must be >= 1");
  require_same_grid(a.base(), b.base());
  std::size_t n = a.size();
  if (n == 1) return 0.0;
  std::vector<Matrix> ca;
  std::vector<Matrix> cb;
  auto level1 = [&](std::size_t i, std::size_t j) {
    return ((a.base().value(j) - a.base().value(i)) - (b.base().value(j) - b.base().value(i))).norm();
  };
  if (mode == MetricMode::pvar) {
    double first = pvar_dp(n, level1, p);
    double second = column_pvar(n, p / 2.0, [&](std::size_t j, std::vector<double>& dist) {
      a.second_level_column(j, ca);
      b.second_level_column(j, cb);
      dist.resize(j);
      for (std::size_t i = 0; i < j; ++i) dist[i] = (ca[i] - cb[i]).cwiseAbs().maxCoeff();
    });
    return first + second;
  }
  double first = 0.0;
  double second = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    a.second_level_column(j, ca);
    b.second_level_column(j, cb);
    for (std::size_t i = 0; i < j; ++i) {
      double dt = a.base().time(j) - a.base().time(i);
      first = std::max(first, level1(i, j) / std::pow(dt, 1.0 / p));
      second = std::max(second, (ca[i] - cb[i]).cwiseAbs().maxCoeff() / std::pow(dt, 2.0 / p));
    }
  }
  return first + second;
}

SampledPath brownian_path(std::uint64_t seed, std::size_t n_steps, double horizon, std::size_t dim) {
  if (n_steps == 0) throw ArgumentError("brownian_path: n_steps must be >= 1");
  if (dim == 0) throw ArgumentError("brownian_path: dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double scale = std::sqrt(horizon / static_cast<double>(n_steps));
  auto d = static_cast<Eigen::Index>(dim);
  std::vector<Vector> values;
  values.reserve(n_steps + 1);
  values.push_back(Vector::Zero(d));
  for (std::size_t k = 0; k < n_steps; ++k) {
    Vector next = values.back();
    for (Eigen::Index a = 0; a < d; ++a) next[a] += scale * normal(rng);
    values.push_back(std::move(next));
  }
  return SampledPath(uniform_times(n_steps, horizon), std::move(values));
}

RoughPath brownian_rough_path(std::uint64_t seed, std::size_t n_steps, double horizon, std::size_t dim) {
  return canonical_lift(brownian_path(seed, n_steps, horizon, dim));
}

std::string rough_path_to_json(const RoughPath& rp) {
  std::ostringstream csv;
  write_path_csv(csv, rp.base());
  nlohmann::ordered_json doc;
  doc["version"] = "rp-v1";
  doc["dim"] = rp.dim();
  doc["base_csv"] = csv.str();
  nlohmann::ordered_json segs = nlohmann::ordered_json::array();
  for (const auto& m : rp.segment_levels()) {
    std::vector<double> flat;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    segs.push_back(flat);
  }
  doc["second_level"] = std::move(segs);
  return doc.dump();
}

RoughPath rough_path_from_json(const std::string& text) try {
  auto doc = nlohmann::json::parse(text);
  if (!doc.is_object() || doc.value("version", "") != "rp-v1") throw ParseError("expected rp-v1 rough path document");
  std::istringstream csv(doc.at("base_csv").get<std::string>());
  SampledPath base = read_path_csv(csv);
  auto d = static_cast<Eigen::Index>(base.dim());
  std::vector<Matrix> segs;
  for (const auto& flat : doc.at("second_level")) {
    auto v = flat.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != d * d) throw ParseError("segment matrix has wrong size");
    Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) m(r, c) = v[static_cast<std::size_t>(r * d + c)];
    segs.push_back(std::move(m));
  }
  return RoughPath(std::move(base), std::move(segs));
} catch (const nlohmann::json::exception& e) {
  throw ParseError(e.what());
}

}  // namespace roughkit
