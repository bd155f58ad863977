#include "roughkit/signatures.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit/rough_path.hpp"

namespace roughkit {

SampledPath time_augment(const SampledPath& path) {
  std::vector<Vector> values;
  values.reserve(path.size());
  auto d = static_cast<Eigen::Index>(path.dim());
  for (std::size_t i = 0; i < path.size(); ++i) {
    Vector v(d + 1);
    v[0] = path.time(i);
    v.tail(d) = path.value(i);
    values.push_back(std::move(v));
  }
  return SampledPath(std::vector<double>(path.times().begin(), path.times().end()), std::move(values));
}

Signature signature(const SampledPath& path, std::size_t level, double s, double t) {
  if (s > t) throw DomainError("signature: s > t");
  Vector xs = path.at(s);
  Vector xt = path.at(t);
  TruncatedTensor acc = TruncatedTensor::unit(path.dim(), level);
  Vector prev = xs;
  for (std::size_t i = 0; i < path.size(); ++i) {
    double ti = path.time(i);
    if (ti <= s + kTimeTolerance || ti >= t - kTimeTolerance) continue;
    acc = tensor_mul(acc, TruncatedTensor::exp_of_vector(path.value(i) - prev, level));
    prev = path.value(i);
  }
  if (t > s) acc = tensor_mul(acc, TruncatedTensor::exp_of_vector(xt - prev, level));
  return Signature{std::move(acc), s, t};
}

Signature signature(const SampledPath& path, std::size_t level) { return signature(path, level, 0.0, path.horizon()); }

std::vector<TruncatedTensor> running_signature(const SampledPath& path, std::size_t level) {
  std::vector<TruncatedTensor> out;
  out.reserve(path.size());
  out.push_back(TruncatedTensor::unit(path.dim(), level));
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    out.push_back(tensor_mul(out.back(), TruncatedTensor::exp_of_vector(path.value(i + 1) - path.value(i), level)));
  return out;
}

std::vector<Signature> signature_batch(const std::vector<SampledPath>& paths, std::size_t level) {
  std::vector<Signature> out(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) { out[i] = signature(paths[i], level); });
  return out;
}

SampledPath stopped_extension(const StoppedRoughPath& sp, const std::vector<double>& times) {
  double cut = std::clamp(sp.cut, 0.0, sp.underlying.horizon());
  std::vector<Vector> values;
  values.reserve(times.size());
  for (double s : times) {
    Vector v = sp.underlying.at(std::min(s, cut));
    v[0] = s;
    values.push_back(std::move(v));
  }
  return SampledPath(times, std::move(values));
}

double stopped_metric(const StoppedRoughPath& a, const StoppedRoughPath& b, double p) {
  if (!(p >= 1.0)) throw ArgumentError("stopped_metric: p must be >= 1");
  if (p >= 3.0) throw ArgumentError("stopped_metric: p >= 3 needs level-3 data");
  if (a.underlying.dim() != b.underlying.dim()) throw ArgumentError("stopped_metric: dimension mismatch");
  for (const auto* sp : {&a, &b})
    if (sp->cut < -kTimeTolerance || sp->cut > sp->underlying.horizon() + kTimeTolerance)
      throw DomainError("stopped_metric: cut outside the path domain");
  double horizon = std::max(a.underlying.horizon(), b.underlying.horizon());
  std::vector<double> extra{a.cut, b.cut, horizon};
  std::vector<double> grid = merge_grids(a.underlying.times(), b.underlying.times());
  grid = merge_grids(grid, extra);
  SampledPath ea = stopped_extension(a, grid);
  SampledPath eb = stopped_extension(b, grid);
  double gap = std::abs(a.cut - b.cut);
  if (p < 2.0) {
    double lvl1 = pvar_dp(grid.size(), [&](std::size_t i, std::size_t j) {
      return ((ea.value(j) - ea.value(i)) - (eb.value(j) - eb.value(i))).norm();
    }, p);
    return lvl1 + gap;
  }
  return rough_metric(canonical_lift(ea), canonical_lift(eb), p) + gap;
}

IdentityReport quadratic_shuffle_identity_check(const LinearFunctional& l, const SampledPath& path, double t,
                                                std::size_t level, std::size_t fine_steps) {
  std::size_t deg = word_degree(l);
  if (!l.is_zero() && 2 * deg + 1 > level)
    throw ArgumentError("quadratic_shuffle_identity_check: (l sh l)1 has degree " + std::to_string(2 * deg + 1) +
                        " above level " + std::to_string(level));
  if (static_cast<std::size_t>(l.max_letter()) > path.dim()) throw ArgumentError("functional uses unknown letters");
  IdentityReport rep;
  std::size_t seg_end = path.segment_index(t);
  std::size_t per_segment = std::max<std::size_t>(1, (fine_steps + path.segments() - 1) / std::max<std::size_t>(1, path.segments()));
  TruncatedTensor running = TruncatedTensor::unit(path.dim(), deg);
  double prev_f = pair(l, running);
  prev_f *= prev_f;
  double integral = 0.0;
  for (std::size_t i = 0; i <= seg_end && path.size() > 1; ++i) {
    double t0 = path.time(i);
    double t1 = std::min(path.time(i + 1), t);
    if (t1 <= t0) break;
    Vector x0 = path.value(i);
    Vector slope = (path.value(i + 1) - path.value(i)) / (path.time(i + 1) - path.time(i));
    double h = (t1 - t0) / static_cast<double>(per_segment);
    for (std::size_t k = 0; k < per_segment; ++k) {
      running = tensor_mul(running, TruncatedTensor::exp_of_vector(slope * h, deg));
      double f = pair(l, running);
      f *= f;
      integral += 0.5 * h * (prev_f + f);
      prev_f = f;
    }
  }
  rep.lhs = integral;
  LinearFunctional quad = shuffle_functional(l, l).append_letter(kTimeLetter);
  rep.rhs = l.is_zero() ? 0.0 : pair(quad, signature(path, level, 0.0, t).tensor);
  rep.abs_error = std::abs(rep.lhs - rep.rhs);
  double scale = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
  rep.rel_error = scale > 0.0 ? rep.abs_error / scale : 0.0;
  return rep;
}

LinearFunctional truncate_words(const LinearFunctional& l, std::size_t max_len) {
  LinearFunctional out;
  for (const auto& [w, c] : l.terms())
    if (w.size() <= max_len) out.add_term(w, c);
  return out;
}

DerivativeReport exp_shuffle_derivative_check(const LinearFunctional& l, const SampledPath& path, std::size_t level,
                                              double h) {
  DerivativeReport rep;
  if (path.size() < 2) return rep;
  LinearFunctional e = exp_shuffle(l.append_letter(kTimeLetter), level);
  std::vector<TruncatedTensor> run = running_signature(path, level);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    double len = path.time(i + 1) - path.time(i);
    double step = std::min(h, 0.25 * len);
    Vector slope = (path.value(i + 1) - path.value(i)) / len;
    auto sig_at = [&](double offset) {
      return tensor_mul(run[i], TruncatedTensor::exp_of_vector(slope * offset, level));
    };
    double mid = 0.5 * len;
    double lhs = (pair(e, sig_at(mid + step)) - pair(e, sig_at(mid - step))) / (2.0 * step);
    TruncatedTensor g = sig_at(mid);
    double rhs = 0.0;
    for (const auto& [w, c] : l.terms()) {
      if (w.size() + 1 > level) continue;
      rhs += c * g.coeff(w) * pair(truncate_words(e, level - w.size() - 1), g);
    }
    rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(lhs - rhs));
    rep.max_rhs = std::max(rep.max_rhs, std::abs(rhs));
    ++rep.points;
  }
  return rep;
}

namespace {

double factorial(std::size_t m) {
  double f = 1.0;
  for (std::size_t k = 2; k <= m; ++k) f *= static_cast<double>(k);
  return f;
}

}  // namespace

TruncationReport exp_shuffle_truncation_error(const LinearFunctional& l, const TruncatedTensor& g, std::size_t level) {
  std::size_t deg = word_degree(l);
  if (g.level() < std::max(level, deg))
    throw ArgumentError("exp_shuffle_truncation_error: g must be truncated at level >= max(N, deg l)");
  TruncationReport rep;
  double exact = std::exp(pair(l, g));
  double approx = pair(exp_shuffle(l, level), project_up_to(g, level));
  rep.error = std::abs(exact - approx);
  if (deg == 0) {
    rep.hypothesis = true;
    rep.bound = 0.0;
    rep.holds = rep.error <= 1e-15 * exact;
    return rep;
  }
  double norm_l = l1_norm(l);
  double top_level = linf_norm_up_to(project_up_to(g, deg), deg);
  double level_deg = 0.0;
  for (double x : g.project(deg)) level_deg = std::max(level_deg, std::abs(x));
  std::size_t m = level / deg + 1;
  rep.bound = 4.0 * std::exp(l.coeff({})) * std::pow(norm_l * top_level, static_cast<double>(m)) / factorial(m);
  rep.hypothesis = static_cast<double>(level) > 2.0 * norm_l * static_cast<double>(deg) * level_deg;
  rep.holds = rep.error <= rep.bound;
  return rep;
}

double pvar_threshold_time(const SampledPath& path, double k, double p) {
  if (!(k > 0.0)) throw ArgumentError("pvar_threshold_time: k must be positive");
  std::vector<double> running = running_p_variation(path, p);
  for (std::size_t j = 0; j < running.size(); ++j)
    if (running[j] >= k) return path.time(j);
  return path.horizon();
}

namespace {

nlohmann::ordered_json nest(const std::vector<double>& flat, std::size_t offset, std::size_t depth, std::size_t dim) {
  if (depth == 0) return flat[offset];
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  std::size_t stride = 1;
  for (std::size_t k = 1; k < depth; ++k) stride *= dim;
  for (std::size_t a = 0; a < dim; ++a) arr.push_back(nest(flat, offset + a * stride, depth - 1, dim));
  return arr;
}

void flatten(const nlohmann::json& node, std::size_t depth, std::vector<double>& out) {
  if (depth == 0) {
    out.push_back(node.get<double>());
    return;
  }
  if (!node.is_array()) throw ParseError("signature level nesting is inconsistent");
  for (const auto& child : node) flatten(child, depth - 1, out);
}

}  // namespace

std::string signature_to_json(const Signature& sig) {
  nlohmann::ordered_json doc;
  doc["version"] = "sig-v1";
  doc["dim"] = sig.tensor.dim();
  doc["level"] = sig.tensor.level();
  doc["s"] = sig.s;
  doc["t"] = sig.t;
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (std::size_t n = 0; n <= sig.tensor.level(); ++n) levels.push_back(nest(sig.tensor.project(n), 0, n, sig.tensor.dim()));
  doc["levels"] = std::move(levels);
  return doc.dump();
}

Signature signature_from_json(const std::string& text) try {
  auto doc = nlohmann::json::parse(text);
  if (!doc.is_object() || doc.value("version", "") != "sig-v1") throw ParseError("expected sig-v1 signature document");
  auto dim = doc.at("dim").get<std::size_t>();
  auto level = doc.at("level").get<std::size_t>();
  const auto& levels = doc.at("levels");
  if (levels.size() != level + 1) throw ParseError("signature level count mismatch");
  std::vector<std::vector<double>> flat(level + 1);
  for (std::size_t n = 0; n <= level; ++n) flatten(levels[n], n, flat[n]);
  return Signature{TruncatedTensor::from_levels(dim, std::move(flat)), doc.at("s").get<double>(), doc.at("t").get<double>()};
} catch (const nlohmann::json::exception& e) {
  throw ParseError(e.what());
}

}  // namespace roughkit
