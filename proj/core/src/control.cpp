#include "roughkit/control.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"

namespace roughkit {

void ControlProblem::validate(const Vector& x, const Vector& a) const {
  if (!driver) throw ArgumentError("control problem needs a driver");
  if (!(eps >= 0.0)) throw ArgumentError("regularization weight eps must be >= 0");
  if (!(q_exp >= 1.0)) throw ArgumentError("regularization exponent q must be >= 1");
  if (lam) validate_diffusion_derivative(RdeCoefficients{b, lam, dlam}, x, a);
  if (psi.value) {
    if (!psi.jacobian) throw ArgumentError("psi needs its Jacobian");
    validate_one_form_jacobian(psi, x, a);
  }
}

const Vector& PiecewiseControl::at(double t) const {
  if (starts.empty() || starts.size() != values.size()) throw ArgumentError("PiecewiseControl: one value per piece");
  auto it = std::upper_bound(starts.begin(), starts.end(), t + kTimeTolerance);
  if (it == starts.begin()) throw DomainError("PiecewiseControl: time before the first piece");
  return values[static_cast<std::size_t>(it - starts.begin()) - 1];
}

void ControlGrid::validate(double horizon) const {
  if (n_knots == 0 || levels == 0) throw ArgumentError("ControlGrid: counts must be positive");
  if (lo.size() == 0 || lo.size() != hi.size()) throw ArgumentError("ControlGrid: bounds must share a positive dimension");
  if ((hi - lo).minCoeff() < 0.0) throw ArgumentError("ControlGrid: lo must not exceed hi");
  if (!(horizon > 0.0)) throw ArgumentError("ControlGrid: horizon must be positive");
}

double ControlGrid::knot_time(std::size_t k, double horizon) const {
  return horizon * static_cast<double>(k) / static_cast<double>(n_knots);
}

std::vector<Vector> ControlGrid::level_values() const {
  auto dim = lo.size();
  std::size_t count = 1;
  for (Eigen::Index c = 0; c < dim; ++c) count *= levels;
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    Vector u(dim);
    std::size_t rest = idx;
    for (Eigen::Index c = dim - 1; c >= 0; --c) {
      std::size_t level = rest % levels;
      rest /= levels;
      u[c] = levels == 1 ? lo[c] : lo[c] + (hi[c] - lo[c]) * static_cast<double>(level) / static_cast<double>(levels - 1);
    }
    out.push_back(std::move(u));
  }
  return out;
}

namespace {

// Driver restricted to samples i0..i1, re-based to start at time 0.
std::shared_ptr<const RoughPath> restrict_driver(const RoughPath& rp, std::size_t i0, std::size_t i1) {
  std::vector<double> times;
  std::vector<Vector> values;
  for (std::size_t j = i0; j <= i1; ++j) {
    times.push_back(rp.base().time(j) - rp.base().time(i0));
    values.push_back(rp.base().value(j));
  }
  std::vector<Matrix> segs(rp.segment_levels().begin() + static_cast<std::ptrdiff_t>(i0),
                           rp.segment_levels().begin() + static_cast<std::ptrdiff_t>(i1));
  return std::make_shared<const RoughPath>(SampledPath(std::move(times), std::move(values)), std::move(segs));
}

}  // namespace

Segment cost_segment(const ControlProblem& problem, double t, double r, const Vector& x, const Vector& a,
                     const PiecewiseControl& u) {
  if (!problem.driver) throw ArgumentError("control problem needs a driver");
  const RoughPath& rp = *problem.driver;
  std::size_t i0 = rp.base().require_grid_index(t);
  std::size_t i1 = rp.base().require_grid_index(r);
  if (i1 < i0) throw ArgumentError("cost_segment: need t <= r");
  Segment seg{0.0, x, a};
  if (i0 == i1) return seg;

  auto m = x.size();
  auto d = static_cast<Eigen::Index>(rp.dim());
  std::vector<Vector> gammas{a};
  std::vector<const Vector*> cell_u;
  for (std::size_t j = i0; j < i1; ++j) {
    const Vector& uj = u.at(rp.base().time(j));
    double dt = rp.base().time(j + 1) - rp.base().time(j);
    const Vector& g = gammas.back();
    gammas.push_back(g + (problem.h ? problem.h(g, uj) : uj) * dt);
    cell_u.push_back(&uj);
  }
  auto local = restrict_driver(rp, i0, i1);
  SampledPath gamma_path(std::vector<double>(local->base().times().begin(), local->base().times().end()), gammas);

  RdeCoefficients coeffs{problem.b, problem.lam, problem.dlam};
  if (!coeffs.lam) {
    coeffs.lam = [m, d](const Vector&, const Vector&) { return Matrix::Zero(m, d).eval(); };
    coeffs.dlam = [m, d](const Vector&, const Vector&) {
      return std::vector<Matrix>(static_cast<std::size_t>(m), Matrix::Zero(m, d));
    };
  }
  ControlledPath xs = solve_rde(coeffs, gamma_path, local, x);

  double running = 0.0;
  if (problem.f) {
    for (std::size_t j = 0; j + 1 < gammas.size(); ++j) {
      double dt = rp.base().time(i0 + j + 1) - rp.base().time(i0 + j);
      running += 0.5 * dt *
                 (problem.f(xs.value().value(j), gammas[j], *cell_u[j]) +
                  problem.f(xs.value().value(j + 1), gammas[j + 1], *cell_u[j]));
    }
  }
  if (problem.psi.value)
    running += rough_integral(compose(problem.psi, xs, gamma_path), *local, 0.0, local->base().horizon())[0];
  if (problem.eps > 0.0) {
    for (std::size_t k = 0; k < u.starts.size(); ++k) {
      double start = std::max(u.starts[k], t);
      double end = std::min(k + 1 < u.starts.size() ? u.starts[k + 1] : problem.horizon(), r);
      if (end > start) running += problem.eps * std::pow(u.values[k].norm(), problem.q_exp) * (end - start);
    }
  }
  seg.running = running;
  seg.x_end = xs.value().value(xs.value().size() - 1);
  seg.gamma_end = gammas.back();
  return seg;
}

double cost(const ControlProblem& problem, double t, const Vector& x, const Vector& a, const PiecewiseControl& u) {
  Segment seg = cost_segment(problem, t, problem.horizon(), x, a, u);
  return seg.running + (problem.g ? problem.g(seg.x_end, seg.gamma_end) : 0.0);
}

namespace {

std::size_t knot_index(const ControlGrid& grid, double t, double horizon) {
  for (std::size_t k = 0; k <= grid.n_knots; ++k)
    if (std::abs(grid.knot_time(k, horizon) - t) <= kTimeTolerance) return k;
  throw ArgumentError("time " + std::to_string(t) + " is not a control knot");
}

PiecewiseControl assemble(const ControlGrid& grid, double horizon, std::size_t first_knot,
                          const std::vector<Vector>& lattice, const std::vector<std::size_t>& choice) {
  PiecewiseControl u;
  for (std::size_t p = 0; p < choice.size(); ++p) {
    u.starts.push_back(grid.knot_time(first_knot + p, horizon));
    u.values.push_back(lattice[choice[p]]);
  }
  return u;
}

}  // namespace

ValueResult value(const ControlProblem& problem, double t, const Vector& x, const Vector& a, const ControlGrid& grid) {
  problem.validate(x, a);
  double horizon = problem.horizon();
  grid.validate(horizon);
  std::size_t first = knot_index(grid, t, horizon);
  for (std::size_t k = first; k <= grid.n_knots; ++k) problem.driver->base().require_grid_index(grid.knot_time(k, horizon));
  std::size_t pieces = grid.n_knots - first;
  ValueResult result;
  if (pieces == 0) {
    result.value = problem.g ? problem.g(x, a) : 0.0;
    result.evaluations = 0;
    return result;
  }
  std::vector<Vector> lattice = grid.level_values();
  std::size_t per = lattice.size();
  auto eval = [&](const std::vector<std::size_t>& choice) {
    return cost(problem, t, x, a, assemble(grid, horizon, first, lattice, choice));
  };

  double total = 1.0;
  for (std::size_t p = 0; p < pieces; ++p) total *= static_cast<double>(per);
  if (total <= static_cast<double>(kExhaustiveLimit)) {
    auto n = static_cast<std::size_t>(total);
    auto decode = [&](std::size_t idx) {
      std::vector<std::size_t> choice(pieces);
      for (std::size_t p = pieces; p-- > 0;) {
        choice[p] = idx % per;
        idx /= per;
      }
      return choice;
    };
    std::vector<double> costs(n);
    parallel_for(n, [&](std::size_t idx) { costs[idx] = eval(decode(idx)); });
    std::size_t best = 0;
    for (std::size_t idx = 1; idx < n; ++idx)
      if (costs[idx] < costs[best]) best = idx;
    result.value = costs[best];
    result.control = assemble(grid, horizon, first, lattice, decode(best));
    result.evaluations = n;
    result.exhaustive = true;
    return result;
  }

  // coordinate descent over pieces from a few deterministic starts
  result.exhaustive = false;
  std::vector<std::vector<std::size_t>> starts;
  starts.emplace_back(pieces, 0);
  starts.emplace_back(pieces, per / 2);
  starts.emplace_back(pieces, per - 1);
  std::mt19937_64 rng(0xC0DEULL + pieces);
  std::uniform_int_distribution<std::size_t> pick(0, per - 1);
  for (int s = 0; s < 3; ++s) {
    std::vector<std::size_t> c(pieces);
    for (auto& v : c) v = pick(rng);
    starts.push_back(std::move(c));
  }
  double best_value = INFINITY;
  std::vector<std::size_t> best_choice;
  for (auto choice : starts) {
    double current = eval(choice);
    ++result.evaluations;
    for (int sweep = 0; sweep < 50; ++sweep) {
      bool improved = false;
      for (std::size_t p = 0; p < pieces; ++p) {
        std::vector<double> costs(per);
        parallel_for(per, [&](std::size_t v) {
          std::vector<std::size_t> trial = choice;
          trial[p] = v;
          costs[v] = eval(trial);
        });
        result.evaluations += per;
        std::size_t arg = choice[p];
        for (std::size_t v = 0; v < per; ++v)
          if (costs[v] < costs[arg] || (costs[v] == costs[arg] && v < arg)) arg = v;
        if (costs[arg] < current) improved = true;
        if (arg != choice[p]) {
          choice[p] = arg;
          current = costs[arg];
        }
      }
      if (!improved) break;
    }
    if (current < best_value || (current == best_value && choice < best_choice)) {
      best_value = current;
      best_choice = choice;
    }
  }
  result.value = best_value;
  result.control = assemble(grid, horizon, first, lattice, best_choice);
  return result;
}

DppReport dpp_check(const ControlProblem& problem, double t, double r, const Vector& x, const Vector& a,
                    const ControlGrid& grid, double tolerance) {
  double horizon = problem.horizon();
  if (!(t <= r + kTimeTolerance && r <= horizon + kTimeTolerance)) throw ArgumentError("dpp_check: need t <= r <= T");
  std::size_t first = knot_index(grid, t, horizon);
  std::size_t middle = knot_index(grid, r, horizon);
  DppReport rep;
  rep.direct = value(problem, t, x, a, grid).value;

  std::vector<Vector> lattice = grid.level_values();
  std::size_t per = lattice.size();
  std::size_t pieces = middle - first;
  std::size_t n = 1;
  for (std::size_t p = 0; p < pieces; ++p) n *= per;
  std::vector<double> totals(n);
  parallel_for(n, [&](std::size_t idx) {
    std::vector<std::size_t> choice(pieces);
    std::size_t rest = idx;
    for (std::size_t p = pieces; p-- > 0;) {
      choice[p] = rest % per;
      rest /= per;
    }
    Segment seg{0.0, x, a};
    if (pieces > 0) seg = cost_segment(problem, t, r, x, a, assemble(grid, horizon, first, lattice, choice));
    totals[idx] = seg.running + value(problem, r, seg.x_end, seg.gamma_end, grid).value;
  });
  rep.split = *std::min_element(totals.begin(), totals.end());
  rep.gap = std::abs(rep.direct - rep.split);
  rep.within = rep.gap <= tolerance;
  return rep;
}

}  // namespace roughkit
