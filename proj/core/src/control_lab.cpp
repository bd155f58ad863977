#include "roughkit/control_lab.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"

namespace roughkit {

// ---- degeneracy example -------------------------------------------------

void TradingConfig::validate() const {
  if (!(inventory_bound > 0.0)) throw ArgumentError("inventory bound must be positive");
  if (inventory_levels != 0 && (inventory_levels < 3 || inventory_levels % 2 == 0))
    throw ArgumentError("inventory levels must be odd and >= 3 (or 0 for automatic)");
  if (!(q_exp >= 1.0)) throw ArgumentError("regularization exponent must be >= 1");
}

namespace {

// best[l] = max_k score[k] - cost[|k - l|]. The cost is convex in the inventory change, so
// the rightmost maximizer is nondecreasing in l and each half only scans its share of k.
void monotone_max(std::size_t lo, std::size_t hi, std::size_t klo, std::size_t khi,
                  const std::vector<double>& score, const std::vector<double>& cost, std::vector<double>& best) {
  if (lo > hi) return;
  std::size_t mid = lo + (hi - lo) / 2;
  std::size_t arg = klo;
  double top = -INFINITY;
  for (std::size_t k = klo; k <= khi; ++k) {
    double v = score[k] - cost[k > mid ? k - mid : mid - k];
    if (v >= top) {
      top = v;
      arg = k;
    }
  }
  best[mid] = top;
  if (mid > lo) monotone_max(lo, mid - 1, klo, arg, score, cost, best);
  monotone_max(mid + 1, hi, arg, khi, score, cost, best);
}

}  // namespace

double trading_value(const SampledPath& eta, double eps, const TradingConfig& cfg) {
  cfg.validate();
  if (eta.dim() != 1) throw ArgumentError("trading_value: the price path must be scalar");
  if (!(eps >= 0.0)) throw ArgumentError("trading_value: eps must be >= 0");
  std::size_t levels = cfg.inventory_levels ? cfg.inventory_levels : 4 * eta.segments() + 1;
  double bound = cfg.inventory_bound;
  std::vector<double> inv(levels);
  for (std::size_t l = 0; l < levels; ++l)
    inv[l] = -bound + 2.0 * bound * static_cast<double>(l) / static_cast<double>(levels - 1);
  std::vector<double> next(levels, 0.0);
  std::vector<double> cur(levels);
  std::vector<double> score(levels);
  std::vector<double> trade(levels, 0.0);
  for (std::size_t i = eta.segments(); i-- > 0;) {
    double h = eta.time(i + 1) - eta.time(i);
    double deta = eta.value(i + 1)[0] - eta.value(i)[0];
    for (std::size_t k = 0; k < levels; ++k) score[k] = inv[k] * deta + next[k];
    if (eps > 0.0)
      for (std::size_t j = 0; j < levels; ++j) trade[j] = eps * std::pow(std::abs(inv[j] - inv[0]) / h, cfg.q_exp) * h;
    monotone_max(0, levels - 1, 0, levels - 1, score, trade, cur);
    std::swap(cur, next);
  }
  return cfg.x + next[(levels - 1) / 2];
}

std::vector<SampledPath> mesh_family(const SampledPath& sample, const std::vector<std::size_t>& meshes) {
  std::vector<SampledPath> out;
  out.reserve(meshes.size());
  for (std::size_t n : meshes) {
    if (n == 0 || sample.segments() % n != 0)
      throw ArgumentError("mesh " + std::to_string(n) + " does not divide the sample grid");
    std::vector<double> times;
    std::vector<Vector> values;
    std::size_t stride = sample.segments() / n;
    for (std::size_t k = 0; k <= n; ++k) {
      times.push_back(sample.time(k * stride));
      values.push_back(sample.value(k * stride));
    }
    out.emplace_back(std::move(times), std::move(values));
  }
  return out;
}

DegeneracyTable degeneracy_demo(const std::vector<SampledPath>& family, const std::vector<std::size_t>& meshes,
                                const std::vector<double>& eps_list, const TradingConfig& cfg) {
  cfg.validate();
  if (family.size() != meshes.size()) throw ArgumentError("degeneracy_demo: one mesh label per driver");
  for (std::size_t k = 1; k < meshes.size(); ++k)
    if (meshes[k] <= meshes[k - 1]) throw ArgumentError("degeneracy_demo: meshes must increase");
  DegeneracyTable table;
  double sup = 0.0;
  double horizon = 0.0;
  for (const auto& eta : family) {
    for (std::size_t i = 0; i < eta.size(); ++i) sup = std::max(sup, std::abs(eta.value(i)[0] - eta.value(0)[0]));
    horizon = std::max(horizon, eta.horizon());
  }
  double smallest = INFINITY;
  for (double e : eps_list)
    if (e > 0.0) smallest = std::min(smallest, e);
  if (std::isfinite(smallest)) {
    double q = cfg.q_exp;
    double young = q > 1.0 ? (q - 1.0) * smallest * std::pow(sup / (q * smallest), q / (q - 1.0))
                           : (sup <= smallest ? 0.0 : INFINITY);
    table.regularized_bound = cfg.x + cfg.inventory_bound * sup + horizon * young;
  }

  std::vector<DegeneracyRow> rows(eps_list.size() * family.size());
  parallel_for(rows.size(), [&](std::size_t idx) {
    std::size_t e = idx / family.size();
    std::size_t k = idx % family.size();
    DegeneracyRow row;
    row.mesh = meshes[k];
    row.eps = eps_list[e];
    row.value = trading_value(family[k], row.eps, cfg);
    row.path_length = path_length_1var(family[k], family[k].horizon());
    row.closed_form = cfg.x + cfg.inventory_bound * row.path_length;
    rows[idx] = row;
  });
  for (std::size_t idx = 0; idx < rows.size(); ++idx) {
    const auto& row = rows[idx];
    if (row.eps == 0.0) {
      if (std::abs(row.value - row.closed_form) > 1e-9) table.eps0_matches = false;
      if (idx % family.size() > 0 && !(row.value > rows[idx - 1].value)) table.eps0_increasing = false;
    } else if (!(row.value <= table.regularized_bound)) {
      table.regularized_bounded = false;
    }
  }
  table.rows = std::move(rows);
  return table;
}

// ---- value tables -------------------------------------------------------

namespace {

std::size_t bracket(const std::vector<double>& grid, double v, double& w) {
  if (v <= grid.front()) {
    w = 0.0;
    return 0;
  }
  if (v >= grid.back()) {
    w = 1.0;
    return grid.size() - 2;
  }
  auto it = std::upper_bound(grid.begin(), grid.end(), v);
  std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  w = (v - grid[i]) / (grid[i + 1] - grid[i]);
  return i;
}

void check_axis(const std::vector<double>& g, const char* name) {
  if (g.size() < 3) throw ArgumentError(std::string("value table: ") + name + " grid needs at least 3 nodes");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw ArgumentError(std::string("value table: ") + name + " grid must increase");
}

Vector scalar(double v) { return Vector::Constant(1, v); }

struct NodeChoice {
  double value = INFINITY;
  double u = 0.0;
};

// One Davie step of the state over driver cell k for every control level, then the cheapest
// continuation through the interpolated slice k + 1.
NodeChoice node_step(const ControlProblem& p, const ValueTable& table, std::size_t k, double xv, double av) {
  const RoughPath& rp = *p.driver;
  double dt = rp.base().time(k + 1) - rp.base().time(k);
  double dz = rp.base().value(k + 1)[0] - rp.base().value(k)[0];
  double zz = rp.segment_levels()[k](0, 0);
  Vector x = scalar(xv);
  Vector a = scalar(av);
  double drift = p.b ? p.b(x, a)[0] : 0.0;
  double lam = p.lam ? p.lam(x, a)(0, 0) : 0.0;
  double dlam = p.lam ? p.dlam(x, a)[0](0, 0) : 0.0;
  double xn = xv + lam * dz;
  xn += drift * dt;
  xn += dlam * lam * zz;
  double psi_term = 0.0;
  if (p.psi.value) psi_term = p.psi.value(x, a)[0] * dz + p.psi.jacobian(x, a)(0, 0) * lam * zz;
  NodeChoice best;
  for (double uv : table.u) {
    Vector u = scalar(uv);
    double an = av + (p.h ? p.h(a, u)[0] : uv) * dt;
    double run = 0.0;
    if (p.f) run += 0.5 * dt * (p.f(x, a, u) + p.f(scalar(xn), scalar(an), u));
    run += psi_term;
    if (p.eps > 0.0) run += p.eps * std::pow(std::abs(uv), p.q_exp) * dt;
    double v = run + table.at(k + 1, xn, an);
    if (v < best.value) best = {v, uv};
  }
  return best;
}

void check_scalar(const ControlProblem& p) {
  if (!p.driver) throw ArgumentError("control problem needs a driver");
  if (p.driver->dim() != 1) throw ArgumentError("value table: the driver must be one-dimensional");
  if (p.lam && !p.dlam) throw ArgumentError("value table: lam needs its derivative");
  if (p.psi.value && !p.psi.jacobian) throw ArgumentError("value table: psi needs its Jacobian");
}

}  // namespace

double ValueTable::at(std::size_t k, double xv, double av) const {
  double wx = 0.0;
  double wa = 0.0;
  std::size_t i = bracket(x, xv, wx);
  std::size_t j = bracket(a, av, wa);
  return (1.0 - wx) * ((1.0 - wa) * node(k, i, j) + wa * node(k, i, j + 1)) +
         wx * ((1.0 - wa) * node(k, i + 1, j) + wa * node(k, i + 1, j + 1));
}

double ValueTable::best_control(const ControlProblem& problem, std::size_t k, double xv, double av) const {
  if (k + 1 >= t.size()) throw ArgumentError("best_control: no cell after the last slice");
  return node_step(problem, *this, k, xv, av).u;
}

ValueTable value_table(const ControlProblem& problem, std::vector<double> x_grid, std::vector<double> a_grid,
                       std::vector<double> u_levels) {
  check_scalar(problem);
  check_axis(x_grid, "x");
  check_axis(a_grid, "a");
  if (u_levels.empty()) throw ArgumentError("value table: need at least one control level");
  problem.validate(scalar(x_grid[x_grid.size() / 2]), scalar(a_grid[a_grid.size() / 2]));
  ValueTable table;
  table.t.assign(problem.driver->base().times().begin(), problem.driver->base().times().end());
  table.x = std::move(x_grid);
  table.a = std::move(a_grid);
  table.u = std::move(u_levels);
  std::size_t nt = table.t.size();
  std::size_t nx = table.x.size();
  std::size_t na = table.a.size();
  table.v.assign(nt * nx * na, 0.0);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < na; ++j)
      table.node(nt - 1, i, j) = problem.g ? problem.g(scalar(table.x[i]), scalar(table.a[j])) : 0.0;
  for (std::size_t k = nt - 1; k-- > 0;) {
    parallel_for(nx * na, [&](std::size_t idx) {
      std::size_t i = idx / na;
      std::size_t j = idx % na;
      table.node(k, i, j) = node_step(problem, table, k, table.x[i], table.a[j]).value;
    });
  }
  return table;
}

ValueTable tabulate(const std::function<double(double, double, double)>& w, const ValueTable& shape) {
  ValueTable out = shape;
  for (std::size_t k = 0; k < shape.t.size(); ++k)
    for (std::size_t i = 0; i < shape.x.size(); ++i)
      for (std::size_t j = 0; j < shape.a.size(); ++j) out.node(k, i, j) = w(shape.t[k], shape.x[i], shape.a[j]);
  return out;
}

HjbResidual hjb_residual(const ControlProblem& problem, const ValueTable& table, std::size_t margin) {
  check_scalar(problem);
  check_axis(table.x, "x");
  check_axis(table.a, "a");
  if (table.u.empty()) throw ArgumentError("hjb_residual: need at least one control level");
  const SampledPath& eta = problem.driver->base();
  if (eta.size() != table.t.size()) throw ArgumentError("hjb_residual: table and driver grids differ");
  std::size_t nt = table.t.size();
  std::size_t nx = table.x.size();
  std::size_t na = table.a.size();
  std::size_t m = std::max<std::size_t>(margin, 1);
  if (2 * m >= nx || 2 * m >= na) throw ArgumentError("hjb_residual: margin leaves no interior nodes");

  HjbResidual rep;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < na; ++j) {
      double g = problem.g ? problem.g(scalar(table.x[i]), scalar(table.a[j])) : 0.0;
      rep.terminal_max = std::max(rep.terminal_max, std::abs(table.node(nt - 1, i, j) - g));
    }

  std::size_t ix = nx - 2 * m;
  std::size_t ia = na - 2 * m;
  std::vector<double> field((nt - 1) * ix * ia);
  parallel_for(field.size(), [&](std::size_t idx) {
    std::size_t k = idx / (ix * ia);
    std::size_t i = m + (idx / ia) % ix;
    std::size_t j = m + idx % ia;
    double dt = table.t[k + 1] - table.t[k];
    double slope = (eta.value(k + 1)[0] - eta.value(k)[0]) / dt;
    double vt = (table.node(k + 1, i, j) - table.node(k, i, j)) / dt;
    double vx = (table.node(k + 1, i + 1, j) - table.node(k + 1, i - 1, j)) / (table.x[i + 1] - table.x[i - 1]);
    double va = (table.node(k + 1, i, j + 1) - table.node(k + 1, i, j - 1)) / (table.a[j + 1] - table.a[j - 1]);
    Vector x = scalar(table.x[i]);
    Vector a = scalar(table.a[j]);
    double drift = problem.b ? problem.b(x, a)[0] : 0.0;
    double lam = problem.lam ? problem.lam(x, a)(0, 0) : 0.0;
    double psi = problem.psi.value ? problem.psi.value(x, a)[0] : 0.0;
    double inner = INFINITY;
    for (double uv : table.u) {
      Vector u = scalar(uv);
      double hv = problem.h ? problem.h(a, u)[0] : uv;
      double fv = problem.f ? problem.f(x, a, u) : 0.0;
      double reg = problem.eps > 0.0 ? problem.eps * std::pow(std::abs(uv), problem.q_exp) : 0.0;
      inner = std::min(inner, hv * va + fv + reg);
    }
    field[idx] = std::abs(-vt - drift * vx - inner - (lam * vx + psi) * slope);
  });
  rep.nodes = field.size();
  double sum = 0.0;
  for (double r : field) {
    rep.max_abs = std::max(rep.max_abs, r);
    sum += r;
  }
  rep.mean_abs = field.empty() ? 0.0 : sum / static_cast<double>(field.size());
  return rep;
}

VerificationReport verification_probe(const ControlProblem& problem, const Feedback& w, const Feedback& u_star,
                                      const ValueTable& table, const ControlGrid& grid, double x0, double a0,
                                      std::size_t margin) {
  VerificationReport rep;
  ValueTable candidate = tabulate(w, table);
  rep.residual = hjb_residual(problem, candidate, margin).max_abs;
  for (std::size_t idx = 0; idx < table.v.size(); ++idx)
    rep.value_gap = std::max(rep.value_gap, std::abs(candidate.v[idx] - table.v[idx]));

  double horizon = problem.horizon();
  grid.validate(horizon);
  if (grid.lo.size() != 1) throw ArgumentError("verification_probe: scalar controls only");
  std::vector<Vector> lattice = grid.level_values();
  Vector x = scalar(x0);
  Vector a = scalar(a0);
  PiecewiseControl u;
  for (std::size_t k = 0; k < grid.n_knots; ++k) {
    double tk = grid.knot_time(k, horizon);
    if (k > 0) {
      Segment seg = cost_segment(problem, 0.0, tk, scalar(x0), scalar(a0), u);
      x = seg.x_end;
      a = seg.gamma_end;
    }
    double want = u_star(tk, x[0], a[0]);
    std::size_t pick = 0;
    for (std::size_t l = 1; l < lattice.size(); ++l)
      if (std::abs(lattice[l][0] - want) < std::abs(lattice[pick][0] - want)) pick = l;
    u.starts.push_back(tk);
    u.values.push_back(lattice[pick]);
  }
  rep.feedback_cost = cost(problem, 0.0, scalar(x0), scalar(a0), u);
  rep.lattice_value = value(problem, 0.0, scalar(x0), scalar(a0), grid).value;
  rep.cost_gap = rep.feedback_cost - rep.lattice_value;
  return rep;
}

// ---- continuity in the driver -------------------------------------------

ContinuityScan driver_continuity_scan(const ControlProblem& problem, const SampledPath& sample,
                                      const std::vector<std::size_t>& coarse_meshes, double p, const Vector& x,
                                      const Vector& a, const ControlGrid& grid) {
  std::vector<std::size_t> meshes;
  for (std::size_t n : coarse_meshes) {
    meshes.push_back(n);
    meshes.push_back(2 * n);
  }
  std::sort(meshes.begin(), meshes.end());
  meshes.erase(std::unique(meshes.begin(), meshes.end()), meshes.end());
  std::vector<SampledPath> family = mesh_family(sample, meshes);
  std::vector<double> times(sample.times().begin(), sample.times().end());
  std::vector<std::shared_ptr<const RoughPath>> lifts(meshes.size());
  std::vector<double> values(meshes.size());
  for (std::size_t k = 0; k < meshes.size(); ++k) {
    lifts[k] = std::make_shared<const RoughPath>(canonical_lift(resample(family[k], times)));
    ControlProblem local = problem;
    local.driver = lifts[k];
    values[k] = value(local, 0.0, x, a, grid).value;
  }
  auto find = [&](std::size_t n) {
    return static_cast<std::size_t>(std::lower_bound(meshes.begin(), meshes.end(), n) - meshes.begin());
  };
  ContinuityScan scan;
  std::vector<double> ratios;
  for (std::size_t n : coarse_meshes) {
    std::size_t i = find(n);
    std::size_t j = find(2 * n);
    ContinuityRow row;
    row.coarse = n;
    row.fine = 2 * n;
    row.value_coarse = values[i];
    row.value_fine = values[j];
    row.value_gap = std::abs(values[i] - values[j]);
    row.metric = rough_metric(*lifts[i], *lifts[j], p);
    if (row.metric <= 1e-12) continue;
    row.ratio = row.value_gap / row.metric;
    ratios.push_back(row.ratio);
    scan.rows.push_back(row);
  }
  if (!ratios.empty()) {
    scan.max_ratio = *std::max_element(ratios.begin(), ratios.end());
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    std::size_t mid = sorted.size() / 2;
    scan.median_ratio = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    std::size_t half = (ratios.size() + 1) / 2;
    scan.head_max = *std::max_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(half));
    scan.tail_max = half < ratios.size()
                        ? *std::max_element(ratios.begin() + static_cast<std::ptrdiff_t>(half), ratios.end())
                        : 0.0;
    scan.stable = scan.tail_max <= scan.head_max;
  }
  return scan;
}

// ---- desk instances -----------------------------------------------------

namespace {

Matrix constant_matrix(double v) { return Matrix::Constant(1, 1, v); }

std::vector<Matrix> constant_derivative(double v) { return {Matrix::Constant(1, 1, v)}; }

ControlGrid scalar_grid(std::size_t knots, std::size_t levels, double lo, double hi) {
  ControlGrid g;
  g.n_knots = knots;
  g.levels = levels;
  g.lo = scalar(lo);
  g.hi = scalar(hi);
  return g;
}

// Steer x towards 0 through the drift a, paying x^2 along the way and at the end.
void lq(DeskInstance& d) {
  auto& p = d.problem;
  p.b = [](const Vector&, const Vector& a) { return a; };
  p.lam = [](const Vector&, const Vector&) { return constant_matrix(0.3); };
  p.dlam = [](const Vector&, const Vector&) { return constant_derivative(0.0); };
  p.f = [](const Vector& x, const Vector&, const Vector&) { return x[0] * x[0]; };
  p.g = [](const Vector& x, const Vector&) { return x[0] * x[0]; };
  p.eps = 0.1;
  d.x0 = scalar(1.0);
  d.a0 = scalar(0.0);
  d.grid = scalar_grid(4, 5, -2.0, 2.0);
}

}  // namespace

std::vector<std::string> desk_instance_names() { return {"lq", "bilinear", "trader", "line"}; }

DeskInstance desk_instance(const std::string& name, std::uint64_t seed, std::size_t n_steps) {
  DeskInstance d;
  d.name = name;
  auto& p = d.problem;
  if (name == "line") {
    std::vector<Vector> vals;
    for (std::size_t k = 0; k <= n_steps; ++k) vals.push_back(scalar(static_cast<double>(k) / static_cast<double>(n_steps)));
    p.driver = std::make_shared<const RoughPath>(canonical_lift(SampledPath::uniform(1.0, std::move(vals))));
    lq(d);
    return d;
  }
  p.driver = std::make_shared<const RoughPath>(brownian_rough_path(seed, n_steps, 1.0, 1));
  if (name == "lq") {
    lq(d);
  } else if (name == "bilinear") {
    p.b = [](const Vector& x, const Vector& a) { return (a - x).eval(); };
    p.lam = [](const Vector& x, const Vector&) { return constant_matrix(0.2 * x[0]); };
    p.dlam = [](const Vector&, const Vector&) { return constant_derivative(0.2); };
    p.psi.value = [](const Vector& x, const Vector&) { return scalar(0.1 * x[0]); };
    p.psi.jacobian = [](const Vector&, const Vector&) { return constant_matrix(0.1); };
    p.f = [](const Vector& x, const Vector&, const Vector&) { return (x[0] - 1.0) * (x[0] - 1.0); };
    p.g = [](const Vector& x, const Vector&) { return 0.5 * x[0] * x[0]; };
    p.eps = 0.05;
    d.x0 = scalar(0.5);
    d.a0 = scalar(0.0);
    d.grid = scalar_grid(4, 5, -1.0, 1.0);
  } else if (name == "trader") {
    // wealth x, inventory gamma traded at rate u; minimize minus final wealth plus a
    // liquidation charge on leftover inventory
    p.lam = [](const Vector&, const Vector& a) { return constant_matrix(a[0]); };
    p.dlam = [](const Vector&, const Vector&) { return constant_derivative(0.0); };
    p.g = [](const Vector& x, const Vector& a) { return -x[0] + 0.5 * a[0] * a[0]; };
    p.eps = 0.1;
    d.x0 = scalar(0.0);
    d.a0 = scalar(0.0);
    d.grid = scalar_grid(4, 5, -2.0, 2.0);
  } else {
    throw ArgumentError("unknown desk instance '" + name + "'");
  }
  return d;
}

// ---- output -------------------------------------------------------------

void write_degeneracy_csv(std::ostream& out, const DegeneracyTable& table) {
  out << std::setprecision(17) << "mesh,eps,value,path_length,closed_form\n";
  for (const auto& r : table.rows)
    out << r.mesh << ',' << r.eps << ',' << r.value << ',' << r.path_length << ',' << r.closed_form << '\n';
}

void write_continuity_csv(std::ostream& out, const ContinuityScan& scan) {
  out << std::setprecision(17) << "coarse,fine,value_coarse,value_fine,value_gap,metric,ratio\n";
  for (const auto& r : scan.rows)
    out << r.coarse << ',' << r.fine << ',' << r.value_coarse << ',' << r.value_fine << ',' << r.value_gap << ','
        << r.metric << ',' << r.ratio << '\n';
}

void write_value_table_csv(std::ostream& out, const ValueTable& table) {
  out << std::setprecision(17) << "t,x,a,v\n";
  for (std::size_t k = 0; k < table.t.size(); ++k)
    for (std::size_t i = 0; i < table.x.size(); ++i)
      for (std::size_t j = 0; j < table.a.size(); ++j)
        out << table.t[k] << ',' << table.x[i] << ',' << table.a[j] << ',' << table.node(k, i, j) << '\n';
}

}  // namespace roughkit
