#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include <roughkit/errors.hpp>
#include <roughkit/rde.hpp>
#include <roughkit/rough_integration.hpp>
#include <roughkit/rough_path.hpp>

#include "helpers.hpp"
#include "oracles/quadrature.hpp"
#include "oracles/stratonovich_heun.hpp"

using namespace roughkit;
using testing_util::scalar_matrix;
using testing_util::vec;

namespace {

// Y = f(z) for scalar z with Y' = f'(z).
ControlledPath scalar_controlled(const std::shared_ptr<const RoughPath>& rp, double (*f)(double),
                                 double (*df)(double)) {
  const auto& base = rp->base();
  std::vector<Vector> y;
  std::vector<Matrix> dy;
  for (std::size_t i = 0; i < base.size(); ++i) {
    y.push_back(vec({f(base.value(i)(0))}));
    dy.push_back(scalar_matrix(df(base.value(i)(0))));
  }
  return ControlledPath(SampledPath(std::vector<double>(base.times().begin(), base.times().end()), y), dy, rp);
}

RdeCoefficients linear_rde() {
  RdeCoefficients c;
  c.b = [](const Vector& x, const Vector&) { return Vector::Zero(x.size()); };
  c.lam = [](const Vector& x, const Vector&) { return scalar_matrix(x(0)); };
  c.dlam = [](const Vector&, const Vector&) { return std::vector<Matrix>{scalar_matrix(1.0)}; };
  return c;
}

SampledPath constant_gamma(const SampledPath& grid) {
  return SampledPath(std::vector<double>(grid.times().begin(), grid.times().end()),
                     std::vector<Vector>(grid.size(), vec({0.0})));
}

}  // namespace

TEST_SUITE("rough_core") {

TEST_CASE("canonical lift of a line and an L-shaped path") {
  const double T = 2.0;
  Vector v = vec({1.0, -2.0});
  SampledPath line({0.0, 0.5, T}, {Vector::Zero(2), 0.5 * v, T * v});
  auto rp = canonical_lift(line);
  Matrix expect = 0.5 * T * T * v * v.transpose();
  CHECK((rp.second_level(0.0, T) - expect).cwiseAbs().maxCoeff() < 1e-14);

  SampledPath ell({0.0, 1.0, 2.0}, {vec({0, 0}), vec({1, 0}), vec({1, 1})});
  auto rl = canonical_lift(ell);
  Matrix z = rl.second_level(0.0, 2.0);
  CHECK(z(0, 1) == doctest::Approx(1.0));
  CHECK(z(1, 0) == doctest::Approx(0.0));
  CHECK(z(0, 0) == doctest::Approx(0.5));
  CHECK(z(1, 1) == doctest::Approx(0.5));

  auto flat = canonical_lift(SampledPath({0.0, 1.0, 2.0}, {vec({3, 1}), vec({3, 1}), vec({3, 1})}));
  CHECK(flat.second_level(0.0, 2.0).norm() == 0.0);
}

TEST_CASE("Chen's relation and geometric symmetry on random lifts") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    auto rp = canonical_lift(testing_util::random_path(rng, 16, 1 + k % 3));
    CHECK(rp.chen_defect() < 1e-10);
    CHECK(rp.symmetry_defect() < 1e-10);
    CHECK(rp.is_geometric());
  }
}

TEST_CASE("chen_extend") {
  std::mt19937_64 rng(2);
  auto rp = canonical_lift(testing_util::random_path(rng, 8, 2, 1.0));
  CHECK((chen_extend(rp, 0.25, 0.25, 0.75) - rp.second_level(0.25, 0.75)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((chen_extend(rp, 0.0, 0.375, 1.0) - chen_extend(rp, 0.0, 0.625, 1.0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(chen_extend(rp, 0.5, 0.25, 1.0), ArgumentError);

  Vector v = vec({2.0});
  auto line = canonical_lift(SampledPath({0.0, 1.0, 2.0}, {vec({0}), v, 2 * v}));
  CHECK(chen_extend(line, 0.0, 1.0, 2.0)(0, 0) == doctest::Approx(0.5 * 4.0 * 4.0));
}

TEST_CASE("rough integral of a constant integrand") {
  std::mt19937_64 rng(3);
  auto rp = std::make_shared<const RoughPath>(canonical_lift(testing_util::random_path(rng, 10, 2)));
  Matrix a(1, 2);
  a << 0.7, -1.3;
  std::vector<Vector> y(rp->size(), vec({0.7, -1.3}));
  std::vector<Matrix> dy(rp->size(), Matrix::Zero(2, 2));
  ControlledPath cp(SampledPath(std::vector<double>(rp->base().times().begin(), rp->base().times().end()), y), dy, rp);
  Vector got = rough_integral(cp, *rp, 0.2, 0.8);
  CHECK(got(0) == doctest::Approx((a * rp->increment(0.2, 0.8))(0)).epsilon(1e-13));
}

TEST_CASE("rough integral of the driver against itself") {
  std::mt19937_64 rng(4);
  auto rp = std::make_shared<const RoughPath>(canonical_lift(testing_util::random_path(rng, 32, 1)));
  auto y = scalar_controlled(rp, [](double z) { return z; }, [](double) { return 1.0; });
  const double zs = rp->base().at(0.25)(0), zt = rp->base().at(0.75)(0);
  CHECK(rough_integral(y, *rp, 0.25, 0.75)(0) == doctest::Approx(0.5 * (zt * zt - zs * zs)).epsilon(1e-12));
}

TEST_CASE("rough integral on a smooth driver against quadrature") {
  auto sample = [](std::size_t n) {
    std::vector<Vector> v;
    for (std::size_t i = 0; i <= n; ++i) v.push_back(vec({std::sin(3.0 * static_cast<double>(i) / n)}));
    return std::make_shared<const RoughPath>(canonical_lift(SampledPath::uniform(1.0, v)));
  };
  double exact = oracle::simpson(
      [](double t) { return std::cos(std::sin(3 * t)) * 3 * std::cos(3 * t); }, 0.0, 1.0, 1 << 14);
  double prev = 0.0;
  for (std::size_t n : {32u, 64u, 128u}) {
    auto rp = sample(n);
    auto y = scalar_controlled(rp, [](double z) { return std::cos(z); }, [](double z) { return -std::sin(z); });
    double err = std::abs(rough_integral(y, *rp, 0.0, 1.0)(0) - exact);
    if (prev > 0.0) CHECK(prev / err > 3.0);
    prev = err;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("refinement of piecewise-linear data leaves the integral unchanged") {
  std::mt19937_64 rng(5);
  auto path = testing_util::random_path(rng, 8, 2);
  auto rp = std::make_shared<const RoughPath>(canonical_lift(path));
  auto fine = std::make_shared<const RoughPath>(canonical_lift(resample(path, uniform_times(64, 1.0))));
  auto constant = [](const std::shared_ptr<const RoughPath>& r) {
    std::vector<Vector> y(r->size(), vec({1.5, 0.5}));
    return ControlledPath(SampledPath(std::vector<double>(r->base().times().begin(), r->base().times().end()), y),
                          std::vector<Matrix>(r->size(), Matrix::Zero(2, 2)), r);
  };
  CHECK(rough_integral(constant(rp), *rp, 0.0, 1.0)(0) ==
        doctest::Approx(rough_integral(constant(fine), *fine, 0.0, 1.0)(0)).epsilon(1e-10));
}

TEST_CASE("grid mismatch is an argument error") {
  std::mt19937_64 rng(6);
  auto rp = std::make_shared<const RoughPath>(canonical_lift(testing_util::random_path(rng, 8, 1)));
  auto other = std::make_shared<const RoughPath>(canonical_lift(testing_util::random_path(rng, 5, 1)));
  auto y = scalar_controlled(rp, [](double z) { return z; }, [](double) { return 1.0; });
  CHECK_THROWS_AS(rough_integral(y, *other, 0.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(rough_metric(*rp, *other, 2.5), ArgumentError);
}

TEST_CASE("remainder estimate") {
  std::mt19937_64 rng(7);
  auto rp = std::make_shared<const RoughPath>(canonical_lift(testing_util::random_path(rng, 16, 1)));
  std::vector<Vector> y(rp->size(), vec({2.0}));
  ControlledPath constant(SampledPath(std::vector<double>(rp->base().times().begin(), rp->base().times().end()), y),
                          std::vector<Matrix>(rp->size(), Matrix::Zero(1, 1)), rp);
  CHECK(remainder_estimate_check(constant, *rp, 2.5, 0.0, 1.0).lhs == doctest::Approx(0.0));

  auto line = std::make_shared<const RoughPath>(canonical_lift(SampledPath::scalar({0.0, 1.0}, {0.0, 1.0})));
  auto yl = scalar_controlled(line, [](double z) { return std::sin(z); }, [](double z) { return std::cos(z); });
  CHECK(remainder_estimate_check(yl, *line, 2.5, 0.0, 1.0).lhs == doctest::Approx(0.0));

  auto bm = std::make_shared<const RoughPath>(brownian_rough_path(8, 256, 1.0, 1));
  auto yb = scalar_controlled(bm, [](double z) { return std::sin(z); }, [](double z) { return std::cos(z); });
  auto rep = remainder_estimate_check(yb, *bm, 2.5, 0.0, 1.0);
  CHECK(rep.finite);
  CHECK(std::isfinite(rep.constant));
}

TEST_CASE("rough metric") {
  std::mt19937_64 rng(8);
  auto a = canonical_lift(testing_util::random_path(rng, 12, 2));
  auto b = canonical_lift(testing_util::random_path(rng, 12, 2));
  CHECK(rough_metric(a, a, 2.5) == 0.0);
  CHECK(rough_metric(a, b, 2.5) == doctest::Approx(rough_metric(b, a, 2.5)).epsilon(1e-14));
  CHECK(rough_metric(a, b, 2.5, MetricMode::holder) == doctest::Approx(rough_metric(b, a, 2.5, MetricMode::holder)));

  // lines v and 2v: first level |v| T, second level (4 - 1) max|v v^T| T^2 / 2
  Vector v = vec({0.6, 0.8});
  auto l1 = canonical_lift(SampledPath({0.0, 1.0}, {Vector::Zero(2), v}));
  auto l2 = canonical_lift(SampledPath({0.0, 1.0}, {Vector::Zero(2), 2 * v}));
  double second = 1.5 * (v * v.transpose()).cwiseAbs().maxCoeff();
  CHECK(rough_metric(l1, l2, 2.5) == doctest::Approx(1.0 + second));
}

TEST_CASE("Young integral") {
  std::vector<double> t = uniform_times(256, 1.0);
  std::vector<Vector> yv, xv, cv;
  for (double s : t) {
    yv.push_back(vec({std::cos(s)}));
    xv.push_back(vec({s * s}));
    cv.push_back(vec({2.0}));
  }
  SampledPath y(t, yv), x(t, xv), c(t, cv);
  auto ic = young_integral(c, x, 1.0, 1.0);
  CHECK(ic.value(ic.size() - 1)(0) == doctest::Approx(2.0));
  auto iy = young_integral(y, x, 1.0, 1.0);
  double exact = oracle::simpson([](double s) { return std::cos(s) * 2 * s; }, 0.0, 1.0, 1024);
  CHECK(std::abs(iy.value(iy.size() - 1)(0) - exact) < 5e-3);
  CHECK_THROWS_AS(young_integral(y, x, 2.0, 2.0), ArgumentError);
}

TEST_CASE("RDE with zero diffusion is the Euler ODE solution") {
  auto rp = std::make_shared<const RoughPath>(brownian_rough_path(9, 64, 1.0, 1));
  RdeCoefficients c;
  c.b = [](const Vector& x, const Vector&) { return vec({-0.5 * x(0) + 1.0}); };
  c.lam = [](const Vector&, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  c.dlam = [](const Vector&, const Vector&) { return std::vector<Matrix>{Matrix::Zero(1, 1)}; };
  auto sol = solve_rde(c, constant_gamma(rp->base()), rp, vec({2.0}));
  double x = 2.0;
  for (std::size_t i = 0; i + 1 < rp->size(); ++i) {
    x = x + (-0.5 * x + 1.0) * (rp->base().time(i + 1) - rp->base().time(i));
    CHECK(sol.value().value(i + 1)(0) == x);
  }
}

TEST_CASE("linear RDE on a line driver is the exponential") {
  std::vector<Vector> v;
  for (std::size_t i = 0; i <= 1024; ++i) v.push_back(vec({static_cast<double>(i) / 1024}));
  auto rp = std::make_shared<const RoughPath>(canonical_lift(SampledPath::uniform(1.0, v)));
  auto sol = solve_rde(linear_rde(), constant_gamma(rp->base()), rp, vec({1.0}));
  CHECK(std::abs(sol.value().values().back()(0) - std::exp(1.0)) < 1e-3);
  CHECK(sol.gubinelli(5)(0, 0) == sol.value().value(5)(0));
}

TEST_CASE("linear RDE on a Brownian lift against a fine Heun scheme") {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto fine = brownian_path(seed, 256 * 16, 1.0, 1);
    auto coarse = resample(fine, uniform_times(256, 1.0));
    auto rp = std::make_shared<const RoughPath>(canonical_lift(coarse));
    auto sol = solve_rde(linear_rde(), constant_gamma(coarse), rp, vec({1.0}));
    std::vector<double> b;
    for (const auto& x : fine.values()) b.push_back(x(0));
    total += std::abs(sol.value().values().back()(0) - oracle::stratonovich_heun([](double x) { return x; }, 1.0, b));
  }
  CHECK(total / 10 < 2e-2);
}

TEST_CASE("diffusion derivative is validated") {
  auto c = linear_rde();
  CHECK_NOTHROW(validate_diffusion_derivative(c, vec({0.3}), vec({0.0})));
  c.dlam = [](const Vector&, const Vector&) { return std::vector<Matrix>{scalar_matrix(2.0)}; };
  CHECK_THROWS_AS(validate_diffusion_derivative(c, vec({0.3}), vec({0.0})), ArgumentError);
}

TEST_CASE("RDE divergence reports its step") {
  std::vector<Vector> v;
  for (std::size_t i = 0; i <= 64; ++i) v.push_back(vec({static_cast<double>(i)}));
  auto rp = std::make_shared<const RoughPath>(canonical_lift(SampledPath::uniform(1.0, v)));
  RdeCoefficients c;
  c.b = [](const Vector& x, const Vector&) { return vec({x(0) * x(0) * 1e100}); };
  c.lam = [](const Vector&, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  c.dlam = [](const Vector&, const Vector&) { return std::vector<Matrix>{Matrix::Zero(1, 1)}; };
  CHECK_THROWS_AS(solve_rde(c, constant_gamma(rp->base()), rp, vec({1.0})), DivergenceError);
}

TEST_CASE("regularity report and driver stability") {
  auto rp = std::make_shared<const RoughPath>(brownian_rough_path(10, 128, 1.0, 1));
  auto gamma = constant_gamma(rp->base());
  auto sol = solve_rde(linear_rde(), gamma, rp, vec({1.0}));
  OneForm psi{[](const Vector& x, const Vector&) { return vec({std::sin(x(0))}); },
              [](const Vector& x, const Vector&) { return scalar_matrix(std::cos(x(0))); }};
  auto rep = regularity_report(sol, gamma, psi, 2.5);
  CHECK(rep.finite);
  for (double r : rep.ratio) CHECK(std::isfinite(r));

  auto same = driver_stability_probe(linear_rde(), psi, vec({1.0}), vec({1.0}), gamma, gamma, rp, rp, 2.5);
  CHECK(same.lhs == 0.0);
  auto shifted = driver_stability_probe(linear_rde(), psi, vec({1.0}), vec({1.1}), gamma, gamma, rp, rp, 2.5);
  CHECK(shifted.lhs > 0.0);
  CHECK(std::isfinite(shifted.ratio));
}

TEST_CASE("Brownian lifts are deterministic and geometric") {
  auto a = brownian_rough_path(42, 64, 1.0, 2);
  auto b = brownian_rough_path(42, 64, 1.0, 2);
  CHECK(a.base().values() == b.base().values());
  CHECK(a.chen_defect() < 1e-10);
  CHECK(a.symmetry_defect() < 1e-10);

  double sum = 0.0, sq = 0.0;
  const int n = 4000;
  for (int s = 0; s < n; ++s) {
    double x = brownian_path(s, 4, 2.0, 1).values().back()(0);
    sum += x;
    sq += x * x;
  }
  double var = sq / n - (sum / n) * (sum / n);
  CHECK(std::abs(var - 2.0) < 0.15);
}

TEST_CASE("rough path JSON round trip") {
  auto rp = brownian_rough_path(5, 16, 1.0, 2);
  auto back = rough_path_from_json(rough_path_to_json(rp));
  CHECK(back.base().values() == rp.base().values());
  for (std::size_t i = 0; i < rp.segment_levels().size(); ++i) CHECK(back.segment_levels()[i] == rp.segment_levels()[i]);
  CHECK_THROWS_AS(rough_path_from_json("{\"version\": \"rp-v1\""), ParseError);
}

}
