#include <doctest.h>

#include <cmath>
#include <random>

#include <roughkit/errors.hpp>
#include <roughkit/rough_path.hpp>
#include <roughkit/signatures.hpp>

#include "helpers.hpp"
#include "oracles/iterated_sums.hpp"

using namespace roughkit;
using testing_util::vec;

TEST_SUITE("signatures") {

TEST_CASE("time augmentation") {
  auto flat = SampledPath::scalar({0.0, 0.5, 1.0}, {2.0, 2.0, 2.0});
  auto aug = time_augment(flat);
  CHECK(aug.dim() == 2);
  CHECK(aug.size() == 3);
  CHECK(aug.value(2) == vec({1.0, 2.0}));
  auto sig = signature(aug, 3, 0.0, 0.5);
  CHECK(sig.tensor.coeff({1}) == 0.5);
  CHECK(sig.tensor.coeff({2}) == 0.0);
}

TEST_CASE("scalar line closed form") {
  const double a = 1.7;
  auto line = SampledPath::scalar({0.0, 0.3, 1.0}, {0.0, 0.3 * a, a});
  auto sig = signature(line, 6).tensor;
  double fact = 1.0;
  for (std::size_t k = 0; k <= 6; ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    CHECK(sig.project(k)[0] == doctest::Approx(std::pow(a, k) / fact).epsilon(1e-14));
  }
}

TEST_CASE("constant path has the unit signature") {
  SampledPath flat({0.0, 1.0, 2.0}, {vec({1, 2}), vec({1, 2}), vec({1, 2})});
  CHECK(linf_norm(signature(flat, 4).tensor - TruncatedTensor::unit(2, 4)) == 0.0);
}

TEST_CASE("coefficients match iterated sums") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    auto path = testing_util::random_path(rng, 7, 3, 1.0, 0.6);
    auto sig = signature(path, 4).tensor;
    for (std::size_t len = 1; len <= 4; ++len)
      for (std::size_t idx = 0; idx < sig.project(len).size(); ++idx) {
        Word w = word_at(idx, len, 3);
        CHECK(sig.project(len)[idx] == doctest::Approx(oracle::word_coefficient(path.values(), w)).epsilon(1e-12));
      }
  }
}

TEST_CASE("level two agrees with the canonical lift") {
  SampledPath ell({0.0, 1.0, 2.0}, {vec({0, 0}), vec({1, 0}), vec({1, 1})});
  auto sig = signature(ell, 2).tensor;
  Matrix z = canonical_lift(ell).second_level(0.0, 2.0);
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j) CHECK(sig.coeff({i, j}) == doctest::Approx(z(i - 1, j - 1)));
}

TEST_CASE("Chen multiplicativity and sub-interval signatures") {
  std::mt19937_64 rng(2);
  auto path = testing_util::random_path(rng, 12, 2);
  auto left = signature(path, 5, 0.0, 0.5).tensor;
  auto right = signature(path, 5, 0.5, 1.0).tensor;
  auto full = signature(path, 5).tensor;
  CHECK(linf_norm(tensor_mul(left, right) - full) < 1e-14 * linf_norm(full));
  auto run = running_signature(path, 5);
  CHECK(linf_norm(run[6] - left) < 1e-13);
  auto off = signature(path, 3, 0.13, 0.61).tensor;
  CHECK(off.coeff({1}) == doctest::Approx(path.increment(0.13, 0.61)(0)));
}

TEST_CASE("factorial decay") {
  std::mt19937_64 rng(3);
  auto path = testing_util::random_path(rng, 10, 2);
  auto sig = signature(path, 6).tensor;
  const double len = path_length_1var(path, path.horizon());
  double fact = 1.0;
  for (std::size_t k = 1; k <= 6; ++k) {
    fact *= static_cast<double>(k);
    for (double c : sig.project(k)) CHECK(std::abs(c) <= std::pow(len, k) / fact * (1 + 1e-12));
  }
}

TEST_CASE("batch signatures match single calls") {
  std::mt19937_64 rng(4);
  std::vector<SampledPath> paths;
  for (int i = 0; i < 6; ++i) paths.push_back(testing_util::random_path(rng, 5, 2));
  auto batch = signature_batch(paths, 3);
  for (std::size_t i = 0; i < paths.size(); ++i) CHECK(linf_norm(batch[i].tensor - signature(paths[i], 3).tensor) == 0.0);
}

TEST_CASE("stopped paths and their metric") {
  std::mt19937_64 rng(5);
  auto path = time_augment(testing_util::random_path(rng, 16, 1));
  StoppedRoughPath a{path, 0.5}, b{path, 0.25};
  CHECK(stopped_metric(a, a, 2.5) == 0.0);
  CHECK(stopped_metric(a, b, 2.5) >= 0.25);
  CHECK(stopped_metric(a, b, 1.5) >= 0.25);
  auto ext = stopped_extension(a, {0.0, 0.5, 0.75, 1.0});
  CHECK(ext.value(3)(1) == doctest::Approx(path.at(0.5)(1)));
  CHECK(ext.value(3)(0) == 1.0);

  StoppedRoughPath c{time_augment(testing_util::random_path(rng, 16, 1)), 0.75};
  CHECK(stopped_metric(a, c, 2.5) <= stopped_metric(a, b, 2.5) + stopped_metric(b, c, 2.5) + 1e-12);
  CHECK_THROWS_AS(stopped_metric(a, b, 3.5), ArgumentError);
}

TEST_CASE("quadratic shuffle identity") {
  std::mt19937_64 rng(6);
  auto path = time_augment(testing_util::random_path(rng, 8, 1));
  auto zero = quadratic_shuffle_identity_check(LinearFunctional(), path, 1.0, 4);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  auto unit = quadratic_shuffle_identity_check(LinearFunctional::constant(1.0), path, 0.6, 2);
  CHECK(unit.lhs == doctest::Approx(0.6));
  CHECK(unit.rhs == doctest::Approx(0.6));
  auto l = LinearFunctional::parse("0.5*e + -1*2 + 0.3*12");
  auto rep = quadratic_shuffle_identity_check(l, path, 1.0, 5);
  CHECK(rep.rel_error < 1e-6);
  CHECK_THROWS_AS(quadratic_shuffle_identity_check(l, path, 1.0, 4), ArgumentError);
}

TEST_CASE("exponential shuffle derivative") {
  std::mt19937_64 rng(7);
  auto path = time_augment(testing_util::random_path(rng, 8, 1, 1.0, 0.5));
  auto zero = exp_shuffle_derivative_check(LinearFunctional(), path, 4);
  CHECK(zero.max_discrepancy == doctest::Approx(0.0));
  auto line = time_augment(SampledPath::scalar({0.0, 1.0}, {0.0, 0.0}));
  auto single = exp_shuffle_derivative_check(LinearFunctional::constant(0.7), line, 8);
  CHECK(single.max_discrepancy < 1e-6);
  auto two = exp_shuffle_derivative_check(LinearFunctional::parse("0.4*e + -0.6*2"), path, 8);
  CHECK(two.max_discrepancy < 1e-5 * std::max(1.0, two.max_rhs));
}

TEST_CASE("exponential shuffle truncation error") {
  auto g = signature(SampledPath::scalar({0.0, 1.0}, {0.0, 0.5}), 8).tensor;
  auto zero = exp_shuffle_truncation_error(LinearFunctional(), g, 4);
  CHECK(zero.error == 0.0);
  // single letter: the remainder of the exponential series of 0.5
  auto r = exp_shuffle_truncation_error(LinearFunctional::word({1}), g, 4);
  double partial = 0.0, term = 1.0;
  for (int k = 0; k <= 4; ++k) {
    partial += term;
    term *= 0.5 / (k + 1);
  }
  CHECK(r.error == doctest::Approx(std::exp(0.5) - partial).epsilon(1e-10));
  CHECK(r.hypothesis);
  CHECK(r.holds);
}

TEST_CASE("p-variation threshold time") {
  auto line = SampledPath::scalar(uniform_times(100, 1.0), [] {
    std::vector<double> v;
    for (double t : uniform_times(100, 1.0)) v.push_back(t);
    return v;
  }());
  CHECK(pvar_threshold_time(line, 0.5, 1.0) == doctest::Approx(0.5));
  CHECK(pvar_threshold_time(line, 1e9, 1.0) == 1.0);
  std::mt19937_64 rng(8);
  auto path = testing_util::random_path(rng, 50, 2);
  double prev = 0.0;
  for (double k = 0.1; k < 5.0; k += 0.3) {
    double t = pvar_threshold_time(path, k, 2.5);
    CHECK(t >= prev);
    prev = t;
  }
}

TEST_CASE("signature JSON round trip") {
  std::mt19937_64 rng(9);
  auto sig = signature(testing_util::random_path(rng, 4, 2), 3, 0.25, 1.0);
  auto back = signature_from_json(signature_to_json(sig));
  CHECK(back.s == sig.s);
  CHECK(back.t == sig.t);
  CHECK(linf_norm(back.tensor - sig.tensor) == 0.0);
  CHECK_THROWS_AS(signature_from_json("{"), ParseError);
}

}
