#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <roughkit/paths.hpp>

namespace testing_util {

// Uniform-grid path on [0, horizon] with Gaussian increments of scale `step`.
inline roughkit::SampledPath random_path(std::mt19937_64& rng, std::size_t segments, std::size_t dim,
                                         double horizon = 1.0, double step = 1.0) {
  std::normal_distribution<double> normal(0.0, step);
  std::vector<roughkit::Vector> values(segments + 1, roughkit::Vector::Zero(static_cast<Eigen::Index>(dim)));
  for (std::size_t i = 1; i <= segments; ++i)
    for (std::size_t k = 0; k < dim; ++k) values[i](static_cast<Eigen::Index>(k)) = values[i - 1](static_cast<Eigen::Index>(k)) + normal(rng);
  return roughkit::SampledPath::uniform(horizon, std::move(values));
}

inline roughkit::Vector vec(std::initializer_list<double> xs) {
  roughkit::Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline roughkit::Matrix scalar_matrix(double x) { return roughkit::Matrix::Constant(1, 1, x); }

}  // namespace testing_util
