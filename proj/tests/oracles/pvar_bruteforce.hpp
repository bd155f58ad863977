#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Every partition of the sample grid, sums taken left to right.
inline double pvar_bruteforce(const std::vector<Eigen::VectorXd>& x, double p) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const std::size_t interior = n - 2;
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << interior); ++mask) {
    double sum = 0.0;
    std::size_t prev = 0;
    for (std::size_t k = 1; k < n; ++k) {
      bool cut = k == n - 1 || (mask >> (k - 1)) & 1U;
      if (!cut) continue;
      sum = sum + std::pow((x[k] - x[prev]).norm(), p);
      prev = k;
    }
    if (sum > best) best = sum;
  }
  return std::pow(best, 1.0 / p);
}

}  // namespace oracle
