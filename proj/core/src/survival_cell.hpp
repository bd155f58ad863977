#pragma once

#include <cmath>

namespace roughkit::detail {

// One cell of the randomized-stopping integral with intensity mass x >= 0:
// factor = exp(-x) and mean = (1 - exp(-x)) / x. Taylor below 1e-3 (truncation < 1e-18).
struct SurvivalCell {
  double factor;
  double mean;
};

inline SurvivalCell survival_cell(double x) {
  if (x < 1e-3) {
    double mean = 1.0 - x / 2.0 * (1.0 - x / 3.0 * (1.0 - x / 4.0 * (1.0 - x / 5.0 * (1.0 - x / 6.0))));
    return {1.0 - x * mean, mean};
  }
  double factor = std::exp(-x);
  return {factor, (1.0 - factor) / x};
}

}  // namespace roughkit::detail
