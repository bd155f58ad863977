#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

// Heun predictor-corrector for the scalar Stratonovich equation dX = lam(X) o dB.
inline double stratonovich_heun(const std::function<double(double)>& lam, double x0, const std::vector<double>& b) {
  double x = x0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const double db = b[i + 1] - b[i];
    const double pred = x + lam(x) * db;
    x += 0.5 * (lam(x) + lam(pred)) * db;
  }
  return x;
}

}  // namespace oracle
