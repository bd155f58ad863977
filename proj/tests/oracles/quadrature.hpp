#pragma once

#include <cstddef>
#include <functional>

namespace oracle {

inline double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double sum = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < n; ++i) sum += f(a + h * static_cast<double>(i));
  return sum * h;
}

// Composite Simpson, n even.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return sum * h / 3.0;
}

}  // namespace oracle
