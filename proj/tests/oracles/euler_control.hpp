#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

// Classical scalar control cost with no driver:
//   dX = b(X, a) dt,  da = h(a, u) dt,  J = int f(X, a, u) dt + eps int |u|^q dt + g(X_T, a_T),
// forward Euler for the state and the trapezoid rule for f on a uniform grid.
struct ScalarOde {
  std::function<double(double, double)> b;
  std::function<double(double, double)> h;
  std::function<double(double, double, double)> f;
  std::function<double(double, double)> g;
  double eps = 0.0;
  double q = 2.0;
};

inline double euler_control_cost(const ScalarOde& ode, const std::vector<double>& times, double x0, double a0,
                                 const std::function<double(double)>& u) {
  double x = x0;
  double a = a0;
  double running = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double dt = times[i + 1] - times[i];
    const double ui = u(times[i]);
    const double xn = x + ode.b(x, a) * dt;
    const double an = a + ode.h(a, ui) * dt;
    running += 0.5 * (ode.f(x, a, ui) + ode.f(xn, an, ui)) * dt + ode.eps * std::pow(std::abs(ui), ode.q) * dt;
    x = xn;
    a = an;
  }
  return running + ode.g(x, a);
}

}  // namespace oracle
