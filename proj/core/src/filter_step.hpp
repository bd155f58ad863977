#pragma once

#include "roughkit/filtering.hpp"

namespace roughkit::detail {

// One Euler step of the Kalman-Bucy mean and covariance over a cell of length h with
// observation increment dy. R is symmetrised; eigenvalues below -1e-8 are reset to 0 (clamped).
void filter_step(const ModelCoefficients& k, const Vector& dy, double h, Vector& q, Matrix& r, bool& clamped);

}  // namespace roughkit::detail
