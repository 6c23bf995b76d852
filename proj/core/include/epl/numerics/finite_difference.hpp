#pragma once

#include <functional>

#include "epl/game.hpp"

namespace epl::numerics {

using VectorMap = std::function<Vector(const Vector&)>;

/// cbrt(machine epsilon) / max(||y||_inf, 1e-8).
double epsilon_rule(const Vector& y);

/// Central-difference Jacobian-vector product [g(y + eps d) - g(y - eps d)] / (2 eps)
/// with eps = epsilon_rule(y). Calls g exactly twice.
Vector fd_jvp(const VectorMap& g, const Vector& y, const Vector& d);
Vector fd_jvp(const VectorMap& g, const Vector& y, const Vector& d, double eps);

/// Central-difference gradient of a scalar function, step cbrt(u) * max(|x_i|, 1).
Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& x);

} // namespace epl::numerics
