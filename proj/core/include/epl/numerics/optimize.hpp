#pragma once

#include <functional>

#include "epl/game.hpp"

namespace epl::numerics {

using ScalarFunction = std::function<double(const Vector&)>;
using GradientFunction = std::function<Vector(const Vector&)>;

struct MaximizeOptions {
    double tol_grad = 1e-8;
    int max_iter = 500;
    std::function<void(const Vector&)> on_accept;  // called with each accepted iterate
};

struct MaximizeResult {
    Vector theta;
    double value = 0.0;
    double grad_norm = 0.0;   // inf-norm at theta
    int iterations = 0;
    bool converged = false;
};

/// BFGS ascent with Armijo backtracking. Returns the best iterate with
/// converged = false when the line search or the iteration cap gives out.
MaximizeResult maximize_smooth(const ScalarFunction& f, const GradientFunction& grad, const Vector& theta0,
                               const MaximizeOptions& opts = {});

} // namespace epl::numerics
