#pragma once

#include "epl/numerics/finite_difference.hpp"

namespace epl::numerics {

struct AndersonOptions {
    int memory = 5;            // 0 = plain fixed-point iteration
    double damping = 1.0;      // in (0, 1]
    int max_iter = 20000;
    double tol = 1e-12;        // on ||map(y) - y||_inf
    double regularization = 1e-12;
};

struct FixedPointResult {
    Vector y;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;     // ||map(y) - y||_inf at the returned y
};

/// Type-II Anderson acceleration over the last `memory` residual differences.
FixedPointResult fixed_point_solve(const VectorMap& map, const Vector& y0, const AndersonOptions& opts = {});

} // namespace epl::numerics
