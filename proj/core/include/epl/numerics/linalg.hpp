#pragma once

#include "epl/game.hpp"

namespace epl::numerics {

/// Solves A X = B by LU with partial pivoting. Throws SingularMatrix when a
/// pivot is zero to working precision.
Matrix direct_solve(const Matrix& a, const Matrix& b);

/// 2-norm condition number sigma_max / sigma_min.
double condition_number(const Matrix& a);

} // namespace epl::numerics
