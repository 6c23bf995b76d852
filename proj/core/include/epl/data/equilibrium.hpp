#pragma once

#include <optional>

#include "epl/game.hpp"
#include "epl/numerics/fixed_point.hpp"

namespace epl::data {

struct EquilibriumSolution {
    game::ValueFunction v;
    int iterations = 0;
    double residual = 0.0;  // ||v - Phi(theta, v)||_inf
};

/// Fixed point of Phi(theta, .) by Anderson-accelerated iteration. Starting
/// from v0 = 0 (the default) is the equilibrium-selection rule used throughout.
/// Throws NumericalFailure carrying the last residual on non-convergence.
EquilibriumSolution solve_equilibrium(const game::Game& game, const game::Theta& theta,
                                      const std::optional<game::ValueFunction>& v0 = std::nullopt,
                                      const numerics::AndersonOptions& opts = {});

/// Invariant distribution pi = pi M of a row-stochastic kernel by power
/// iteration from `initial` (uniform by default), to 1e-12 in the 1-norm.
Vector stationary_distribution(const Matrix& kernel, const std::optional<Vector>& initial = std::nullopt);

/// Ergodic state distribution when all firms play `ccps`.
Vector stationary_distribution(const game::Game& game, const game::CCPs& ccps,
                               const std::optional<Vector>& initial = std::nullopt);

} // namespace epl::data
