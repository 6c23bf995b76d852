#pragma once

#include "epl/data/dataset.hpp"
#include "epl/estimation/result.hpp"
#include "epl/numerics/fixed_point.hpp"
#include "epl/numerics/optimize.hpp"

namespace epl::estimation {

struct NfxpOptions {
    numerics::AndersonOptions inner{};   // tol 1e-12, memory 5
    double outer_tol = 1e-6;             // on the numerical gradient, inf-norm
    int max_outer = 500;
};

/// Maximises Q_N(theta, v*(theta)) with v* the equilibrium at theta. Each
/// inner solve starts from the equilibrium at the current accepted iterate
/// (initially `v_start`); the outer gradient is a central difference of the
/// objective.
/// Throws NumericalFailure naming theta when an inner solve fails.
EstimateResult nfxp_estimate(const game::Game& game, const data::Dataset& data, const game::Theta& theta0,
                             const game::ValueFunction& v_start, const NfxpOptions& opts = {});

} // namespace epl::estimation
