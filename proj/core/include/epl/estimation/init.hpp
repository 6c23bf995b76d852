#pragma once

#include <vector>

#include "epl/estimation/likelihood.hpp"
#include "epl/numerics/optimize.hpp"

namespace epl::estimation {

struct LogitInit {
    game::CCPs ccps;
    std::vector<Vector> coefficients;    // per firm: (const, s, a_prev^j, sum of rivals' a_prev)
    std::vector<bool> used_fallback;     // per firm: separation -> smoothed frequencies
    bool any_fallback() const;
};

/// Per-firm binary logit of a^j on (1, s, a_prev^j, sum_{l != j} a_prev^l),
/// evaluated at every state. Firms whose logit separates fall back to
/// add-one smoothed frequencies per state.
LogitInit ccp_logit_init(const game::Game& game, const data::Dataset& data);

/// Policy evaluation at fixed CCPs P. Row block j of every matrix below is
/// firm j's |X| states:
///   (I - beta F_P) W = rhs,   rhs = rhs_slope theta + rhs_offset
struct PolicyEvaluation {
    Matrix kernel;        // F_P, |X| x |X|
    Matrix rhs_slope;     // J|X| x K
    Vector rhs_offset;    // J|X|
    Matrix w_slope;       // J|X| x K
    Vector w_offset;      // J|X|
};

/// CCPs are clipped to [1e-9, 1 - 1e-9] before use.
PolicyEvaluation policy_evaluation(const game::Game& game, const game::CCPs& ccps);

/// Gamma(theta, P): choice-specific values implied by evaluating P, affine in theta.
AffineValues npl_value_map(const game::Game& game, const game::CCPs& ccps, const PolicyEvaluation& policy);

struct NplStep {
    game::Theta theta;
    game::ValueFunction v;
    double loglik = 0.0;
    bool converged = false;
};

/// One NPL iteration: maximise the pseudo-likelihood of Lambda(Gamma(theta, P)).
NplStep npl_one_step(const game::Game& game, const data::Dataset& data, const game::CCPs& ccps,
                     const numerics::MaximizeOptions& opts = {});

} // namespace epl::estimation
