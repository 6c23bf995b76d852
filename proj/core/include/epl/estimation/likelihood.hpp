#pragma once

#include "epl/data/dataset.hpp"
#include "epl/game.hpp"

namespace epl::estimation {

/// Sufficient statistics of a dataset for logit likelihoods: counts[j,x,a]
/// in the value-vector layout.
struct ActionCounts {
    Vector counts;
    int n_obs = 0;
};

ActionCounts count_actions(const game::Game& game, const data::Dataset& data);

/// Values that are affine in theta: v(theta) = slope * theta + offset.
struct AffineValues {
    Matrix slope;
    Vector offset;

    Vector at(const Vector& theta) const { return slope * theta + offset; }
};

struct LoglikValue {
    double value = 0.0;
    Vector gradient;
};

/// Q_N = (1/N) sum_i sum_j ln Lambda^j(x_i, a_i^j; v).
double loglik(const ActionCounts& counts, const Vector& values);

/// Q_N at v(theta) and its gradient through the affine map.
LoglikValue pseudo_loglik(const AffineValues& map, const ActionCounts& counts, const Vector& theta);

} // namespace epl::estimation
