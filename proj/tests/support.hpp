#pragma once

// Hand-rolled generators and brute-force oracles shared by the test suites.

#include <cmath>
#include <cstdint>
#include <random>

#include "epl/game.hpp"

namespace epl::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
    return v;
}

inline game::Theta random_theta(Rng& rng, int n_firms) {
    game::Theta t = game::Theta::reference(n_firms);
    for (int i = 0; i < t.size(); ++i) t.values()[i] += uniform(rng, -0.5, 0.5);
    return t;
}

inline game::ValueFunction random_values(const game::Game& g, Rng& rng, double scale = 3.0) {
    return g.as_values(random_vector(rng, g.n_values(), -scale, scale));
}

inline game::GameConfig small_config(int n_firms, int n_sizes, double beta = 0.95) {
    game::GameConfig c;
    c.n_firms = n_firms;
    c.n_sizes = n_sizes;
    c.beta = beta;
    c.size_transition = game::default_size_transition(n_sizes);
    return c;
}

/// Random row-stochastic matrix with strictly positive entries.
inline Matrix random_stochastic(Rng& rng, int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) m(i, k) = uniform(rng, 0.1, 1.0);
        m.row(i) /= m.row(i).sum();
    }
    return m;
}

// ---- independent re-statements of the model, written without the library ----

inline double logit_one(double v0, double v1) { return 1.0 / (1.0 + std::exp(v0 - v1)); }

/// Per-period payoff of firm j choosing 1 at market size s when `n_active`
/// rivals are active; j's lagged action is `a_prev`.
inline double payoff_enter(const game::Theta& th, int j, int s, int n_active, int a_prev) {
    return th.fc(j) + th.rs() * s - th.rn() * std::log(1.0 + n_active) - th.ec() * (1 - a_prev);
}

} // namespace epl::test
