#include "epl/data/equilibrium.hpp"

#include <sstream>

#include "epl/error.hpp"

namespace epl::data {

EquilibriumSolution solve_equilibrium(const game::Game& game, const game::Theta& theta,
                                      const std::optional<game::ValueFunction>& v0,
                                      const numerics::AndersonOptions& opts) {
    const Vector start = v0 ? v0->flat() : game.zero_values().flat();
    if (start.size() != game.n_values()) throw InvalidInput("solve_equilibrium: v0 has the wrong dimension");
    const auto map = [&](const Vector& y) -> Vector { return game.phi(theta, game.as_values(y)).flat(); };
    auto fp = numerics::fixed_point_solve(map, start, opts);
    if (!fp.converged && opts.damping == 1.0) {
        // Same start, damped: slower, but it escapes the cycles undamped steps fall into.
        numerics::AndersonOptions damped = opts;
        damped.damping = 0.5;
        const auto retry = numerics::fixed_point_solve(map, start, damped);
        if (retry.residual < fp.residual) fp = retry;
    }
    if (!fp.converged) {
        std::ostringstream os;
        os << "solve_equilibrium: no convergence after " << fp.iterations << " iterations (residual "
           << fp.residual << ", tolerance " << opts.tol << ")";
        throw NumericalFailure(os.str());
    }
    return {game.as_values(fp.y), fp.iterations, fp.residual};
}

Vector stationary_distribution(const Matrix& kernel, const std::optional<Vector>& initial) {
    const Eigen::Index n = kernel.rows();
    if (kernel.cols() != n || n == 0) throw InvalidInput("stationary_distribution: kernel must be square");
    Vector pi = initial ? *initial : Vector::Constant(n, 1.0 / static_cast<double>(n));
    if (pi.size() != n || (pi.array() < 0.0).any() || std::abs(pi.sum() - 1.0) > 1e-12) {
        throw InvalidInput("stationary_distribution: initial distribution is not a probability vector");
    }
    const Matrix kt = kernel.transpose();
    constexpr int kMaxIter = 1000000;
    for (int it = 0; it < kMaxIter; ++it) {
        Vector next = kt * pi;
        next /= next.sum();
        const double change = (next - pi).lpNorm<1>();
        pi = std::move(next);
        if (change <= 1e-12) return pi;
    }
    throw NumericalFailure("stationary_distribution: power iteration did not converge");
}

Vector stationary_distribution(const game::Game& game, const game::CCPs& ccps, const std::optional<Vector>& initial) {
    return stationary_distribution(game.state_kernel(ccps), initial);
}

} // namespace epl::data
