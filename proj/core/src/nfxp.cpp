#include "epl/estimation/nfxp.hpp"

#include <chrono>
#include <sstream>

#include "epl/data/equilibrium.hpp"
#include "epl/error.hpp"
#include "epl/estimation/likelihood.hpp"
#include "epl/numerics/finite_difference.hpp"

namespace epl::estimation {

EstimateResult nfxp_estimate(const game::Game& game, const data::Dataset& data, const game::Theta& theta0,
                             const game::ValueFunction& v_start, const NfxpOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const ActionCounts counts = count_actions(game, data);
    if (theta0.n_firms() != game.n_firms()) throw InvalidInput("nfxp_estimate: theta0 does not match the game");

    // Inner solves start from the equilibrium at the accepted iterate. Starting
    // from the last evaluation instead lets a rejected line-search trial move
    // the inner loop onto another equilibrium branch.
    std::optional<game::ValueFunction> anchor = v_start;
    const auto objective = [&](const Vector& t) -> double {
        const game::Theta theta(game.n_firms(), t);
        try {
            return loglik(counts, data::solve_equilibrium(game, theta, anchor, opts.inner).v.flat());
        } catch (const NumericalFailure& e) {
            std::ostringstream os;
            os << "nfxp_estimate: inner loop failed at theta = (" << t.transpose() << "): " << e.what();
            throw NumericalFailure(os.str());
        }
    };
    const auto gradient = [&](const Vector& t) { return numerics::central_gradient(objective, t); };

    numerics::MaximizeOptions outer;
    outer.tol_grad = opts.outer_tol;
    outer.max_iter = opts.max_outer;
    outer.on_accept = [&](const Vector& t) {
        anchor = data::solve_equilibrium(game, game::Theta(game.n_firms(), t), anchor, opts.inner).v;
    };
    const auto fit = numerics::maximize_smooth(objective, gradient, theta0.values(), outer);

    EstimateResult result;
    result.method = "nfxp-jf";
    result.theta_hat = game::Theta(game.n_firms(), fit.theta);
    const auto final_eq = data::solve_equilibrium(game, result.theta_hat, anchor, opts.inner);
    result.v_hat = final_eq.v;
    result.loglik = loglik(counts, final_eq.v.flat());
    result.iterations = fit.iterations;
    result.converged = fit.converged;
    if (!fit.converged) {
        std::ostringstream os;
        os << "nfxp_estimate: outer gradient norm " << fit.grad_norm << " above tolerance " << opts.outer_tol;
        result.message = os.str();
    }
    result.timings.total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.timings.theta = result.timings.total;
    return result;
}

} // namespace epl::estimation
