#include "epl/estimation/init.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "epl/error.hpp"
#include "epl/numerics/linalg.hpp"

namespace epl::estimation {

namespace {

constexpr double kClip = 1e-9;
constexpr double kSeparationBound = 30.0;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double logistic(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

Eigen::Vector4d logit_features(const game::State& st, int j, int n_firms) {
    int rivals = 0;
    for (int l = 0; l < n_firms; ++l) {
        if (l != j) rivals += st.lagged_action(l);
    }
    return {1.0, static_cast<double>(st.s), static_cast<double>(st.lagged_action(j)), static_cast<double>(rivals)};
}

game::CCPs clipped(const game::CCPs& p) {
    game::CCPs out = p;
    for (Eigen::Index i = 0; i < out.flat().size(); i += 2) {
        const double p1 = std::clamp(p.flat()[i + 1], kClip, 1.0 - kClip);
        out.flat()[i] = 1.0 - p1;
        out.flat()[i + 1] = p1;
    }
    return out;
}

} // namespace

bool LogitInit::any_fallback() const {
    return std::any_of(used_fallback.begin(), used_fallback.end(), [](bool b) { return b; });
}

LogitInit ccp_logit_init(const game::Game& game, const data::Dataset& data) {
    data::check_dataset(game, data);
    const int J = game.n_firms();
    const int X = game.n_states();
    const double n_obs = static_cast<double>(data.size());

    LogitInit out{game::CCPs(J, X), std::vector<Vector>(J), std::vector<bool>(J, false)};
    std::vector<game::State> states(X);
    for (int x = 0; x < X; ++x) states[x] = game::decode_state(x, J);

    for (int j = 0; j < J; ++j) {
        Vector visits = Vector::Zero(X);
        Vector entries = Vector::Zero(X);
        for (const auto& obs : data.observations) {
            visits[obs.state] += 1.0;
            entries[obs.state] += obs.action(j);
        }
        const double total_entries = entries.sum();

        bool fallback = total_entries == 0.0 || total_entries == n_obs;
        Vector coef = Vector::Zero(4);
        if (!fallback) {
            const auto objective = [&](const Vector& b) {
                double ll = 0.0;
                for (int x = 0; x < X; ++x) {
                    if (visits[x] == 0.0) continue;
                    const double eta = logit_features(states[x], j, J).dot(b.head<4>());
                    ll += entries[x] * eta - visits[x] * softplus(eta);
                }
                return ll / n_obs;
            };
            const auto gradient = [&](const Vector& b) {
                Vector g = Vector::Zero(4);
                for (int x = 0; x < X; ++x) {
                    if (visits[x] == 0.0) continue;
                    const Eigen::Vector4d z = logit_features(states[x], j, J);
                    g += (entries[x] - visits[x] * logistic(z.dot(b.head<4>()))) * z;
                }
                return Vector(g / n_obs);
            };
            const auto fit = numerics::maximize_smooth(objective, gradient, coef);
            const bool diverged = !fit.theta.allFinite() || fit.theta.cwiseAbs().maxCoeff() > kSeparationBound;
            if (diverged || (!fit.converged && fit.grad_norm > 1e-6)) {
                fallback = true;
            } else {
                coef = fit.theta;
            }
        }

        out.used_fallback[j] = fallback;
        if (fallback) {
            for (int x = 0; x < X; ++x) {
                const double p1 = (entries[x] + 1.0) / (visits[x] + 2.0);
                out.ccps(j, x, 0) = 1.0 - p1;
                out.ccps(j, x, 1) = p1;
            }
        } else {
            out.coefficients[j] = coef;
            for (int x = 0; x < X; ++x) {
                const double p1 = logistic(logit_features(states[x], j, J).dot(coef.head<4>()));
                out.ccps(j, x, 0) = 1.0 - p1;
                out.ccps(j, x, 1) = p1;
            }
        }
    }
    return out;
}

PolicyEvaluation policy_evaluation(const game::Game& game, const game::CCPs& ccps) {
    const int J = game.n_firms();
    const int X = game.n_states();
    const int K = game.n_params();
    const double beta = game.config().beta;
    const double euler = game.config().include_euler ? std::numbers::egamma : 0.0;
    const game::CCPs p = clipped(ccps);

    PolicyEvaluation out;
    out.kernel = game.state_kernel(p);
    out.rhs_slope = Matrix::Zero(static_cast<Eigen::Index>(J) * X, K);
    out.rhs_offset = Vector::Zero(static_cast<Eigen::Index>(J) * X);
    for (int j = 0; j < J; ++j) {
        for (int x = 0; x < X; ++x) {
            const Eigen::Index row = static_cast<Eigen::Index>(j) * X + x;
            out.rhs_slope.row(row) = p(j, x, 1) * game.expected_features(p, j, x, 1).transpose();
            double offset = 0.0;
            for (int a = 0; a < game::kNumActions; ++a) offset += p(j, x, a) * (euler - std::log(p(j, x, a)));
            out.rhs_offset[row] = offset;
        }
    }

    // One factorisation of (I - beta F_P) serves every firm and every column.
    Matrix rhs(X, static_cast<Eigen::Index>(J) * (K + 1));
    for (int j = 0; j < J; ++j) {
        rhs.middleCols(static_cast<Eigen::Index>(j) * (K + 1), K) = out.rhs_slope.middleRows(j * X, X);
        rhs.col(static_cast<Eigen::Index>(j) * (K + 1) + K) = out.rhs_offset.segment(j * X, X);
    }
    const Matrix system = Matrix::Identity(X, X) - beta * out.kernel;
    const Matrix solution = numerics::direct_solve(system, rhs);
    out.w_slope.resize(static_cast<Eigen::Index>(J) * X, K);
    out.w_offset.resize(static_cast<Eigen::Index>(J) * X);
    for (int j = 0; j < J; ++j) {
        out.w_slope.middleRows(j * X, X) = solution.middleCols(static_cast<Eigen::Index>(j) * (K + 1), K);
        out.w_offset.segment(j * X, X) = solution.col(static_cast<Eigen::Index>(j) * (K + 1) + K);
    }
    return out;
}

AffineValues npl_value_map(const game::Game& game, const game::CCPs& ccps, const PolicyEvaluation& policy) {
    const int J = game.n_firms();
    const int X = game.n_states();
    const int K = game.n_params();
    const double beta = game.config().beta;
    const game::CCPs p = clipped(ccps);

    AffineValues out{Matrix(game.n_values(), K), Vector(game.n_values())};
    for (int j = 0; j < J; ++j) {
        const auto w_slope = policy.w_slope.middleRows(j * X, X);
        const auto w_offset = policy.w_offset.segment(j * X, X);
        for (int x = 0; x < X; ++x) {
            for (int a = 0; a < game::kNumActions; ++a) {
                const Eigen::Index row = game::FirmStateActionArray::offset(X, j, x, a);
                const Vector f = game.transition_probs(p, j, x, a);
                out.slope.row(row) = game.expected_features(p, j, x, a).transpose() + beta * (f.transpose() * w_slope);
                out.offset[row] = beta * f.dot(w_offset);
            }
        }
    }
    return out;
}

NplStep npl_one_step(const game::Game& game, const data::Dataset& data, const game::CCPs& ccps,
                     const numerics::MaximizeOptions& opts) {
    const ActionCounts counts = count_actions(game, data);
    const PolicyEvaluation policy = policy_evaluation(game, ccps);
    const AffineValues map = npl_value_map(game, ccps, policy);

    const auto fit = numerics::maximize_smooth(
        [&](const Vector& t) { return pseudo_loglik(map, counts, t).value; },
        [&](const Vector& t) { return pseudo_loglik(map, counts, t).gradient; }, Vector::Zero(game.n_params()), opts);
    if (!fit.converged && fit.grad_norm > 1e-6) {
        throw NumericalFailure("npl_one_step: pseudo-likelihood maximisation failed (gradient norm " +
                               std::to_string(fit.grad_norm) + ")");
    }
    return {game::Theta(game.n_firms(), fit.theta), game.as_values(map.at(fit.theta)), fit.value, fit.converged};
}

} // namespace epl::estimation
