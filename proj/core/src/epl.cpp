#include "epl/estimation/epl.hpp"

#include <chrono>
#include <sstream>

#include "epl/error.hpp"
#include "epl/jacobian.hpp"
#include "epl/numerics/finite_difference.hpp"
#include "epl/numerics/linalg.hpp"

namespace epl::estimation {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

std::string column_name(Eigen::Index c, Eigen::Index K) {
    return c < K ? "h_" + std::to_string(c + 1) : std::string("z");
}

} // namespace

std::string_view to_string(LinearSolveMode mode) {
    switch (mode) {
    case LinearSolveMode::Analytic:
        return "analytic";
    case LinearSolveMode::AnalyticKrylov:
        return "analytic-krylov";
    case LinearSolveMode::JacobianFree:
        return "jacobian-free";
    }
    return "unknown";
}

LinearStep epl_linear_step(const game::Game& game, const game::Theta& theta, const Vector& values,
                           LinearSolveMode mode, const numerics::GmresOptions& gmres, const LinearStep* warm,
                           RhsForm form) {
    const game::ValueFunction v = game.as_values(values);
    const game::LinearDecomposition hz = game.build_H_z(v);
    const Eigen::Index K = hz.H.cols();
    Matrix rhs(hz.H.rows(), K + 1);
    if (form == RhsForm::Residual) {
        rhs << hz.H, hz.H * theta.values() + hz.z;
    } else {
        rhs << hz.H, hz.z;
    }

    LinearStep step;
    Matrix solution;
    if (mode == LinearSolveMode::Analytic) {
        try {
            solution = numerics::direct_solve(game.analytic_jacobian(theta, v).to_dense(), rhs);
        } catch (const SingularMatrix& e) {
            throw NumericalFailure(std::string("epl_linear_step: singular Jacobian: ") + e.what());
        }
    } else {
        numerics::LinearOperator op;
        op.dim = values.size();
        std::optional<game::StructuredJacobian> jac;
        numerics::VectorMap g;
        double eps = 0.0;
        if (mode == LinearSolveMode::AnalyticKrylov) {
            jac.emplace(game.analytic_jacobian(theta, v));
            op.apply = [&](const Vector& d) -> Vector { return jac->apply(d); };
        } else {
            g = [&](const Vector& y) -> Vector {
                ++step.g_evaluations;
                return game.constraint_G(theta, y);
            };
            eps = numerics::epsilon_rule(values);
            op.apply = [&](const Vector& d) -> Vector { return numerics::fd_jvp(g, values, d, eps); };
        }

        solution.resize(rhs.rows(), rhs.cols());
        for (Eigen::Index c = 0; c <= K; ++c) {
            numerics::GmresOptions opts = gmres;
            if (warm && warm->d_h.rows() == rhs.rows()) {
                // The residual right-hand side shrinks every iteration, so zero is its best guess.
                if (c < K) {
                    opts.d0 = Vector(warm->d_h.col(c));
                } else if (form == RhsForm::Columns) {
                    opts.d0 = warm->d_z;
                }
            }
            const auto res = numerics::gmres(op, rhs.col(c), opts);
            step.gmres_iterations += res.iterations;
            if (!res.converged) {
                std::ostringstream os;
                os << "epl_linear_step: GMRES did not converge on column " << column_name(c, K) << " (residual "
                   << res.residual_norm << " after " << res.iterations << " iterations, |b| = " << rhs.col(c).norm()
                   << ")";
                throw NumericalFailure(os.str());
            }
            solution.col(c) = res.d;
        }
    }
    step.d_h = solution.leftCols(K);
    step.d_z = solution.col(K);
    if (form == RhsForm::Residual) step.d_z -= step.d_h * theta.values();
    return step;
}

Vector upsilon(const Vector& theta, const Vector& values_prev, const LinearStep& step) {
    return values_prev - step.d_h * theta - step.d_z;
}

AffineValues upsilon_map(const Vector& values_prev, const LinearStep& step) {
    return {-step.d_h, values_prev - step.d_z};
}

EstimateResult epl_estimate(const game::Game& game, const data::Dataset& data, const game::Theta& theta0,
                            const Vector& values0, const EplOptions& opts) {
    return epl_estimate(game, count_actions(game, data), theta0, values0, opts);
}

EstimateResult epl_estimate(const game::Game& game, const ActionCounts& counts, const game::Theta& theta0,
                            const Vector& values0, const EplOptions& opts) {
    const int K = game.n_params();
    if (theta0.size() != K) throw InvalidInput("epl_estimate: theta0 has the wrong length");
    if (values0.size() != game.n_values()) throw InvalidInput("epl_estimate: Y0 has the wrong length");
    const double tol_theta = opts.tol_theta.value_or(1e-2 / K);
    const double tol_values = opts.tol_values.value_or(1e-2 / K);
    if (!(tol_theta > 0.0) || !(tol_values > 0.0)) throw InvalidInput("epl_estimate: tolerances must be positive");
    if (opts.k_fixed && *opts.k_fixed < 1) throw InvalidInput("epl_estimate: k_fixed must be >= 1");

    EstimateResult result;
    result.method = opts.mode == LinearSolveMode::Analytic         ? "epl-anal"
                    : opts.mode == LinearSolveMode::AnalyticKrylov ? "epl-krylov"
                                                                   : "epl-jf";
    const auto start = Clock::now();

    Vector theta = theta0.values();
    Vector values = values0;
    std::optional<LinearStep> previous;
    const int limit = opts.k_fixed.value_or(opts.max_outer);

    for (int k = 1; k <= limit; ++k) {
        auto t0 = Clock::now();
        LinearStep step;
        try {
            step = epl_linear_step(game, game::Theta(game.n_firms(), theta), values, opts.mode, opts.gmres,
                                   opts.warm_start && previous ? &*previous : nullptr, opts.rhs_form);
        } catch (const NumericalFailure& e) {
            result.message = e.what();
            break;
        }
        result.timings.linear += seconds_since(t0);

        t0 = Clock::now();
        const AffineValues map = upsilon_map(values, step);
        const auto fit = numerics::maximize_smooth(
            [&](const Vector& t) { return pseudo_loglik(map, counts, t).value; },
            [&](const Vector& t) { return pseudo_loglik(map, counts, t).gradient; }, theta, opts.theta_step);
        result.timings.theta += seconds_since(t0);
        if (!fit.converged && fit.grad_norm > 1e-6) {
            result.message = "epl_estimate: theta step failed at iteration " + std::to_string(k) +
                             " (gradient norm " + std::to_string(fit.grad_norm) + ")";
            break;
        }
        Vector values_new = map.at(fit.theta);
        if (!values_new.allFinite()) {
            result.message = "epl_estimate: non-finite values at iteration " + std::to_string(k);
            break;
        }

        IterationRecord rec;
        rec.k = k;
        rec.theta = fit.theta;
        rec.loglik = fit.value;
        rec.theta_step = inf_norm(fit.theta - theta);
        rec.value_step = inf_norm(values_new - values);
        rec.grad_norm = fit.grad_norm;
        rec.elapsed = seconds_since(start);
        result.trace.push_back(rec);

        theta = fit.theta;
        values = std::move(values_new);
        result.iterations = k;
        if (opts.warm_start) previous = std::move(step);

        if (opts.k_fixed) {
            if (k == *opts.k_fixed) result.converged = true;
        } else if (rec.theta_step <= tol_theta && rec.value_step <= tol_values) {
            result.converged = true;
            break;
        }
    }
    if (!result.converged && result.message.empty()) {
        result.message = "epl_estimate: no convergence within " + std::to_string(opts.max_outer) + " iterations";
    }

    result.theta_hat = game::Theta(game.n_firms(), theta);
    result.v_hat = game.as_values(values);
    result.loglik = loglik(counts, values);
    result.timings.total = seconds_since(start);
    return result;
}

} // namespace epl::estimation
