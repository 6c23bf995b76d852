#include "epl/numerics/optimize.hpp"

#include <cmath>

#include "epl/error.hpp"
#include "epl/numerics/finite_difference.hpp"

namespace epl::numerics {

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

} // namespace

MaximizeResult maximize_smooth(const ScalarFunction& f, const GradientFunction& grad, const Vector& theta0,
                               const MaximizeOptions& opts) {
    const Eigen::Index n = theta0.size();
    constexpr double kArmijo = 1e-4;

    MaximizeResult out;
    out.theta = theta0;
    out.value = f(theta0);
    if (!std::isfinite(out.value)) throw NumericalFailure("maximize_smooth: objective not finite at the start");
    Vector g = grad(theta0);
    if (g.size() != n || !g.allFinite()) throw NumericalFailure("maximize_smooth: gradient not finite at the start");
    out.grad_norm = inf_norm(g);

    Matrix hinv = Matrix::Identity(n, n);
    bool fresh = true;

    for (; out.iterations < opts.max_iter; ++out.iterations) {
        if (out.grad_norm <= opts.tol_grad) {
            out.converged = true;
            return out;
        }
        Vector p = hinv * g;
        double slope = g.dot(p);
        if (!(slope > 0.0)) {
            hinv.setIdentity();
            fresh = true;
            p = g;
            slope = g.squaredNorm();
        }

        double t = 1.0;
        Vector trial;
        double f_trial = 0.0;
        Vector g_trial;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
            trial = out.theta + t * p;
            f_trial = f(trial);
            if (!std::isfinite(f_trial)) continue;
            if (f_trial >= out.value + kArmijo * t * slope) {
                accepted = true;
                break;
            }
            // Near the optimum the predicted increase falls below rounding of f;
            // accept any step that does not lose value and shrinks the gradient.
            if (std::abs(f_trial - out.value) <= 1e-14 * (1.0 + std::abs(out.value))) {
                g_trial = grad(trial);
                if (g_trial.allFinite() && inf_norm(g_trial) < out.grad_norm) {
                    accepted = true;
                    break;
                }
                g_trial.resize(0);
            }
        }
        if (!accepted) {
            if (!fresh) {
                hinv.setIdentity();
                fresh = true;
                continue;
            }
            return out;
        }
        if (g_trial.size() == 0) g_trial = grad(trial);
        if (!g_trial.allFinite()) return out;

        // BFGS on the minimisation of -f: s = step, y = change in -grad.
        const Vector s = trial - out.theta;
        const Vector y = g - g_trial;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh) {
                hinv = Matrix::Identity(n, n) * (sy / y.squaredNorm());
                fresh = false;
            }
            const double rho = 1.0 / sy;
            const Matrix left = Matrix::Identity(n, n) - rho * s * y.transpose();
            hinv = left * hinv * left.transpose() + rho * s * s.transpose();
        }
        out.theta = trial;
        out.value = f_trial;
        if (opts.on_accept) opts.on_accept(out.theta);
        g = g_trial;
        out.grad_norm = inf_norm(g);
    }
    out.converged = out.grad_norm <= opts.tol_grad;
    return out;
}

} // namespace epl::numerics
