#include "epl/harness/diagnostics.hpp"

#include <cmath>
#include <random>

#include "epl/data/equilibrium.hpp"
#include "epl/error.hpp"
#include "epl/jacobian.hpp"
#include "epl/numerics/finite_difference.hpp"
#include "epl/numerics/linalg.hpp"

namespace epl::harness {

bool ErrorBoundReport::all_hold() const {
    for (const auto& c : columns) {
        if (!c.holds) return false;
    }
    return !columns.empty();
}

ErrorBoundReport error_bound_report(const game::Game& game, const game::Theta& theta, const game::ValueFunction& v,
                                    const std::vector<int>& columns, const numerics::GmresOptions& gmres) {
    const int m = game.n_values();
    const int K = game.n_params();
    if (m > kMaxDenseDiagnosticDim) {
        throw InvalidInput("error_bound_report: |Y| = " + std::to_string(m) + " exceeds the dense limit " +
                           std::to_string(kMaxDenseDiagnosticDim));
    }
    std::vector<int> cols = columns;
    if (cols.empty()) {
        for (int c = 0; c <= K; ++c) cols.push_back(c);
    }
    for (int c : cols) {
        if (c < 0 || c > K) throw InvalidInput("error_bound_report: column " + std::to_string(c) + " out of range");
    }

    const Matrix jac = game.analytic_jacobian(theta, v).to_dense();
    const auto hz = game.build_H_z(v);
    const Vector& y = v.flat();
    const numerics::VectorMap g = [&](const Vector& yy) { return game.constraint_G(theta, yy); };
    const double eps = numerics::epsilon_rule(y);
    const auto jvp = [&](const Vector& d) { return numerics::fd_jvp(g, y, d, eps); };
    const numerics::LinearOperator op{m, jvp};

    ErrorBoundReport report;
    report.cond = numerics::condition_number(jac);
    report.gmres_tol = gmres.tol_rel;

    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal;
    const auto probe_error = [&](const Vector& d) { return (jvp(d) - jac * d).norm(); };

    for (int c : cols) {
        const Vector b = c < K ? Vector(hz.H.col(c)) : hz.z;
        ColumnBound cb;
        cb.column = c;
        cb.b_norm = b.norm();
        const Vector d_star = numerics::direct_solve(jac, b);
        const auto sol = numerics::gmres(op, b, gmres);
        const Vector& d_tilde = sol.d;
        cb.eps_gmres = (jvp(d_tilde) - b).norm();
        const double d_star_norm = d_star.norm();
        cb.actual = d_star_norm > 0.0 ? (d_star - d_tilde).norm() / d_star_norm : (d_tilde.norm() > 0.0 ? INFINITY : 0.0);

        report.eps_jvp = std::max(report.eps_jvp, probe_error(d_tilde));
        report.eps_jvp = std::max(report.eps_jvp, probe_error(d_star));
        const double scale = std::max(d_tilde.norm(), 1.0);
        for (int p = 0; p < 3; ++p) {
            Vector r(m);
            for (int i = 0; i < m; ++i) r[i] = normal(rng);
            report.eps_jvp = std::max(report.eps_jvp, probe_error(r * (scale / r.norm())));
        }
        report.columns.push_back(cb);
    }

    for (auto& cb : report.columns) {
        if (cb.b_norm > 0.0) {
            cb.bound = report.cond * (report.eps_jvp + cb.eps_gmres) / cb.b_norm;
            cb.holds = cb.actual <= cb.bound;
        } else {
            cb.bound = 0.0;
            cb.holds = cb.actual == 0.0;
        }
    }
    return report;
}

DiagnosticPoint sample_diagnostic_point(const game::Game& game, const game::Theta& center, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-0.5, 0.5);
    game::Theta theta = center;
    for (int i = 0; i < theta.size(); ++i) theta.values()[i] += noise(rng);
    game::ValueFunction v = data::solve_equilibrium(game, theta).v;
    for (Eigen::Index i = 0; i < v.flat().size(); ++i) v.flat()[i] += noise(rng);
    return {theta, v};
}

} // namespace epl::harness
