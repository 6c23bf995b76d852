#include "epl/numerics/gmres.hpp"

#include <algorithm>
#include <cmath>

#include "epl/error.hpp"

namespace epl::numerics {

LinearOperator matrix_operator(const Matrix& a) {
    if (a.rows() != a.cols()) throw InvalidInput("matrix_operator: matrix must be square");
    return {a.rows(), [a](const Vector& v) -> Vector { return a * v; }};
}

namespace {

void make_givens(double f, double g, double& c, double& s) {
    if (g == 0.0) {
        c = 1.0;
        s = 0.0;
        return;
    }
    const double r = std::hypot(f, g);
    c = f / r;
    s = g / r;
}

} // namespace

GmresResult gmres(const LinearOperator& op, const Vector& b, const GmresOptions& opts) {
    const Eigen::Index m = op.dim;
    if (!op.apply) throw InvalidInput("gmres: operator has no apply function");
    if (b.size() != m) {
        throw InvalidInput("gmres: right-hand side has length " + std::to_string(b.size()) + ", operator dim is " +
                           std::to_string(m));
    }
    if (!b.allFinite()) throw InvalidInput("gmres: right-hand side is not finite");
    if (!(opts.tol_rel > 0.0)) throw InvalidInput("gmres: tol_rel must be positive");
    const int max_iter = opts.max_iter.value_or(static_cast<int>(std::min<Eigen::Index>(m, 200)));
    if (max_iter < 1) throw InvalidInput("gmres: max_iter must be >= 1");
    const int restart = std::max(1, opts.restart.value_or(max_iter));

    GmresResult res;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.d = Vector::Zero(m);
        res.converged = true;
        res.residual_history.push_back(0.0);
        return res;
    }
    const double target = opts.tol_rel * bnorm;

    Vector r;
    if (opts.d0 && opts.d0->size() != m) throw InvalidInput("gmres: initial guess has the wrong length");
    if (opts.d0 && opts.d0->squaredNorm() > 0.0) {
        res.d = *opts.d0;
        r = b - op.apply(res.d);
    } else {
        res.d = Vector::Zero(m);
        r = b;
    }
    double beta = r.norm();
    res.residual_norm = beta;
    res.residual_history.push_back(beta);
    if (beta <= target) {
        res.converged = true;
        return res;
    }

    while (res.iterations < max_iter) {
        const int cycle = std::min(restart, max_iter - res.iterations);
        Matrix basis(m, cycle + 1);
        Matrix hess = Matrix::Zero(cycle + 1, cycle);
        Vector cs(cycle), sn(cycle), g = Vector::Zero(cycle + 1);
        basis.col(0) = r / beta;
        g[0] = beta;

        int n = 0;
        bool breakdown = false;
        for (int i = 0; i < cycle; ++i) {
            Vector w = op.apply(basis.col(i));
            ++res.iterations;
            if (!w.allFinite()) throw NumericalFailure("gmres: operator returned a non-finite vector");
            const double wnorm0 = w.norm();
            for (int l = 0; l <= i; ++l) {
                hess(l, i) = w.dot(basis.col(l));
                w.noalias() -= hess(l, i) * basis.col(l);
            }
            const double wnorm = w.norm();
            hess(i + 1, i) = wnorm;
            breakdown = wnorm <= 1e-14 * wnorm0;

            for (int l = 0; l < i; ++l) {
                const double t = cs[l] * hess(l, i) + sn[l] * hess(l + 1, i);
                hess(l + 1, i) = -sn[l] * hess(l, i) + cs[l] * hess(l + 1, i);
                hess(l, i) = t;
            }
            make_givens(hess(i, i), hess(i + 1, i), cs[i], sn[i]);
            hess(i, i) = cs[i] * hess(i, i) + sn[i] * hess(i + 1, i);
            hess(i + 1, i) = 0.0;
            g[i + 1] = -sn[i] * g[i];
            g[i] = cs[i] * g[i];

            n = i + 1;
            res.residual_norm = std::abs(g[i + 1]);
            res.residual_history.push_back(res.residual_norm);
            if (res.residual_norm <= target || breakdown) break;
            basis.col(i + 1) = w / wnorm;
        }

        const Vector y = hess.topLeftCorner(n, n).triangularView<Eigen::Upper>().solve(g.head(n));
        res.d.noalias() += basis.leftCols(n) * y;

        if (res.residual_norm <= target) {
            res.converged = true;
            break;
        }
        if (breakdown || res.iterations >= max_iter) break;
        r = b - op.apply(res.d);
        beta = r.norm();
        res.residual_norm = beta;
        if (beta <= target) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace epl::numerics
