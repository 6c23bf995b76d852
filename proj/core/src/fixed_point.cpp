#include "epl/numerics/fixed_point.hpp"

#include <deque>

#include "epl/error.hpp"

namespace epl::numerics {

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Mixing weights gamma = argmin ||f - dF gamma||_2 with Tikhonov regularisation.
// Returns false when the system is too ill-conditioned to trust.
bool mixing_weights(const std::deque<Vector>& dF, const Vector& f, double reg, Vector& gamma) {
    const auto k = static_cast<Eigen::Index>(dF.size());
    Matrix gram(k, k);
    Vector rhs(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        rhs[a] = dF[a].dot(f);
        for (Eigen::Index c = 0; c <= a; ++c) gram(a, c) = gram(c, a) = dF[a].dot(dF[c]);
    }
    const double scale = gram.trace();
    if (!(scale > 0.0) || !std::isfinite(scale)) return false;
    gram.diagonal().array() += reg * scale;
    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) return false;
    gamma = ldlt.solve(rhs);
    return gamma.allFinite();
}

} // namespace

FixedPointResult fixed_point_solve(const VectorMap& map, const Vector& y0, const AndersonOptions& opts) {
    if (opts.memory < 0) throw InvalidInput("fixed_point_solve: memory must be >= 0");
    if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw InvalidInput("fixed_point_solve: damping must be in (0,1]");

    FixedPointResult out;
    Vector x = y0;
    Vector gx = map(x);
    if (gx.size() != x.size()) throw InvalidInput("fixed_point_solve: map changed the dimension");
    if (!gx.allFinite()) throw NumericalFailure("fixed_point_solve: map is not finite at the starting point");
    Vector f = gx - x;
    out.residual = inf_norm(f);

    std::deque<Vector> dX;
    std::deque<Vector> dF;
    const bool plain = opts.damping == 1.0;
    // Anderson can stagnate on non-contractive maps; drop the history when the
    // best residual has not improved for this many iterations.
    constexpr int kStallWindow = 50;
    double best = out.residual;
    int since_best = 0;

    while (out.residual > opts.tol && out.iterations < opts.max_iter) {
        Vector x_new;
        bool accelerated = false;
        if (opts.memory > 0 && !dF.empty()) {
            Vector gamma;
            while (!dF.empty() && !mixing_weights(dF, f, opts.regularization, gamma)) {
                dF.pop_front();
                dX.pop_front();
            }
            if (!dF.empty()) {
                x_new = plain ? gx : Vector(x + opts.damping * f);
                for (std::size_t c = 0; c < dF.size(); ++c) {
                    x_new.noalias() -= gamma[static_cast<Eigen::Index>(c)] * (dX[c] + opts.damping * dF[c]);
                }
                accelerated = x_new.allFinite();
            }
        }
        if (!accelerated) x_new = plain ? gx : Vector(x + opts.damping * f);

        Vector g_new = map(x_new);
        if (!g_new.allFinite()) {
            if (!accelerated) break;
            // Extrapolated point left the domain of the map; restart from plain iteration.
            dX.clear();
            dF.clear();
            continue;
        }
        ++out.iterations;
        Vector f_new = g_new - x_new;
        if (opts.memory > 0) {
            dX.push_back(x_new - x);
            dF.push_back(f_new - f);
            if (static_cast<int>(dF.size()) > opts.memory) {
                dX.pop_front();
                dF.pop_front();
            }
        }
        x = std::move(x_new);
        gx = std::move(g_new);
        f = std::move(f_new);
        out.residual = inf_norm(f);
        if (out.residual < best) {
            best = out.residual;
            since_best = 0;
        } else if (++since_best >= kStallWindow) {
            dX.clear();
            dF.clear();
            since_best = 0;
        }
    }
    out.converged = out.residual <= opts.tol;
    out.y = std::move(x);
    return out;
}

} // namespace epl::numerics
