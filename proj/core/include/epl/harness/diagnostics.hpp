#pragma once

#include <cstdint>
#include <vector>

#include "epl/game.hpp"
#include "epl/numerics/gmres.hpp"

namespace epl::harness {

struct ColumnBound {
    int column = 0;             // 0..K-1 -> h_{column+1}, K -> z
    double b_norm = 0.0;
    double eps_gmres = 0.0;     // ||JVP(d~) - b||_2 measured at the returned d~
    double actual = 0.0;        // ||d* - d~|| / ||d*||
    double bound = 0.0;         // cond * (eps_jvp + eps_gmres) / ||b||
    bool holds = false;
};

/// Forward-error check of the Jacobian-free linear solve against a dense
/// direct solve, all in 2-norms:
///   ||d* - d~|| / ||d*|| <= cond(grad_Y G) (eps_JVP + eps_GMRES) / ||b||.
struct ErrorBoundReport {
    double cond = 0.0;
    double eps_jvp = 0.0;       // max over probes of ||fd_jvp(d) - (grad_Y G) d||
    double gmres_tol = 0.0;
    std::vector<ColumnBound> columns;

    bool all_hold() const;
};

inline constexpr int kMaxDenseDiagnosticDim = 4096;

/// Runs the diagnostic on the listed columns of [H | z] (all K+1 when empty).
/// Throws InvalidInput when |Y| exceeds kMaxDenseDiagnosticDim.
ErrorBoundReport error_bound_report(const game::Game& game, const game::Theta& theta, const game::ValueFunction& v,
                                    const std::vector<int>& columns = {},
                                    const numerics::GmresOptions& gmres = {});

struct DiagnosticPoint {
    game::Theta theta;
    game::ValueFunction v;
};

/// theta = center + U(-0.5, 0.5) per component; v = the equilibrium at theta
/// plus U(-0.5, 0.5) noise, so the point is generally off the equilibrium.
DiagnosticPoint sample_diagnostic_point(const game::Game& game, const game::Theta& center, std::uint64_t seed);

} // namespace epl::harness
