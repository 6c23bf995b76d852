#pragma once

#include <optional>
#include <string_view>

#include "epl/estimation/likelihood.hpp"
#include "epl/estimation/result.hpp"
#include "epl/numerics/gmres.hpp"
#include "epl/numerics/optimize.hpp"

namespace epl::estimation {

/// How (grad_Y G)^{-1} [H | z] is obtained in each EPL iteration.
enum class LinearSolveMode {
    Analytic,        // dense analytic Jacobian, LU solve
    AnalyticKrylov,  // analytic Jacobian-vector products, GMRES per column
    JacobianFree,    // central-difference JVPs of G, GMRES per column
};

std::string_view to_string(LinearSolveMode mode);

/// Right-hand side of the last of the K+1 solves.
///   Columns   solve for d_z against z directly.
///   Residual  solve for d_G against G(theta_prev, Y_prev) = H theta_prev + z and
///             set d_z = d_G - D_H theta_prev. Same d_z in exact arithmetic; the
///             solver error on d_G shrinks with G, so the EPL fixed point does not
///             move with the GMRES tolerance.
enum class RhsForm { Columns, Residual };

struct EplOptions {
    LinearSolveMode mode = LinearSolveMode::JacobianFree;
    std::optional<double> tol_theta;   // default 1e-2 / K
    std::optional<double> tol_values;  // default 1e-2 / K
    int max_outer = 100;
    std::optional<int> k_fixed;        // stop after exactly k iterations
    numerics::GmresOptions gmres;
    bool warm_start = true;            // seed each GMRES solve with the previous iteration's columns
    RhsForm rhs_form = RhsForm::Residual;
    numerics::MaximizeOptions theta_step;
};

/// D_H = (grad_Y G)^{-1} H and d_z = (grad_Y G)^{-1} z at (theta, Y).
struct LinearStep {
    Matrix d_h;
    Vector d_z;
    int gmres_iterations = 0;
    long g_evaluations = 0;
};

/// Throws NumericalFailure naming the column when GMRES stalls, or when the
/// Jacobian is singular in Analytic mode. `warm` seeds GMRES with a previous
/// step's columns.
LinearStep epl_linear_step(const game::Game& game, const game::Theta& theta, const Vector& values,
                           LinearSolveMode mode, const numerics::GmresOptions& gmres = {},
                           const LinearStep* warm = nullptr, RhsForm form = RhsForm::Residual);

/// Upsilon(theta) = Y_prev - D_H theta - d_z.
Vector upsilon(const Vector& theta, const Vector& values_prev, const LinearStep& step);
AffineValues upsilon_map(const Vector& values_prev, const LinearStep& step);

EstimateResult epl_estimate(const game::Game& game, const ActionCounts& counts, const game::Theta& theta0,
                            const Vector& values0, const EplOptions& opts = {});
EstimateResult epl_estimate(const game::Game& game, const data::Dataset& data, const game::Theta& theta0,
                            const Vector& values0, const EplOptions& opts = {});

} // namespace epl::estimation
