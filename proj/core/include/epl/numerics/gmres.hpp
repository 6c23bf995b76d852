#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "epl/game.hpp"

namespace epl::numerics {

/// A square linear map known only through its action v -> A v.
struct LinearOperator {
    Eigen::Index dim = 0;
    std::function<Vector(const Vector&)> apply;
};

LinearOperator matrix_operator(const Matrix& a);

struct GmresOptions {
    double tol_rel = 1e-5;
    std::optional<int> max_iter;   // default min(m, 200)
    std::optional<int> restart;    // default: full GMRES
    std::optional<Vector> d0;      // default: zero
};

struct GmresResult {
    Vector d;
    double residual_norm = 0.0;
    int iterations = 0;            // operator applications inside the Arnoldi loop
    bool converged = false;
    std::vector<double> residual_history;  // ||b - A d_n||, starting with n = 0
};

/// Minimal-residual Krylov solve of A d = b. Arnoldi with modified
/// Gram-Schmidt, least squares by Givens rotations. Stops once
/// ||b - A d|| <= tol_rel * ||b||.
GmresResult gmres(const LinearOperator& op, const Vector& b, const GmresOptions& opts = {});

} // namespace epl::numerics
