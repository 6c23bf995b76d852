#include "epl/numerics/finite_difference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epl/error.hpp"

namespace epl::numerics {

double epsilon_rule(const Vector& y) {
    const double norm = y.size() == 0 ? 0.0 : y.cwiseAbs().maxCoeff();
    return std::cbrt(std::numeric_limits<double>::epsilon()) / std::max(norm, 1e-8);
}

Vector fd_jvp(const VectorMap& g, const Vector& y, const Vector& d) { return fd_jvp(g, y, d, epsilon_rule(y)); }

Vector fd_jvp(const VectorMap& g, const Vector& y, const Vector& d, double eps) {
    if (d.size() != y.size()) throw InvalidInput("fd_jvp: direction and point have different lengths");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("fd_jvp: step must be positive and finite");
    const Vector plus = g(y + eps * d);
    if (!plus.allFinite()) throw NumericalFailure("fd_jvp: non-finite evaluation at y + eps*d (+ side)");
    const Vector minus = g(y - eps * d);
    if (!minus.allFinite()) throw NumericalFailure("fd_jvp: non-finite evaluation at y - eps*d (- side)");
    return (plus - minus) / (2.0 * eps);
}

Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& x) {
    const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    Vector grad(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = base * std::max(std::abs(x[i]), 1.0);
        probe[i] = x[i] + h;
        const double up_arg = probe[i];
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down_arg = probe[i];
        const double down = f(probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (up_arg - down_arg);
    }
    return grad;
}

} // namespace epl::numerics
