#include "epl/estimation/result.hpp"

#include <iomanip>
#include <sstream>

namespace epl::estimation {

std::string format_result(const EstimateResult& result) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "method = " << result.method << '\n';
    os << "converged = " << (result.converged ? "true" : "false") << '\n';
    os << "iterations = " << result.iterations << '\n';
    os << "time_total_sec = " << result.timings.total << '\n';
    os << "time_linear_sec = " << result.timings.linear << '\n';
    os << "time_theta_sec = " << result.timings.theta << '\n';
    os << "loglik = " << result.loglik << '\n';
    const Vector& t = result.theta_hat.values();
    for (Eigen::Index i = 0; i < t.size(); ++i) os << "theta_" << i + 1 << " = " << t[i] << '\n';
    return os.str();
}

} // namespace epl::estimation
