#include "epl/estimation/likelihood.hpp"

#include <cmath>

#include "epl/error.hpp"

namespace epl::estimation {

ActionCounts count_actions(const game::Game& game, const data::Dataset& data) {
    data::check_dataset(game, data);
    ActionCounts out{Vector::Zero(game.n_values()), static_cast<int>(data.size())};
    for (const auto& obs : data.observations) {
        for (int j = 0; j < game.n_firms(); ++j) {
            out.counts[game::FirmStateActionArray::offset(game.n_states(), j, obs.state, obs.action(j))] += 1.0;
        }
    }
    return out;
}

double loglik(const ActionCounts& counts, const Vector& values) {
    if (values.size() != counts.counts.size()) throw InvalidInput("loglik: value vector has the wrong length");
    double total = 0.0;
    for (Eigen::Index i = 0; i < values.size(); i += 2) {
        const double n0 = counts.counts[i];
        const double n1 = counts.counts[i + 1];
        if (n0 + n1 == 0.0) continue;
        const double v0 = values[i];
        const double v1 = values[i + 1];
        const double lse = std::max(v0, v1) + std::log1p(std::exp(-std::abs(v0 - v1)));
        total += n0 * (v0 - lse) + n1 * (v1 - lse);
    }
    return total / counts.n_obs;
}

LoglikValue pseudo_loglik(const AffineValues& map, const ActionCounts& counts, const Vector& theta) {
    if (map.slope.cols() != theta.size()) throw InvalidInput("pseudo_loglik: theta has the wrong length");
    const Vector v = map.at(theta);
    Vector weights = Vector::Zero(v.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < v.size(); i += 2) {
        const double n0 = counts.counts[i];
        const double n1 = counts.counts[i + 1];
        const double n = n0 + n1;
        if (n == 0.0) continue;
        const double v0 = v[i];
        const double v1 = v[i + 1];
        const double lse = std::max(v0, v1) + std::log1p(std::exp(-std::abs(v0 - v1)));
        total += n0 * (v0 - lse) + n1 * (v1 - lse);
        const double p0 = std::exp(v0 - lse);
        const double p1 = std::exp(v1 - lse);
        weights[i] = n0 - n * p0;
        weights[i + 1] = n1 - n * p1;
    }
    LoglikValue out;
    out.value = total / counts.n_obs;
    out.gradient = map.slope.transpose() * weights / static_cast<double>(counts.n_obs);
    return out;
}

} // namespace epl::estimation
