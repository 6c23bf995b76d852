#pragma once

#include <string>
#include <vector>

#include "epl/game.hpp"

namespace epl::estimation {

struct StageTimings {
    double init = 0.0;
    double linear = 0.0;
    double theta = 0.0;
    double total = 0.0;
};

struct IterationRecord {
    int k = 0;
    Vector theta;
    double loglik = 0.0;
    double theta_step = 0.0;   // ||theta_k - theta_{k-1}||_inf
    double value_step = 0.0;   // ||Y_k - Y_{k-1}||_inf
    double grad_norm = 0.0;    // theta-step optimality at theta_k
    double elapsed = 0.0;      // seconds since the estimator started
};

struct EstimateResult {
    std::string method;
    game::Theta theta_hat{1};
    game::ValueFunction v_hat;
    int iterations = 0;
    bool converged = false;
    double loglik = 0.0;
    StageTimings timings;
    std::vector<IterationRecord> trace;
    std::string message;
};

/// Flat `key = value` record: method, converged, iterations, time_total_sec,
/// time_linear_sec, time_theta_sec, loglik, theta_1..theta_K.
std::string format_result(const EstimateResult& result);

} // namespace epl::estimation
