#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "epl/data/config.hpp"
#include "epl/estimation/epl.hpp"
#include "epl/estimation/nfxp.hpp"

namespace epl::harness {

enum class Method { EplAnalytic, EplKrylov, EplJacobianFree, NfxpJacobianFree };

/// "epl-anal", "epl-krylov", "epl-jf", "nfxp-jf".
std::string method_name(Method m);
Method parse_method(const std::string& name);

/// k value used for "iterate to convergence" in k_list and records.
inline constexpr int kInfinity = 0;

struct MonteCarloConfig {
    int replications = 100;
    std::uint64_t base_seed = 1;
    game::GameConfig game;
    game::Theta theta_true = game::Theta::reference(5);
    int n_obs = 1600;
    std::vector<Method> methods{Method::EplAnalytic, Method::EplKrylov, Method::EplJacobianFree};
    std::vector<int> k_list{1, 2, 3, kInfinity};
    estimation::EplOptions epl;       // mode and k_fixed are set per method
    estimation::NfxpOptions nfxp;

    static MonteCarloConfig from_run_config(const data::RunConfig& cfg);
};

struct ReplicationRecord {
    int rep = 0;
    std::string method;
    int k = kInfinity;
    bool converged = false;
    int iterations = 0;
    double time_total_sec = 0.0;
    double loglik = 0.0;
    Vector theta;
};

/// Per-replication output: every (method, k) record in method-major order.
/// The dataset uses seed base_seed + rep; all methods start from the same
/// logit -> one-step NPL initialisation. Failures become converged = false.
std::vector<ReplicationRecord> run_replication(const MonteCarloConfig& cfg, int rep);

/// Runs all replications on `threads` workers. Output order is (rep, method, k)
/// regardless of the thread count. `progress` is called once per finished rep.
std::vector<ReplicationRecord> run_monte_carlo(const MonteCarloConfig& cfg, int threads = 1,
                                               const std::function<void(int)>& progress = {});

/// CSV header rep,method,k,converged,iterations,time_total_sec,loglik,theta_1..theta_K;
/// k is written as "inf" for converged-iteration runs.
void write_records_csv(const std::vector<ReplicationRecord>& records, std::ostream& out);
std::vector<ReplicationRecord> read_records_csv(std::istream& in);

} // namespace epl::harness
