#include "epl/harness/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "epl/data/dataset.hpp"
#include "epl/error.hpp"
#include "epl/estimation/init.hpp"

namespace epl::harness {

std::string method_name(Method m) {
    switch (m) {
    case Method::EplAnalytic:
        return "epl-anal";
    case Method::EplKrylov:
        return "epl-krylov";
    case Method::EplJacobianFree:
        return "epl-jf";
    case Method::NfxpJacobianFree:
        return "nfxp-jf";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "epl-anal") return Method::EplAnalytic;
    if (name == "epl-krylov") return Method::EplKrylov;
    if (name == "epl-jf") return Method::EplJacobianFree;
    if (name == "nfxp-jf") return Method::NfxpJacobianFree;
    throw InvalidInput("unknown method '" + name + "' (expected epl-anal, epl-krylov, epl-jf or nfxp-jf)");
}

MonteCarloConfig MonteCarloConfig::from_run_config(const data::RunConfig& cfg) {
    MonteCarloConfig mc;
    mc.replications = cfg.reps;
    mc.base_seed = cfg.seed;
    mc.game = cfg.game;
    mc.theta_true = cfg.theta_true;
    mc.n_obs = cfg.n_obs;
    mc.methods.clear();
    for (const auto& m : cfg.methods) mc.methods.push_back(parse_method(m));
    mc.k_list = cfg.k_list;
    return mc;
}

namespace {

ReplicationRecord failure(int rep, Method m, int k, int K) {
    ReplicationRecord r;
    r.rep = rep;
    r.method = method_name(m);
    r.k = k;
    r.converged = false;
    r.loglik = std::numeric_limits<double>::quiet_NaN();
    r.theta = Vector::Constant(K, std::numeric_limits<double>::quiet_NaN());
    return r;
}

ReplicationRecord from_result(int rep, Method m, int k, const estimation::EstimateResult& res) {
    ReplicationRecord r;
    r.rep = rep;
    r.method = method_name(m);
    r.k = k;
    r.converged = res.converged;
    r.iterations = res.iterations;
    r.time_total_sec = res.timings.total;
    r.loglik = res.loglik;
    r.theta = res.theta_hat.values();
    return r;
}

estimation::LinearSolveMode mode_of(Method m) {
    switch (m) {
    case Method::EplAnalytic:
        return estimation::LinearSolveMode::Analytic;
    case Method::EplKrylov:
        return estimation::LinearSolveMode::AnalyticKrylov;
    default:
        return estimation::LinearSolveMode::JacobianFree;
    }
}

void run_epl_method(const MonteCarloConfig& cfg, const game::Game& game, const estimation::ActionCounts& counts,
                    const estimation::NplStep& init, int rep, Method m, std::vector<ReplicationRecord>& out) {
    const int K = game.n_params();
    std::vector<int> finite;
    bool want_inf = false;
    for (int k : cfg.k_list) {
        if (k == kInfinity) {
            want_inf = true;
        } else {
            finite.push_back(k);
        }
    }

    estimation::EplOptions opts = cfg.epl;
    opts.mode = mode_of(m);
    opts.k_fixed.reset();
    if (!want_inf) opts.k_fixed = *std::max_element(finite.begin(), finite.end());

    estimation::EstimateResult full;
    try {
        full = estimation::epl_estimate(game, counts, init.theta, init.v.flat(), opts);
    } catch (const Error&) {
        for (int k : cfg.k_list) out.push_back(failure(rep, m, k, K));
        return;
    }

    for (int k : cfg.k_list) {
        if (k == kInfinity) {
            out.push_back(from_result(rep, m, k, full));
            continue;
        }
        if (k <= static_cast<int>(full.trace.size())) {
            // k-EPL is the first k iterations of the same deterministic sequence.
            const auto& it = full.trace[k - 1];
            ReplicationRecord r;
            r.rep = rep;
            r.method = method_name(m);
            r.k = k;
            r.converged = true;
            r.iterations = k;
            r.time_total_sec = it.elapsed;
            r.theta = it.theta;
            r.loglik = it.loglik;
            out.push_back(r);
        } else if (full.converged) {
            estimation::EplOptions fixed = opts;
            fixed.k_fixed = k;
            try {
                out.push_back(from_result(rep, m, k, estimation::epl_estimate(game, counts, init.theta, init.v.flat(), fixed)));
            } catch (const Error&) {
                out.push_back(failure(rep, m, k, K));
            }
        } else {
            out.push_back(failure(rep, m, k, K));
        }
    }
}

} // namespace

std::vector<ReplicationRecord> run_replication(const MonteCarloConfig& cfg, int rep) {
    const game::Game game(cfg.game);
    const int K = game.n_params();
    std::vector<ReplicationRecord> out;

    data::Dataset data;
    estimation::NplStep init{game::Theta(game.n_firms()), game.zero_values()};
    estimation::ActionCounts counts;
    try {
        data = data::simulate_dataset(game, cfg.theta_true, cfg.n_obs, cfg.base_seed + static_cast<std::uint64_t>(rep));
        const auto logit = estimation::ccp_logit_init(game, data);
        init = estimation::npl_one_step(game, data, logit.ccps);
        counts = estimation::count_actions(game, data);
    } catch (const Error&) {
        for (Method m : cfg.methods) {
            if (m == Method::NfxpJacobianFree) {
                out.push_back(failure(rep, m, kInfinity, K));
            } else {
                for (int k : cfg.k_list) out.push_back(failure(rep, m, k, K));
            }
        }
        return out;
    }

    for (Method m : cfg.methods) {
        if (m == Method::NfxpJacobianFree) {
            try {
                out.push_back(from_result(rep, m, kInfinity, estimation::nfxp_estimate(game, data, init.theta, init.v, cfg.nfxp)));
            } catch (const Error&) {
                out.push_back(failure(rep, m, kInfinity, K));
            }
        } else {
            run_epl_method(cfg, game, counts, init, rep, m, out);
        }
    }
    return out;
}

std::vector<ReplicationRecord> run_monte_carlo(const MonteCarloConfig& cfg, int threads,
                                               const std::function<void(int)>& progress) {
    if (cfg.replications < 1) throw InvalidInput("run_monte_carlo: replications must be >= 1");
    if (cfg.methods.empty()) throw InvalidInput("run_monte_carlo: no methods requested");
    if (cfg.k_list.empty()) throw InvalidInput("run_monte_carlo: k_list is empty");
    cfg.game.validate();

    std::vector<std::vector<ReplicationRecord>> per_rep(cfg.replications);
    std::atomic<int> next{0};
    std::mutex progress_mutex;
    const auto worker = [&] {
        for (int rep = next++; rep < cfg.replications; rep = next++) {
            per_rep[rep] = run_replication(cfg, rep);
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(rep);
            }
        }
    };
    const int n_threads = std::clamp(threads, 1, cfg.replications);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }

    std::vector<ReplicationRecord> out;
    for (auto& recs : per_rep) {
        for (auto& r : recs) out.push_back(std::move(r));
    }
    return out;
}

void write_records_csv(const std::vector<ReplicationRecord>& records, std::ostream& out) {
    Eigen::Index K = 0;
    for (const auto& r : records) K = std::max(K, r.theta.size());
    out << "rep,method,k,converged,iterations,time_total_sec,loglik";
    for (Eigen::Index i = 0; i < K; ++i) out << ",theta_" << i + 1;
    out << '\n';
    out << std::setprecision(17);
    for (const auto& r : records) {
        out << r.rep << ',' << r.method << ',';
        if (r.k == kInfinity) {
            out << "inf";
        } else {
            out << r.k;
        }
        out << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << ',' << r.time_total_sec << ',' << r.loglik;
        for (Eigen::Index i = 0; i < K; ++i) out << ',' << (i < r.theta.size() ? r.theta[i] : std::nan(""));
        out << '\n';
    }
}

std::vector<ReplicationRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("records: empty file", 1);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) header.push_back(f);
    }
    const std::vector<std::string> fixed{"rep", "method", "k", "converged", "iterations", "time_total_sec", "loglik"};
    for (std::size_t c = 0; c < fixed.size(); ++c) {
        if (c >= header.size() || header[c] != fixed[c]) throw ParseError("records: missing column '" + fixed[c] + "'", 1);
    }
    const std::size_t K = header.size() - fixed.size();

    std::vector<ReplicationRecord> out;
    long line_no = 1;
    const auto number = [&](const std::string& s) {
        if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
        try {
            return std::stod(s);
        } catch (const std::exception&) {
            throw ParseError("records line " + std::to_string(line_no) + ": bad number '" + s + "'", line_no);
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != header.size()) {
            throw ParseError("records line " + std::to_string(line_no) + ": wrong number of fields", line_no);
        }
        ReplicationRecord r;
        r.rep = static_cast<int>(number(f[0]));
        r.method = f[1];
        r.k = f[2] == "inf" ? kInfinity : static_cast<int>(number(f[2]));
        r.converged = f[3] == "1" || f[3] == "true";
        r.iterations = static_cast<int>(number(f[4]));
        r.time_total_sec = number(f[5]);
        r.loglik = number(f[6]);
        r.theta.resize(static_cast<Eigen::Index>(K));
        for (std::size_t i = 0; i < K; ++i) r.theta[static_cast<Eigen::Index>(i)] = number(f[fixed.size() + i]);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace epl::harness
