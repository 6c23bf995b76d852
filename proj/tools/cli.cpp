#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "epl/data/config.hpp"
#include "epl/data/dataset.hpp"
#include "epl/data/equilibrium.hpp"
#include "epl/error.hpp"
#include "epl/estimation/epl.hpp"
#include "epl/estimation/init.hpp"
#include "epl/estimation/nfxp.hpp"
#include "epl/harness/diagnostics.hpp"
#include "epl/harness/montecarlo.hpp"
#include "epl/harness/summary.hpp"

namespace epl::cli {

namespace {

namespace fs = std::filesystem;

int parse_k(const std::string& s) {
    if (s == "inf" || s == "infinity") return harness::kInfinity;
    try {
        std::size_t pos = 0;
        const int k = std::stoi(s, &pos);
        if (pos == s.size() && k >= 1) return k;
    } catch (const std::exception&) {
    }
    throw InvalidInput("--k expects a positive integer or 'inf', got '" + s + "'");
}

data::RunConfig load_or_default(const std::string& path) {
    return path.empty() ? data::reference_config() : data::load_config(path);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot write '" + path.string() + "'");
    f << text;
}

struct SimulateArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_obs;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    data::RunConfig cfg = load_or_default(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.n_obs) cfg.n_obs = *a.n_obs;
    const game::Game game(cfg.game);
    const auto ds = data::simulate_dataset(game, cfg.theta_true, cfg.n_obs, cfg.seed);
    data::write_dataset(ds, a.out);
    out << "wrote " << ds.observations.size() << " observations to " << a.out << '\n';
    return kExitOk;
}

struct EstimateArgs {
    std::string config;
    std::string data;
    std::string out;
    std::string method = "epl-jf";
    std::string k = "inf";
};

int run_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
    const harness::Method method = harness::parse_method(a.method);
    const int k = parse_k(a.k);
    const data::Dataset ds = data::read_dataset(a.data);
    data::RunConfig cfg = load_or_default(a.config);
    if (a.config.empty() && (ds.n_firms != cfg.game.n_firms || ds.n_sizes != cfg.game.n_sizes)) {
        cfg.game.n_firms = ds.n_firms;
        cfg.game.n_sizes = ds.n_sizes;
        cfg.game.size_transition = game::default_size_transition(ds.n_sizes);
    }
    const game::Game game(cfg.game);
    data::check_dataset(game, ds);

    const auto logit = estimation::ccp_logit_init(game, ds);
    const auto init = estimation::npl_one_step(game, ds, logit.ccps);

    estimation::EstimateResult result;
    if (method == harness::Method::NfxpJacobianFree) {
        result = estimation::nfxp_estimate(game, ds, init.theta, init.v);
    } else {
        estimation::EplOptions opts;
        opts.mode = method == harness::Method::EplAnalytic    ? estimation::LinearSolveMode::Analytic
                    : method == harness::Method::EplKrylov    ? estimation::LinearSolveMode::AnalyticKrylov
                                                              : estimation::LinearSolveMode::JacobianFree;
        if (k != harness::kInfinity) opts.k_fixed = k;
        result = estimation::epl_estimate(game, ds, init.theta, init.v.flat(), opts);
    }

    const std::string record = estimation::format_result(result);
    if (a.out.empty()) {
        out << record;
    } else {
        write_text(a.out, record);
        out << "wrote result to " << a.out << '\n';
    }
    if (!result.converged) {
        err << "estimation did not converge";
        if (!result.message.empty()) err << ": " << result.message;
        err << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

struct MonteCarloArgs {
    std::string config;
    std::string out;
    std::optional<int> reps;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_obs;
    int threads = 1;
    std::vector<std::string> methods;
    std::vector<std::string> k_list;
    bool quiet = false;
};

int run_montecarlo(const MonteCarloArgs& a, std::ostream& out, std::ostream& err) {
    data::RunConfig cfg = load_or_default(a.config);
    if (a.reps) cfg.reps = *a.reps;
    if (a.seed) cfg.seed = *a.seed;
    if (a.n_obs) cfg.n_obs = *a.n_obs;
    if (!a.methods.empty()) cfg.methods = a.methods;
    if (!a.k_list.empty()) {
        cfg.k_list.clear();
        for (const auto& k : a.k_list) cfg.k_list.push_back(parse_k(k));
    }
    if (cfg.reps < 1) throw InvalidInput("--reps must be >= 1");
    if (a.threads < 1) throw InvalidInput("--threads must be >= 1");
    const auto mc = harness::MonteCarloConfig::from_run_config(cfg);

    const fs::path dir(a.out);
    fs::create_directories(dir);
    write_text(dir / "config.txt", data::format_config(cfg));

    int done = 0;
    const auto progress = [&](int rep) {
        ++done;
        if (!a.quiet) err << "replication " << rep << " done (" << done << "/" << mc.replications << ")\n";
    };
    const auto records = harness::run_monte_carlo(mc, a.threads, progress);
    {
        std::ofstream f(dir / "records.csv");
        if (!f) throw InvalidInput("cannot write '" + (dir / "records.csv").string() + "'");
        harness::write_records_csv(records, f);
    }
    out << "wrote " << records.size() << " records to " << (dir / "records.csv").string() << '\n';
    return kExitOk;
}

int run_summarize(const std::string& dir_arg, std::ostream& out) {
    const fs::path dir(dir_arg);
    const fs::path path = fs::is_directory(dir) ? dir / "records.csv" : dir;
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open records file '" + path.string() + "'");
    const auto records = harness::read_records_csv(f);
    const auto summary = harness::summarize(records);
    const std::string text = harness::format_summary_text(summary);
    const fs::path out_dir = fs::is_directory(dir) ? dir : path.parent_path();
    write_text(out_dir / "summary.txt", text);
    {
        std::ofstream csv(out_dir / "summary.csv");
        if (!csv) throw InvalidInput("cannot write '" + (out_dir / "summary.csv").string() + "'");
        harness::write_summary_csv(summary, csv);
    }
    out << text;
    return kExitOk;
}

struct DiagnoseArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 1;
    int points = 1;
    double gmres_tol = 1e-5;
};

int run_diagnose(const DiagnoseArgs& a, std::ostream& out) {
    const data::RunConfig cfg = load_or_default(a.config);
    const game::Game game(cfg.game);
    if (a.points < 1) throw InvalidInput("--points must be >= 1");
    numerics::GmresOptions gmres;
    gmres.tol_rel = a.gmres_tol;

    std::ostringstream os;
    os << std::setprecision(4);
    bool all = true;
    for (int p = 0; p < a.points; ++p) {
        harness::DiagnosticPoint point{cfg.theta_true, game.zero_values()};
        if (p == 0) {
            point.v = data::solve_equilibrium(game, cfg.theta_true).v;
        } else {
            point = harness::sample_diagnostic_point(game, cfg.theta_true, a.seed + static_cast<std::uint64_t>(p));
        }
        const auto report = harness::error_bound_report(game, point.theta, point.v, {}, gmres);
        os << "point " << p << (p == 0 ? " (theta_true, equilibrium)" : "") << ": cond = " << report.cond
           << ", eps_jvp = " << report.eps_jvp << ", gmres_tol = " << report.gmres_tol << '\n';
        os << "  column      |b|   eps_gmres      actual       bound  holds\n";
        for (const auto& c : report.columns) {
            const std::string name = c.column < game.n_params() ? "h" + std::to_string(c.column + 1) : "z";
            os << "  " << std::left << std::setw(6) << name << std::right << std::setw(9) << c.b_norm << std::setw(12)
               << c.eps_gmres << std::setw(12) << c.actual << std::setw(12) << c.bound << "  "
               << (c.holds ? "yes" : "NO") << '\n';
        }
        all = all && report.all_hold();
    }
    os << (all ? "bound holds on every column\n" : "bound VIOLATED on at least one column\n");
    if (a.out.empty()) {
        out << os.str();
    } else {
        write_text(a.out, os.str());
        out << "wrote diagnostic to " << a.out << '\n';
    }
    return all ? kExitOk : kExitNumerical;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Efficient pseudo-likelihood estimation of dynamic entry/exit games", "epl"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate a cross-section from the equilibrium of the configured game");
    simulate->add_option("--config", sim.config, "Run configuration file (key = value)")->check(CLI::ExistingFile);
    simulate->add_option("--out", sim.out, "Dataset CSV to write (metadata goes to <out>.meta)")->required();
    simulate->add_option("--seed", sim.seed, "Override the configured seed");
    simulate->add_option("--n-obs", sim.n_obs, "Override the configured sample size");

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate theta from a dataset");
    estimate->add_option("--data", est.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    estimate->add_option("--config", est.config, "Run configuration file (game definition)")->check(CLI::ExistingFile);
    estimate->add_option("--method", est.method, "epl-anal, epl-krylov, epl-jf or nfxp-jf")->capture_default_str();
    estimate->add_option("--k", est.k, "EPL iterations (positive integer) or 'inf'")->capture_default_str();
    estimate->add_option("--out", est.out, "Write the result record here instead of stdout");

    MonteCarloArgs mca;
    auto* montecarlo = app.add_subcommand("montecarlo", "Run Monte Carlo replications and write records.csv");
    montecarlo->add_option("--config", mca.config, "Run configuration file")->check(CLI::ExistingFile);
    montecarlo->add_option("--out", mca.out, "Output directory")->required();
    montecarlo->add_option("--reps", mca.reps, "Number of replications");
    montecarlo->add_option("--seed", mca.seed, "Base seed (replication r uses seed + r)");
    montecarlo->add_option("--n-obs", mca.n_obs, "Sample size per replication");
    montecarlo->add_option("--threads", mca.threads, "Worker threads")->capture_default_str();
    montecarlo->add_option("--method", mca.methods, "Methods, comma separated or repeated")->delimiter(',');
    montecarlo->add_option("--k", mca.k_list, "Iteration counts to report, e.g. 1,2,3,inf")->delimiter(',');
    montecarlo->add_flag("--quiet", mca.quiet, "No per-replication progress on stderr");

    std::string summary_dir;
    auto* summarize = app.add_subcommand("summarize", "Summarise records.csv into summary.txt and summary.csv");
    summarize->add_option("dir", summary_dir, "Directory holding records.csv (or the CSV itself)")->required();

    DiagnoseArgs diag;
    auto* diagnose = app.add_subcommand("diagnose", "Check the Jacobian-free linear solve against its forward-error bound");
    diagnose->add_option("--config", diag.config, "Run configuration file")->check(CLI::ExistingFile);
    diagnose->add_option("--points", diag.points, "Number of points (the first is theta_true)")->capture_default_str();
    diagnose->add_option("--seed", diag.seed, "Seed for the random points")->capture_default_str();
    diagnose->add_option("--gmres-tol", diag.gmres_tol, "GMRES relative tolerance")->capture_default_str();
    diagnose->add_option("--out", diag.out, "Write the report here instead of stdout");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim, out);
        if (estimate->parsed()) return run_estimate(est, out, err);
        if (montecarlo->parsed()) return run_montecarlo(mca, out, err);
        if (summarize->parsed()) return run_summarize(summary_dir, out);
        if (diagnose->parsed()) return run_diagnose(diag, out);
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace epl::cli
