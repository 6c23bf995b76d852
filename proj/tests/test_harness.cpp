#include <doctest.h>

#include <cmath>
#include <sstream>

#include "epl/data/equilibrium.hpp"
#include "epl/error.hpp"
#include "epl/harness/diagnostics.hpp"
#include "epl/harness/montecarlo.hpp"
#include "epl/harness/summary.hpp"
#include "support.hpp"

using namespace epl;
using namespace epl::harness;

namespace {

ReplicationRecord record(int rep, const std::string& method, int k, Vector theta, int iterations = 1,
                         double time = 1.0, bool converged = true) {
    ReplicationRecord r;
    r.rep = rep;
    r.method = method;
    r.k = k;
    r.theta = std::move(theta);
    r.iterations = iterations;
    r.time_total_sec = time;
    r.converged = converged;
    r.loglik = -1.0;
    return r;
}

MonteCarloConfig small_mc(int reps) {
    MonteCarloConfig cfg;
    cfg.replications = reps;
    cfg.base_seed = 7;
    cfg.game = test::small_config(2, 2);
    cfg.theta_true = game::Theta::reference(2);
    cfg.n_obs = 800;
    return cfg;
}

bool same_estimates(const std::vector<ReplicationRecord>& a, const std::vector<ReplicationRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].rep != b[i].rep || a[i].method != b[i].method || a[i].k != b[i].k) return false;
        if (a[i].converged != b[i].converged || a[i].iterations != b[i].iterations) return false;
        if (a[i].theta != b[i].theta || a[i].loglik != b[i].loglik) return false;
    }
    return true;
}

} // namespace

TEST_CASE("method names round-trip") {
    for (Method m : {Method::EplAnalytic, Method::EplKrylov, Method::EplJacobianFree, Method::NfxpJacobianFree}) {
        CHECK(parse_method(method_name(m)) == m);
    }
    CHECK_THROWS_AS(parse_method("epl-fast"), InvalidInput);
}

TEST_CASE("log10 difference and its floor") {
    const Vector a = (Vector(3) << 1.0, 2.0, 3.0).finished();
    Vector b = a;
    CHECK(log10_difference(a, b) == kLogDiffFloor);
    b[1] += 1e-4;
    CHECK(log10_difference(a, b) == doctest::Approx(-4.0).epsilon(1e-9));
    b[2] -= 1e-2;
    CHECK(log10_difference(a, b) == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("summary statistics match hand computation") {
    const Vector base = Vector::Zero(2);
    std::vector<ReplicationRecord> recs;
    const double jf_times[] = {1.0, 3.0, 2.0, 10.0};
    const int jf_iters[] = {5, 6, 4, 5};
    const double offsets[] = {1e-6, 1e-4, 1e-5, 1e-7};
    for (int rep = 0; rep < 4; ++rep) {
        recs.push_back(record(rep, "epl-anal", kInfinity, base, 5, 0.5));
        Vector t = base;
        t[1] = offsets[rep];
        recs.push_back(record(rep, "epl-jf", kInfinity, t, jf_iters[rep], jf_times[rep], rep != 3));
        recs.push_back(record(rep, "epl-anal", 2, base, 2, 0.2));
        recs.push_back(record(rep, "epl-jf", 2, base, 2, jf_times[rep] / 2));
    }
    const Summary s = summarize(recs);
    CHECK(s.get("epl-jf", kInfinity, "diff_mean") == doctest::Approx((-6.0 - 4.0 - 5.0 - 7.0) / 4));
    CHECK(s.get("epl-jf", kInfinity, "diff_max") == doctest::Approx(-4.0));
    CHECK(s.get("epl-jf", kInfinity, "iter_median") == 5.0);
    CHECK(s.get("epl-jf", kInfinity, "iter_max") == 6.0);
    CHECK(s.get("epl-jf", kInfinity, "nonconv_pct") == 25.0);
    CHECK(s.get("epl-jf", kInfinity, "time_total") == 16.0);
    CHECK(s.get("epl-jf", kInfinity, "time_mean") == 4.0);
    CHECK(s.get("epl-jf", kInfinity, "time_median") == 2.5);
    CHECK(s.get("epl-jf", kInfinity, "time_med_per_iter") == 0.5);
    CHECK(s.get("epl-jf", 2, "time_median") == 1.25);
    CHECK(s.get("epl-jf", 2, "time_med_per_iter") == 0.625);
    CHECK(s.get("epl-jf", 2, "diff_mean") == kLogDiffFloor);
    CHECK(std::isnan(s.get("epl-jf", 2, "iter_median")));
    CHECK(std::isnan(s.get("epl-anal", kInfinity, "diff_mean")));
    CHECK(s.get("epl-anal", kInfinity, "nonconv_pct") == 0.0);

    const std::string text = format_summary_text(s);
    CHECK(text.find("< -15") != std::string::npos);
    CHECK(text.find("log10(Diff) Mean") != std::string::npos);
    CHECK(text.find("Time Med/Iter") != std::string::npos);
    CHECK(text.find("25%") != std::string::npos);

    std::ostringstream csv;
    write_summary_csv(s, csv);
    CHECK(csv.str().rfind("method,k,stat,value\n", 0) == 0);
    CHECK(csv.str().find("epl-jf,inf,iter_max,6\n") != std::string::npos);
}

TEST_CASE("summary errors and the EPL-vs-NFXP layout") {
    std::vector<ReplicationRecord> recs{record(0, "epl-jf", kInfinity, Vector::Zero(2))};
    CHECK_THROWS_AS(summarize(recs), InvalidInput);
    CHECK_THROWS_AS(summarize({}), InvalidInput);
    recs.push_back(record(0, "epl-jf", kInfinity, Vector::Zero(2)));
    CHECK_THROWS_AS(summarize(recs), InvalidInput);  // duplicate

    std::vector<ReplicationRecord> t2;
    const double jf_t[] = {1.0, 2.0, 3.0};
    for (int rep = 0; rep < 3; ++rep) {
        Vector t = Vector::Zero(2);
        t[0] = std::pow(10.0, -3 - rep);
        t2.push_back(record(rep, "epl-jf", kInfinity, Vector::Zero(2), 5, jf_t[rep]));
        t2.push_back(record(rep, "nfxp-jf", kInfinity, t, 30, 10.0 * jf_t[rep]));
    }
    const Summary s = summarize(t2);
    CHECK(s.get("epl-jf-vs-nfxp-jf", kInfinity, "diff_mean") == doctest::Approx(-4.0));
    CHECK(s.get("epl-jf-vs-nfxp-jf", kInfinity, "diff_max") == doctest::Approx(-3.0));
    CHECK(s.get("epl-jf", kInfinity, "time_mean") == doctest::Approx(2.0));
    CHECK(s.get("epl-jf", kInfinity, "time_std") == doctest::Approx(1.0));
    CHECK(s.get("nfxp-jf", kInfinity, "time_std") == doctest::Approx(10.0));
    CHECK(format_summary_text(s).find("EPL-JF vs NFXP-JF") != std::string::npos);
}

TEST_CASE("records CSV round trip") {
    std::vector<ReplicationRecord> recs{record(0, "epl-anal", 1, (Vector(2) << 0.1, -1.0 / 3).finished(), 1, 0.25),
                                        record(0, "nfxp-jf", kInfinity, Vector::Constant(2, std::nan("")), 7, 3.5, false)};
    std::stringstream buf;
    write_records_csv(recs, buf);
    CHECK(buf.str().rfind("rep,method,k,converged,iterations,time_total_sec,loglik,theta_1,theta_2\n", 0) == 0);
    CHECK(buf.str().find(",inf,") != std::string::npos);
    const auto back = read_records_csv(buf);
    REQUIRE(back.size() == 2);
    CHECK(back[0].theta == recs[0].theta);
    CHECK(back[0].time_total_sec == 0.25);
    CHECK(back[1].k == kInfinity);
    CHECK_FALSE(back[1].converged);
    CHECK(std::isnan(back[1].theta[0]));

    std::istringstream broken("rep,method,k\n");
    CHECK_THROWS_AS(read_records_csv(broken), ParseError);
}

TEST_CASE("Monte Carlo accounting, determinism, and thread invariance") {
    MonteCarloConfig cfg = small_mc(1);
    cfg.methods = {Method::EplAnalytic};
    const auto one = run_monte_carlo(cfg);
    CHECK(one.size() == cfg.k_list.size());

    cfg = small_mc(3);
    cfg.methods = {Method::EplAnalytic, Method::EplJacobianFree};
    const auto serial = run_monte_carlo(cfg, 1);
    const auto again = run_monte_carlo(cfg, 1);
    const auto parallel = run_monte_carlo(cfg, 3);
    CHECK(serial.size() == 3 * 2 * 4);
    CHECK(same_estimates(serial, again));
    CHECK(same_estimates(serial, parallel));
    for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].rep == static_cast<int>(i / 8));
    // At this sample size the EPL sequence may cycle; both modes must see the same outcome.
    for (std::size_t i = 0; i < 4; ++i) {
        for (int rep = 0; rep < 3; ++rep) {
            CHECK(serial[rep * 8 + i].converged == serial[rep * 8 + 4 + i].converged);
        }
    }
}

TEST_CASE("k-EPL records equal separate fixed-k runs") {
    MonteCarloConfig cfg = small_mc(1);
    cfg.methods = {Method::EplJacobianFree};
    cfg.k_list = {1, 2, kInfinity};
    const auto snap = run_replication(cfg, 0);
    for (int k : {1, 2}) {
        MonteCarloConfig fixed = cfg;
        fixed.k_list = {k};
        const auto direct = run_replication(fixed, 0);
        REQUIRE(direct.size() == 1);
        CHECK(direct[0].iterations == k);
        CHECK((direct[0].theta - snap[static_cast<std::size_t>(k - 1)].theta).lpNorm<Eigen::Infinity>() == 0.0);
    }
}

TEST_CASE("failed runs become non-converged records") {
    MonteCarloConfig cfg = small_mc(1);
    cfg.methods = {Method::EplAnalytic};
    cfg.k_list = {1, 3, kInfinity};
    cfg.epl.max_outer = 1;
    cfg.epl.tol_theta = 1e-14;
    const auto recs = run_replication(cfg, 0);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].converged);
    CHECK_FALSE(recs[1].converged);
    CHECK_FALSE(recs[2].converged);
    CHECK(recs[2].iterations == 1);
}

TEST_CASE("error bound: identity Jacobian") {
    const game::Game g(test::small_config(1, 3, 0.0));
    test::Rng rng(301);
    const auto rep = error_bound_report(g, test::random_theta(rng, 1), test::random_values(g, rng));
    CHECK(rep.cond == doctest::Approx(1.0));
    CHECK(rep.columns.size() == 5);
    for (const auto& c : rep.columns) {
        CHECK(c.holds);
        if (c.b_norm > 0.0) {
            CHECK(c.bound == doctest::Approx((rep.eps_jvp + c.eps_gmres) / c.b_norm));
        } else {
            CHECK(c.actual == 0.0);  // zero right-hand side: the solve is exact
        }
    }
    CHECK(rep.all_hold());
}

TEST_CASE("error bound on the default game, and under a tighter GMRES tolerance") {
    const game::Game g(game::GameConfig{});
    const game::Theta th = game::Theta::reference(5);
    const auto v = data::solve_equilibrium(g, th).v;
    const auto loose = error_bound_report(g, th, v, {0, 6, 8});
    numerics::GmresOptions tight;
    tight.tol_rel = 1e-10;
    const auto strict = error_bound_report(g, th, v, {0, 6, 8}, tight);
    CHECK(loose.all_hold());
    CHECK(strict.all_hold());
    for (std::size_t i = 0; i < loose.columns.size(); ++i) {
        CHECK(strict.columns[i].actual < loose.columns[i].actual);
        CHECK(strict.columns[i].bound < loose.columns[i].bound);
    }
}

TEST_CASE("error bound guards the dense size") {
    const game::Game big(test::small_config(7, 5));
    CHECK_THROWS_AS(error_bound_report(big, game::Theta::reference(7), big.zero_values()), InvalidInput);
    const game::Game g(test::small_config(1, 2));
    CHECK_THROWS_AS(error_bound_report(g, game::Theta::reference(1), g.zero_values(), {9}), InvalidInput);
}
